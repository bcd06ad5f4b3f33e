//! Wage CSV (`quarter,race,quantile,wage`) and single-series CSV
//! (`quarter,<name>`, e.g. `quarter,shock`) readers and writers.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use super::{PanelError, QuantilePoint, Quarter, QuarterlyPanel, Race, ShockSeries, WageGrid};

const WAGE_HEADER: [&str; 4] = ["quarter", "race", "quantile", "wage"];
pub(crate) const SHOCK_COLUMN: &str = "shock";

pub(crate) fn reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source)
}

pub(crate) fn csv_err(e: csv::Error) -> PanelError {
    match e.position() {
        Some(pos) => PanelError::Row {
            row: pos.line(),
            reason: e.to_string(),
        },
        None => PanelError::Csv(e.to_string()),
    }
}

pub(crate) fn header_fields<R: Read>(rdr: &mut csv::Reader<R>) -> Result<Vec<String>, PanelError> {
    let header = rdr.headers().map_err(csv_err)?;
    Ok(header
        .iter()
        .enumerate()
        .map(|(i, f)| {
            if i == 0 {
                f.trim_start_matches('\u{feff}')
            } else {
                f
            }
            .to_string()
        })
        .collect())
}

pub(crate) fn check_header(found: &[String], expected: &[&str]) -> Result<(), PanelError> {
    if found.len() != expected.len() || found.iter().zip(expected).any(|(a, b)| a != b) {
        return Err(PanelError::Header {
            expected: expected.join(","),
            found: found.join(","),
        });
    }
    Ok(())
}

pub(crate) fn row_number(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

pub(crate) fn parse_quarter(row: u64, field: &str) -> Result<Quarter, PanelError> {
    field
        .parse()
        .map_err(|e: super::QuarterParseError| PanelError::Row {
            row,
            reason: e.to_string(),
        })
}

pub(crate) fn parse_number(row: u64, column: &str, field: &str) -> Result<f64, PanelError> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(PanelError::Row {
            row,
            reason: format!("{column} value {field:?} is not a finite number"),
        }),
    }
}

/// Reads a wage panel. Rows may come in any order; every quarter in the
/// covered range must carry all nine (race, quantile) cells.
pub fn parse_wage_csv<R: Read>(source: R) -> Result<QuarterlyPanel, PanelError> {
    let mut rdr = reader(source);
    check_header(&header_fields(&mut rdr)?, &WAGE_HEADER)?;

    let mut cells: BTreeMap<Quarter, [[Option<f64>; 3]; 3]> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let row = row_number(&record);
        let quarter = parse_quarter(row, &record[0])?;
        let race: Race = record[1]
            .parse()
            .map_err(|reason| PanelError::Row { row, reason })?;
        let quantile: QuantilePoint = record[2]
            .parse()
            .map_err(|reason| PanelError::Row { row, reason })?;
        let wage = parse_number(row, "wage", &record[3])?;
        if wage <= 0.0 {
            return Err(PanelError::NonPositiveWage { row, value: wage });
        }
        let slot = &mut cells.entry(quarter).or_default()[quantile.index()][race.index()];
        if slot.is_some() {
            return Err(PanelError::Duplicate {
                row,
                key: format!("({quarter}, {race}, {quantile})"),
            });
        }
        *slot = Some(wage);
    }
    if cells.is_empty() {
        return Err(PanelError::Empty);
    }

    let quarters: Vec<Quarter> = cells.keys().copied().collect();
    for pair in quarters.windows(2) {
        if pair[1] != pair[0].next() {
            return Err(PanelError::Gap {
                before: pair[0],
                after: pair[1],
            });
        }
    }
    let mut wages = Vec::with_capacity(cells.len());
    for (&quarter, grid) in &cells {
        let mut full: WageGrid = [[0.0; 3]; 3];
        for quantile in QuantilePoint::ALL {
            for race in Race::ALL {
                full[quantile.index()][race.index()] =
                    grid[quantile.index()][race.index()].ok_or(PanelError::MissingCell {
                        quarter,
                        race,
                        quantile,
                    })?;
            }
        }
        wages.push(full);
    }
    QuarterlyPanel::new(quarters, wages)
}

/// Writes a panel in canonical row order (quarter, then quantile, then race).
/// Wages are written in shortest round-trip form.
pub fn write_wage_csv<W: Write>(panel: &QuarterlyPanel, sink: W) -> Result<(), PanelError> {
    let mut wtr = csv::Writer::from_writer(sink);
    wtr.write_record(WAGE_HEADER).map_err(csv_err)?;
    for (quarter, grid) in panel.quarters().iter().zip(panel.grids()) {
        for quantile in QuantilePoint::ALL {
            for race in Race::ALL {
                wtr.write_record([
                    quarter.to_string(),
                    race.to_string(),
                    quantile.to_string(),
                    grid[quantile.index()][race.index()].to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    wtr.flush().map_err(|e| PanelError::Csv(e.to_string()))
}

fn parse_single<R: Read>(source: R, column: Option<&str>) -> Result<ShockSeries, PanelError> {
    let mut rdr = reader(source);
    let header = header_fields(&mut rdr)?;
    let name = match column {
        Some(expected) => {
            check_header(&header, &["quarter", expected])?;
            expected.to_string()
        }
        None => {
            if header.len() != 2 || header[0] != "quarter" || header[1].is_empty() {
                return Err(PanelError::Header {
                    expected: "quarter,<name>".into(),
                    found: header.join(","),
                });
            }
            header[1].clone()
        }
    };

    let mut values: BTreeMap<Quarter, f64> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let row = row_number(&record);
        let quarter = parse_quarter(row, &record[0])?;
        let value = parse_number(row, &name, &record[1])?;
        if values.insert(quarter, value).is_some() {
            return Err(PanelError::Duplicate {
                row,
                key: format!("quarter {quarter}"),
            });
        }
    }
    let (quarters, values) = values.into_iter().unzip();
    ShockSeries::new(name, quarters, values)
}

/// Reads a `quarter,shock` file.
pub fn parse_shock_csv<R: Read>(source: R) -> Result<ShockSeries, PanelError> {
    parse_single(source, Some(SHOCK_COLUMN))
}

/// Reads any `quarter,<name>` single-series file (controls such as
/// industrial production). The series takes its name from the header.
pub fn parse_series_csv<R: Read>(source: R) -> Result<ShockSeries, PanelError> {
    parse_single(source, None)
}

/// Writes `quarter,<series name>` rows in quarter order.
pub fn write_shock_csv<W: Write>(series: &ShockSeries, sink: W) -> Result<(), PanelError> {
    let mut wtr = csv::Writer::from_writer(sink);
    wtr.write_record(["quarter", series.name()])
        .map_err(csv_err)?;
    for (q, v) in series.quarters().iter().zip(series.values()) {
        wtr.write_record([q.to_string(), v.to_string()])
            .map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| PanelError::Csv(e.to_string()))
}
