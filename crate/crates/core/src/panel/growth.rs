use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::io::{
    check_header, csv_err, header_fields, parse_number, parse_quarter, reader, row_number,
};
use super::{PanelError, QuantilePoint, Quarter, QuarterlyPanel, Race, WageGrid};
use crate::fmt::csv_number;

const GROWTH_HEADER: [&str; 4] = ["quarter", "race", "quantile", "growth_pct"];

/// Minimum panel length for [`growth_rates`].
pub const MIN_GROWTH_QUARTERS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthMethod {
    /// `100 · (w_t − w_{t−4}) / w_{t−4}`.
    #[default]
    YearOverYear,
    /// `100 · ln(w_t / w_{t−1})`.
    QuarterLog,
}

impl GrowthMethod {
    pub fn lag(self) -> usize {
        match self {
            GrowthMethod::YearOverYear => 4,
            GrowthMethod::QuarterLog => 1,
        }
    }
}

/// Nominal wage growth in percent per (race, quantile) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSeries {
    pub method: GrowthMethod,
    /// Quarters with a defined growth rate.
    pub quarters: Vec<Quarter>,
    /// Rates indexed `[quantile][race]`, one grid per entry of `quarters`.
    pub rates: Vec<WageGrid>,
}

impl GrowthSeries {
    pub fn cell(&self, race: Race, quantile: QuantilePoint) -> Vec<f64> {
        self.rates
            .iter()
            .map(|g| g[quantile.index()][race.index()])
            .collect()
    }

    pub fn mean(&self, race: Race, quantile: QuantilePoint) -> f64 {
        let cell = self.cell(race, quantile);
        cell.iter().sum::<f64>() / cell.len() as f64
    }
}

pub fn growth_rates(
    panel: &QuarterlyPanel,
    method: GrowthMethod,
) -> Result<GrowthSeries, PanelError> {
    if panel.len() < MIN_GROWTH_QUARTERS {
        return Err(PanelError::TooShort {
            what: "growth rates",
            actual: panel.len(),
            required: MIN_GROWTH_QUARTERS,
        });
    }
    let lag = method.lag();
    let grids = panel.grids();
    let rates = (lag..grids.len())
        .map(|t| {
            let (now, then) = (&grids[t], &grids[t - lag]);
            let mut g = [[0.0; 3]; 3];
            for k in 0..3 {
                for r in 0..3 {
                    g[k][r] = match method {
                        GrowthMethod::YearOverYear => 100.0 * (now[k][r] - then[k][r]) / then[k][r],
                        GrowthMethod::QuarterLog => 100.0 * (now[k][r] / then[k][r]).ln(),
                    };
                }
            }
            g
        })
        .collect();
    Ok(GrowthSeries {
        method,
        quarters: panel.quarters()[lag..].to_vec(),
        rates,
    })
}

/// Writes `quarter,race,quantile,growth_pct`, ordered by quarter, race, quantile.
pub fn write_growth_csv<W: Write>(growth: &GrowthSeries, sink: W) -> Result<(), PanelError> {
    let mut wtr = csv::Writer::from_writer(sink);
    wtr.write_record(GROWTH_HEADER).map_err(csv_err)?;
    for (q, grid) in growth.quarters.iter().zip(&growth.rates) {
        for race in Race::ALL {
            for quantile in QuantilePoint::ALL {
                wtr.write_record([
                    q.to_string(),
                    race.to_string(),
                    quantile.to_string(),
                    csv_number(grid[quantile.index()][race.index()]),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    wtr.flush().map_err(|e| PanelError::Csv(e.to_string()))
}

/// Reads a growth CSV back. The method is not stored in the file and is
/// taken from the caller.
pub fn parse_growth_csv<R: Read>(
    source: R,
    method: GrowthMethod,
) -> Result<GrowthSeries, PanelError> {
    let mut rdr = reader(source);
    check_header(&header_fields(&mut rdr)?, &GROWTH_HEADER)?;
    let mut quarters: Vec<Quarter> = Vec::new();
    let mut rates: Vec<[[Option<f64>; 3]; 3]> = Vec::new();
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
        let value = parse_number(row, "growth_pct", &record[3])?;
        if quarters.last() != Some(&quarter) {
            if quarters.contains(&quarter) {
                return Err(PanelError::Row {
                    row,
                    reason: format!("quarter {quarter} rows are not contiguous"),
                });
            }
            quarters.push(quarter);
            rates.push([[None; 3]; 3]);
        }
        let slot = &mut rates.last_mut().expect("pushed above")[quantile.index()][race.index()];
        if slot.replace(value).is_some() {
            return Err(PanelError::Duplicate {
                row,
                key: format!("({quarter}, {race}, {quantile})"),
            });
        }
    }
    let rates = quarters
        .iter()
        .zip(rates)
        .map(|(&quarter, grid)| {
            let mut full = [[0.0; 3]; 3];
            for quantile in QuantilePoint::ALL {
                for race in Race::ALL {
                    full[quantile.index()][race.index()] = grid[quantile.index()][race.index()]
                        .ok_or(PanelError::MissingCell {
                            quarter,
                            race,
                            quantile,
                        })?;
                }
            }
            Ok(full)
        })
        .collect::<Result<_, PanelError>>()?;
    Ok(GrowthSeries {
        method,
        quarters,
        rates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel_from(f: impl Fn(usize, usize, usize) -> f64, len: usize) -> QuarterlyPanel {
        let grids = (0..len)
            .map(|t| {
                let mut g = [[0.0; 3]; 3];
                for (k, row) in g.iter_mut().enumerate() {
                    for (r, w) in row.iter_mut().enumerate() {
                        *w = f(t, k, r);
                    }
                }
                g
            })
            .collect();
        QuarterlyPanel::new("2000Q1".parse::<Quarter>().unwrap().range(len), grids).unwrap()
    }

    #[test]
    fn constant_wages_have_zero_growth() {
        let panel = panel_from(|_, k, r| 200.0 * (k + 1) as f64 + r as f64, 12);
        for method in [GrowthMethod::YearOverYear, GrowthMethod::QuarterLog] {
            let g = growth_rates(&panel, method).unwrap();
            assert!(g.rates.iter().flatten().flatten().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn doubling_every_year_is_one_hundred_percent() {
        let panel = panel_from(
            |t, k, r| (100.0 + 50.0 * k as f64 + r as f64) * 2f64.powf(t as f64 / 4.0),
            16,
        );
        let g = growth_rates(&panel, GrowthMethod::YearOverYear).unwrap();
        assert_eq!(g.quarters.len(), 12);
        assert_eq!(g.quarters[0].to_string(), "2001Q1");
        for x in g.rates.iter().flatten().flatten() {
            assert!((x - 100.0).abs() < 1e-10, "{x}");
        }
        let q = growth_rates(&panel, GrowthMethod::QuarterLog).unwrap();
        for x in q.rates.iter().flatten().flatten() {
            assert!((x - 25.0 * 2f64.ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn too_short_panel() {
        let panel = panel_from(|_, k, _| 100.0 + k as f64, 4);
        assert!(matches!(
            growth_rates(&panel, GrowthMethod::YearOverYear),
            Err(PanelError::TooShort {
                actual: 4,
                required: 5,
                ..
            })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let panel = panel_from(
            |t, k, r| 100.0 * (k + 1) as f64 + r as f64 + t as f64 * 0.7,
            9,
        );
        let g = growth_rates(&panel, GrowthMethod::YearOverYear).unwrap();
        let mut out = Vec::new();
        write_growth_csv(&g, &mut out).unwrap();
        let back = parse_growth_csv(out.as_slice(), GrowthMethod::YearOverYear).unwrap();
        assert_eq!(back.quarters, g.quarters);
        for (a, b) in back
            .rates
            .iter()
            .flatten()
            .flatten()
            .zip(g.rates.iter().flatten().flatten())
        {
            assert!((a - b).abs() <= 1e-9 * b.abs());
        }
    }
}
