use std::io::{Read, Write};

use super::io::{
    check_header, csv_err, header_fields, parse_number, parse_quarter, reader, row_number,
};
use super::{distribution_from_grid, PanelError, QuantilePoint, Quarter, QuarterlyPanel};
use crate::fmt::csv_number;
use crate::inequality::decompose;

const SERIES_HEADER: [&str; 8] = [
    "quarter",
    "total",
    "within_d1",
    "within_q3",
    "within_d9",
    "between",
    "within_share",
    "between_share",
];

/// One quarter of the decomposed Theil index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityRow {
    pub total: f64,
    /// Contribution (wage share × group index) of racial inequality inside
    /// D1, Q3 and D9.
    pub within_by_group: [f64; 3],
    pub between: f64,
    pub within_share: f64,
    pub between_share: f64,
    /// Set when `total == 0` and the shares are a convention rather than a ratio.
    pub degenerate: bool,
}

impl InequalityRow {
    pub fn within(&self) -> f64 {
        self.within_by_group.iter().sum()
    }
}

/// Columns usable as endogenous variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesColumn {
    Total,
    Within(QuantilePoint),
    Between,
}

impl SeriesColumn {
    /// The within-D1, within-Q3, within-D9 and between columns.
    pub const COMPONENTS: [SeriesColumn; 4] = [
        SeriesColumn::Within(QuantilePoint::D1),
        SeriesColumn::Within(QuantilePoint::Q3),
        SeriesColumn::Within(QuantilePoint::D9),
        SeriesColumn::Between,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SeriesColumn::Total => "total",
            SeriesColumn::Within(QuantilePoint::D1) => "within_d1",
            SeriesColumn::Within(QuantilePoint::Q3) => "within_q3",
            SeriesColumn::Within(QuantilePoint::D9) => "within_d9",
            SeriesColumn::Between => "between",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalitySeries {
    pub quarters: Vec<Quarter>,
    pub rows: Vec<InequalityRow>,
}

impl InequalitySeries {
    pub fn column(&self, column: SeriesColumn) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| match column {
                SeriesColumn::Total => r.total,
                SeriesColumn::Within(q) => r.within_by_group[q.index()],
                SeriesColumn::Between => r.between,
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Decomposes every quarter of the panel. A quarter with zero total
/// inequality reports `within_share = 0`, `between_share = 1` and is tagged
/// `degenerate`.
pub fn compute_series(panel: &QuarterlyPanel) -> Result<InequalitySeries, PanelError> {
    let rows = panel
        .grids()
        .iter()
        .map(|grid| {
            let (dist, part) = distribution_from_grid(grid)?;
            let d = decompose(&dist, &part)?;
            let within_by_group = [
                d.groups[0].contribution,
                d.groups[1].contribution,
                d.groups[2].contribution,
            ];
            let within: f64 = within_by_group.iter().sum();
            let degenerate = d.total == 0.0;
            let (within_share, between_share) = if degenerate {
                (0.0, 1.0)
            } else {
                (within / d.total, d.between / d.total)
            };
            Ok(InequalityRow {
                total: d.total,
                within_by_group,
                between: d.between,
                within_share,
                between_share,
                degenerate,
            })
        })
        .collect::<Result<Vec<_>, PanelError>>()?;
    Ok(InequalitySeries {
        quarters: panel.quarters().to_vec(),
        rows,
    })
}

/// Writes the series CSV with every value at 10 significant digits.
pub fn write_inequality_csv<W: Write>(
    series: &InequalitySeries,
    sink: W,
) -> Result<(), PanelError> {
    let mut wtr = csv::Writer::from_writer(sink);
    wtr.write_record(SERIES_HEADER).map_err(csv_err)?;
    for (q, r) in series.quarters.iter().zip(&series.rows) {
        let mut record = vec![q.to_string(), csv_number(r.total)];
        record.extend(r.within_by_group.iter().map(|&w| csv_number(w)));
        record.extend([r.between, r.within_share, r.between_share].map(csv_number));
        wtr.write_record(&record).map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| PanelError::Csv(e.to_string()))
}

/// Reads a file produced by [`write_inequality_csv`].
pub fn parse_inequality_csv<R: Read>(source: R) -> Result<InequalitySeries, PanelError> {
    let mut rdr = reader(source);
    check_header(&header_fields(&mut rdr)?, &SERIES_HEADER)?;
    let mut quarters = Vec::new();
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let row = row_number(&record);
        quarters.push(parse_quarter(row, &record[0])?);
        let mut v = [0.0; 7];
        for (slot, (field, name)) in v
            .iter_mut()
            .zip(record.iter().skip(1).zip(&SERIES_HEADER[1..]))
        {
            *slot = parse_number(row, name, field)?;
        }
        rows.push(InequalityRow {
            total: v[0],
            within_by_group: [v[1], v[2], v[3]],
            between: v[4],
            within_share: v[5],
            between_share: v[6],
            degenerate: v[0] == 0.0,
        });
    }
    Ok(InequalitySeries { quarters, rows })
}

/// `(x − mean) / sd` with the sample (n − 1) standard deviation.
pub fn standardize(series: &[f64]) -> Result<Vec<f64>, PanelError> {
    if series.len() < 2 {
        return Err(PanelError::TooShort {
            what: "standardize",
            actual: series.len(),
            required: 2,
        });
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    // Relative floor so rounding noise on a constant series is not rescaled.
    let scale = series.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if sd.is_nan() || sd <= scale * 1e-13 {
        return Err(PanelError::ZeroVariance);
    }
    Ok(series.iter().map(|x| (x - mean) / sd).collect())
}
