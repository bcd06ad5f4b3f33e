use std::io::{Read, Write};

use nalgebra::DVector;

use super::VarxError;
use crate::fmt::csv_number;

const IRF_HEADER: [&str; 5] = ["horizon", "variable", "point", "lower", "upper"];

/// Responses over horizons `0..=H`, indexed `[horizon][variable]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    pub variables: Vec<String>,
    pub point: Vec<Vec<f64>>,
    pub lower: Vec<Vec<f64>>,
    pub upper: Vec<Vec<f64>>,
}

impl ImpulseResponse {
    pub(crate) fn from_points(variables: Vec<String>, psi: &[DVector<f64>]) -> Self {
        let point: Vec<Vec<f64>> = psi.iter().map(|p| p.iter().copied().collect()).collect();
        Self {
            variables,
            lower: point.clone(),
            upper: point.clone(),
            point,
        }
    }

    /// Largest horizon `H`.
    pub fn horizon(&self) -> usize {
        self.point.len().saturating_sub(1)
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    /// `(point, lower, upper)` paths of one variable.
    pub fn path(&self, var: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let pick = |m: &Vec<Vec<f64>>| m.iter().map(|row| row[var]).collect();
        (pick(&self.point), pick(&self.lower), pick(&self.upper))
    }

    /// Horizon with the largest absolute point response.
    pub fn peak_horizon(&self, var: usize) -> usize {
        (0..self.point.len())
            .max_by(|&a, &b| {
                self.point[a][var]
                    .abs()
                    .total_cmp(&self.point[b][var].abs())
            })
            .unwrap_or(0)
    }

    pub fn band_covers(&self, horizon: usize, var: usize, value: f64) -> bool {
        self.lower[horizon][var] <= value && value <= self.upper[horizon][var]
    }

    /// `lower ≤ point ≤ upper` everywhere.
    pub fn is_ordered(&self) -> bool {
        self.point.iter().enumerate().all(|(h, row)| {
            row.iter()
                .enumerate()
                .all(|(v, &p)| self.lower[h][v] <= p && p <= self.upper[h][v])
        })
    }
}

/// Writes `horizon,variable,point,lower,upper`, horizon-major.
pub fn write_irf_csv<W: Write>(irf: &ImpulseResponse, sink: W) -> Result<(), VarxError> {
    let io = |e: csv::Error| VarxError::Format {
        row: 0,
        reason: e.to_string(),
    };
    let mut wtr = csv::Writer::from_writer(sink);
    wtr.write_record(IRF_HEADER).map_err(io)?;
    for h in 0..irf.point.len() {
        for (v, name) in irf.variables.iter().enumerate() {
            wtr.write_record([
                h.to_string(),
                name.clone(),
                csv_number(irf.point[h][v]),
                csv_number(irf.lower[h][v]),
                csv_number(irf.upper[h][v]),
            ])
            .map_err(io)?;
        }
    }
    wtr.flush().map_err(|e| VarxError::Format {
        row: 0,
        reason: e.to_string(),
    })
}

/// Reads a file produced by [`write_irf_csv`]; horizon-major rows with the
/// same variable order at every horizon are required.
pub fn parse_irf_csv<R: Read>(source: R) -> Result<ImpulseResponse, VarxError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let fail = |row: u64, reason: String| VarxError::Format { row, reason };
    let header = rdr.headers().map_err(|e| fail(1, e.to_string()))?;
    if header.iter().ne(IRF_HEADER) {
        return Err(fail(
            1,
            format!("header must be `{}`", IRF_HEADER.join(",")),
        ));
    }
    let mut variables: Vec<String> = Vec::new();
    let mut rows: Vec<(usize, String, [f64; 3], u64)> = Vec::new();
    for record in rdr.records() {
        let record =
            record.map_err(|e| fail(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let row = record.position().map_or(0, |p| p.line());
        let h: usize = record[0]
            .parse()
            .map_err(|_| fail(row, format!("bad horizon {:?}", &record[0])))?;
        let mut vals = [0.0; 3];
        for (slot, field) in vals.iter_mut().zip(record.iter().skip(2)) {
            *slot = field
                .parse()
                .map_err(|_| fail(row, format!("bad number {field:?}")))?;
        }
        if h == 0 {
            variables.push(record[1].to_string());
        }
        rows.push((h, record[1].to_string(), vals, row));
    }
    let k = variables.len();
    if k == 0 || !rows.len().is_multiple_of(k) {
        return Err(fail(
            0,
            "rows do not form a complete horizon × variable grid".into(),
        ));
    }
    let horizons = rows.len() / k;
    let mut point = vec![vec![0.0; k]; horizons];
    let mut lower = point.clone();
    let mut upper = point.clone();
    for (i, (h, name, [p, lo, hi], row)) in rows.into_iter().enumerate() {
        if h != i / k || name != variables[i % k] {
            return Err(fail(
                row,
                format!("expected horizon {} variable {}", i / k, variables[i % k]),
            ));
        }
        point[h][i % k] = p;
        lower[h][i % k] = lo;
        upper[h][i % k] = hi;
    }
    Ok(ImpulseResponse {
        variables,
        point,
        lower,
        upper,
    })
}
