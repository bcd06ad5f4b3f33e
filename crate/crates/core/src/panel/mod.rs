//! Quarterly wage panels keyed by race and quantile point, the exogenous shock
//! series, and the inequality and growth series derived from them.

mod growth;
mod io;
mod quarter;
mod series;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inequality::{InequalityError, Partition, WageDistribution};

pub use growth::{
    growth_rates, parse_growth_csv, write_growth_csv, GrowthMethod, GrowthSeries,
    MIN_GROWTH_QUARTERS,
};
pub use io::{parse_series_csv, parse_shock_csv, parse_wage_csv, write_shock_csv, write_wage_csv};
pub use quarter::{Quarter, QuarterParseError};
pub use series::{
    compute_series, parse_inequality_csv, standardize, write_inequality_csv, InequalityRow,
    InequalitySeries, SeriesColumn,
};

/// Shortest span `align` accepts.
pub const MIN_ALIGNED_QUARTERS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PanelError {
    #[error("csv: {0}")]
    Csv(String),
    #[error("header must be `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("row {row}: {reason}")]
    Row { row: u64, reason: String },
    #[error("row {row}: wage {value} is not strictly positive (domain violation)")]
    NonPositiveWage { row: u64, value: f64 },
    #[error("quarter {quarter}, race {race}, quantile {quantile}: wage {value} is not strictly positive (domain violation)")]
    NonPositiveCell {
        quarter: Quarter,
        race: Race,
        quantile: QuantilePoint,
        value: f64,
    },
    #[error("row {row}: duplicate entry for {key}")]
    Duplicate { row: u64, key: String },
    #[error("missing cell: quarter {quarter}, race {race}, quantile {quantile}")]
    MissingCell {
        quarter: Quarter,
        race: Race,
        quantile: QuantilePoint,
    },
    #[error("quarters are not contiguous: {before} is followed by {after}")]
    Gap { before: Quarter, after: Quarter },
    #[error("quarter {quarter}, race {race}: wages must satisfy D1 <= Q3 <= D9")]
    NotMonotone { quarter: Quarter, race: Race },
    #[error("value {value} at quarter {quarter} is not finite")]
    NonFinite { quarter: Quarter, value: f64 },
    #[error("no data rows")]
    Empty,
    #[error("quarter and value counts differ ({quarters} vs {values})")]
    LengthMismatch { quarters: usize, values: usize },
    #[error("quarter {0} is not in the panel")]
    QuarterAbsent(Quarter),
    #[error("quarter ranges {first} and {second} do not overlap")]
    Disjoint { first: String, second: String },
    #[error("{what}: {actual} quarters available, at least {required} required")]
    TooShort {
        what: &'static str,
        actual: usize,
        required: usize,
    },
    #[error("series has zero sample variance")]
    ZeroVariance,
    #[error(transparent)]
    Inequality(#[from] InequalityError),
}

/// Racial groups, in the canonical (alphabetical) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Race {
    Asian,
    Black,
    White,
}

impl Race {
    pub const ALL: [Race; 3] = [Race::Asian, Race::Black, Race::White];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Race::Asian => "Asian",
            Race::Black => "Black",
            Race::White => "White",
        }
    }
}

impl fmt::Display for Race {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Race {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Race::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown race {s:?}; expected Asian, Black or White"))
    }
}

/// Points of the wage distribution, lowest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QuantilePoint {
    /// First decile.
    D1,
    /// Third quartile.
    Q3,
    /// Ninth decile.
    D9,
}

impl QuantilePoint {
    pub const ALL: [QuantilePoint; 3] = [QuantilePoint::D1, QuantilePoint::Q3, QuantilePoint::D9];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QuantilePoint::D1 => "D1",
            QuantilePoint::Q3 => "Q3",
            QuantilePoint::D9 => "D9",
        }
    }
}

impl fmt::Display for QuantilePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuantilePoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QuantilePoint::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| format!("unknown quantile {s:?}; expected D1, Q3 or D9"))
    }
}

/// One quarter's 3×3 wage grid, indexed `[quantile][race]`.
pub type WageGrid = [[f64; 3]; 3];

/// Contiguous quarterly panel of weekly wages (current dollars).
#[derive(Debug, Clone, PartialEq)]
pub struct QuarterlyPanel {
    quarters: Vec<Quarter>,
    wages: Vec<WageGrid>,
}

impl QuarterlyPanel {
    pub fn new(quarters: Vec<Quarter>, wages: Vec<WageGrid>) -> Result<Self, PanelError> {
        if quarters.len() != wages.len() {
            return Err(PanelError::LengthMismatch {
                quarters: quarters.len(),
                values: wages.len(),
            });
        }
        if quarters.is_empty() {
            return Err(PanelError::Empty);
        }
        check_contiguous(&quarters)?;
        for (&quarter, grid) in quarters.iter().zip(&wages) {
            for race in Race::ALL {
                let column = QuantilePoint::ALL.map(|q| grid[q.index()][race.index()]);
                if let Some(quantile) = QuantilePoint::ALL
                    .into_iter()
                    .find(|q| !(column[q.index()].is_finite() && column[q.index()] > 0.0))
                {
                    return Err(PanelError::NonPositiveCell {
                        quarter,
                        race,
                        quantile,
                        value: column[quantile.index()],
                    });
                }
                if !(column[0] <= column[1] && column[1] <= column[2]) {
                    return Err(PanelError::NotMonotone { quarter, race });
                }
            }
        }
        Ok(Self { quarters, wages })
    }

    pub fn quarters(&self) -> &[Quarter] {
        &self.quarters
    }

    pub fn grids(&self) -> &[WageGrid] {
        &self.wages
    }

    pub fn len(&self) -> usize {
        self.quarters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quarters.is_empty()
    }

    pub fn first(&self) -> Quarter {
        self.quarters[0]
    }

    pub fn last(&self) -> Quarter {
        *self.quarters.last().expect("panel is nonempty")
    }

    fn position(&self, quarter: Quarter) -> Option<usize> {
        let offset = quarter.ordinal() - self.first().ordinal();
        (0..self.len() as i64)
            .contains(&offset)
            .then_some(offset as usize)
    }

    pub fn grid(&self, quarter: Quarter) -> Option<&WageGrid> {
        self.position(quarter).map(|i| &self.wages[i])
    }

    pub fn wage(&self, quarter: Quarter, race: Race, quantile: QuantilePoint) -> Option<f64> {
        self.grid(quarter)
            .map(|g| g[quantile.index()][race.index()])
    }

    /// Restriction to `[start, end]`; `None` when nothing is left.
    pub fn restrict(&self, start: Quarter, end: Quarter) -> Option<Self> {
        let (lo, hi) = overlap(self.first(), self.last(), start, end)?;
        let a = self.position(lo)?;
        let b = self.position(hi)?;
        Some(Self {
            quarters: self.quarters[a..=b].to_vec(),
            wages: self.wages[a..=b].to_vec(),
        })
    }

    /// Multiplies every wage by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, PanelError> {
        let wages = self
            .wages
            .iter()
            .map(|g| g.map(|row| row.map(|w| w * factor)))
            .collect();
        Self::new(self.quarters.clone(), wages)
    }
}

/// A single value per quarter, e.g. the monetary-policy shock (negative =
/// accommodative) or a control such as industrial production.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockSeries {
    name: String,
    quarters: Vec<Quarter>,
    values: Vec<f64>,
}

impl ShockSeries {
    pub fn new(
        name: impl Into<String>,
        quarters: Vec<Quarter>,
        values: Vec<f64>,
    ) -> Result<Self, PanelError> {
        if quarters.len() != values.len() {
            return Err(PanelError::LengthMismatch {
                quarters: quarters.len(),
                values: values.len(),
            });
        }
        if quarters.is_empty() {
            return Err(PanelError::Empty);
        }
        check_contiguous(&quarters)?;
        if let Some((&quarter, &value)) = quarters.iter().zip(&values).find(|(_, v)| !v.is_finite())
        {
            return Err(PanelError::NonFinite { quarter, value });
        }
        Ok(Self {
            name: name.into(),
            quarters,
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn quarters(&self) -> &[Quarter] {
        &self.quarters
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> Quarter {
        self.quarters[0]
    }

    pub fn last(&self) -> Quarter {
        *self.quarters.last().expect("series is nonempty")
    }

    pub fn restrict(&self, start: Quarter, end: Quarter) -> Option<Self> {
        let (lo, hi) = overlap(self.first(), self.last(), start, end)?;
        let a = (lo.ordinal() - self.first().ordinal()) as usize;
        let b = (hi.ordinal() - self.first().ordinal()) as usize;
        Some(Self {
            name: self.name.clone(),
            quarters: self.quarters[a..=b].to_vec(),
            values: self.values[a..=b].to_vec(),
        })
    }

    /// Values for exactly `quarters`, which must be a contiguous subrange.
    pub fn values_for(&self, quarters: &[Quarter]) -> Result<Vec<f64>, PanelError> {
        let (Some(&start), Some(&end)) = (quarters.first(), quarters.last()) else {
            return Ok(Vec::new());
        };
        match self.restrict(start, end) {
            Some(s) if s.len() == quarters.len() => Ok(s.values),
            _ => Err(PanelError::TooShort {
                what: "series coverage",
                actual: self.restrict(start, end).map_or(0, |s| s.len()),
                required: quarters.len(),
            }),
        }
    }
}

/// Panel and shocks restricted to their common quarters.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedData {
    pub panel: QuarterlyPanel,
    pub shocks: ShockSeries,
}

impl AlignedData {
    pub fn quarters(&self) -> &[Quarter] {
        self.panel.quarters()
    }
}

/// Restricts panel and shocks to their overlapping quarters.
pub fn align(panel: &QuarterlyPanel, shocks: &ShockSeries) -> Result<AlignedData, PanelError> {
    let disjoint = || PanelError::Disjoint {
        first: format!("{}..{}", panel.first(), panel.last()),
        second: format!("{}..{}", shocks.first(), shocks.last()),
    };
    let (start, end) =
        overlap(panel.first(), panel.last(), shocks.first(), shocks.last()).ok_or_else(disjoint)?;
    let panel = panel.restrict(start, end).ok_or_else(disjoint)?;
    let shocks = shocks.restrict(start, end).ok_or_else(disjoint)?;
    if panel.len() < MIN_ALIGNED_QUARTERS {
        return Err(PanelError::TooShort {
            what: "aligned sample",
            actual: panel.len(),
            required: MIN_ALIGNED_QUARTERS,
        });
    }
    Ok(AlignedData { panel, shocks })
}

/// The quarter's nine wages in canonical order (D1: Asian, Black, White;
/// Q3: …; D9: …) and the partition into the three quantile groups.
pub fn build_distribution(
    panel: &QuarterlyPanel,
    quarter: Quarter,
) -> Result<(WageDistribution, Partition), PanelError> {
    let grid = panel
        .grid(quarter)
        .ok_or(PanelError::QuarterAbsent(quarter))?;
    Ok(distribution_from_grid(grid)?)
}

pub(crate) fn distribution_from_grid(
    grid: &WageGrid,
) -> Result<(WageDistribution, Partition), InequalityError> {
    let values: Vec<f64> = grid.iter().flatten().copied().collect();
    let group_of = (0..values.len()).map(|i| i / Race::ALL.len()).collect();
    Ok((WageDistribution::new(values)?, Partition::new(group_of)?))
}

fn overlap(a0: Quarter, a1: Quarter, b0: Quarter, b1: Quarter) -> Option<(Quarter, Quarter)> {
    let lo = a0.max(b0);
    let hi = a1.min(b1);
    (lo <= hi).then_some((lo, hi))
}

fn check_contiguous(quarters: &[Quarter]) -> Result<(), PanelError> {
    for pair in quarters.windows(2) {
        if pair[1] != pair[0].next() {
            return Err(PanelError::Gap {
                before: pair[0],
                after: pair[1],
            });
        }
    }
    Ok(())
}
