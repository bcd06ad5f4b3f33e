//! Theil entropy index and its exact within/between-group decomposition.
//!
//! For a distribution `y` of `n` strictly positive wages with total `|y|`,
//! the Theil index is
//!
//! ```text
//! I(y) = Σ_i (y_i / |y|) · ln(n · y_i / |y|)
//! ```
//!
//! Given a partition of the observations into `l ≥ 2` groups, the index splits
//! additively into a within term (each group's index weighted by its wage
//! share) and a between term (the index of the "smoothed" distribution in which
//! every observation is replaced by its group mean):
//!
//! ```text
//! I(y) = Σ_g (|y_g| / |y|) · I(y_g) + I(ȳ_1 u^{n_1}; …; ȳ_l u^{n_l})
//! ```
//!
//! Population weights per observation are not supported; every entry counts
//! as one representative observation.

use thiserror::Error;

/// Errors raised by the inequality routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InequalityError {
    #[error("wage distribution is empty")]
    Empty,
    #[error("wage at position {index} is {value}; values must be strictly positive and finite")]
    DomainViolation { index: usize, value: f64 },
    #[error("partition covers {partition} observations but the distribution has {distribution}")]
    LengthMismatch {
        distribution: usize,
        partition: usize,
    },
    #[error("partition needs at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {0} has no members")]
    EmptyGroup(usize),
    #[error("observation {0} is assigned to more than one group")]
    Overlap(usize),
    #[error("observation {0} is not assigned to any group")]
    Uncovered(usize),
}

/// A strictly positive wage vector (one quarter's observations).
#[derive(Debug, Clone, PartialEq)]
pub struct WageDistribution {
    values: Vec<f64>,
}

impl WageDistribution {
    pub fn new(values: Vec<f64>) -> Result<Self, InequalityError> {
        if values.is_empty() {
            return Err(InequalityError::Empty);
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(InequalityError::DomainViolation { index, value });
        }
        Ok(Self { values })
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

    /// Sum of all wages, `|y|`.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.total() / self.values.len() as f64
    }

    /// Multiplies every wage by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, InequalityError> {
        Self::new(self.values.iter().map(|v| v * factor).collect())
    }

    /// Sub-distribution made of the given indices, in the order given.
    fn select(&self, indices: &[usize]) -> Self {
        Self {
            values: indices.iter().map(|&i| self.values[i]).collect(),
        }
    }
}

/// Assignment of observation indices to `l ≥ 2` disjoint, covering, nonempty groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    group_of: Vec<usize>,
    group_count: usize,
}

impl Partition {
    /// Builds a partition from an index → group-label map. Labels must be
    /// `0..l` with every label used at least once.
    pub fn new(group_of: Vec<usize>) -> Result<Self, InequalityError> {
        let group_count = group_of.iter().max().map_or(0, |m| m + 1);
        if group_count < 2 {
            return Err(InequalityError::TooFewGroups(group_count));
        }
        let mut sizes = vec![0usize; group_count];
        for &g in &group_of {
            sizes[g] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(InequalityError::EmptyGroup(empty));
        }
        Ok(Self {
            group_of,
            group_count,
        })
    }

    /// Builds a partition of `0..n` from explicit member lists.
    pub fn from_groups(groups: &[Vec<usize>], n: usize) -> Result<Self, InequalityError> {
        let mut group_of = vec![usize::MAX; n];
        for (g, members) in groups.iter().enumerate() {
            if members.is_empty() {
                return Err(InequalityError::EmptyGroup(g));
            }
            for &i in members {
                if i >= n {
                    return Err(InequalityError::LengthMismatch {
                        distribution: n,
                        partition: i + 1,
                    });
                }
                if group_of[i] != usize::MAX {
                    return Err(InequalityError::Overlap(i));
                }
                group_of[i] = g;
            }
        }
        if let Some(i) = group_of.iter().position(|&g| g == usize::MAX) {
            return Err(InequalityError::Uncovered(i));
        }
        if groups.len() < 2 {
            return Err(InequalityError::TooFewGroups(groups.len()));
        }
        Self::new(group_of)
    }

    pub fn len(&self) -> usize {
        self.group_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.group_of.is_empty()
    }

    pub fn group_count(&self) -> usize {
        self.group_count
    }

    pub fn group_of(&self, index: usize) -> usize {
        self.group_of[index]
    }

    /// Member indices of every group, ascending within each group.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.group_count];
        for (i, &g) in self.group_of.iter().enumerate() {
            members[g].push(i);
        }
        members
    }

    fn check_len(&self, dist: &WageDistribution) -> Result<(), InequalityError> {
        if self.len() != dist.len() {
            return Err(InequalityError::LengthMismatch {
                distribution: dist.len(),
                partition: self.len(),
            });
        }
        Ok(())
    }
}

/// One group's share of the decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupTerm {
    /// Group wage share `|y_g| / |y|`.
    pub weight: f64,
    /// Theil index of the group on its own.
    pub group_index: f64,
    /// `weight * group_index`.
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub total: f64,
    pub groups: Vec<GroupTerm>,
    pub between: f64,
}

impl DecompositionResult {
    /// Sum of the group contributions.
    pub fn within(&self) -> f64 {
        self.groups.iter().map(|g| g.contribution).sum()
    }

    /// `total - within - between`; zero up to rounding.
    pub fn residual(&self) -> f64 {
        self.total - self.within() - self.between
    }
}

/// Theil index of a validated distribution. Lies in `[0, ln n]`, and is
/// exactly zero when all wages are equal.
pub fn theil_index(dist: &WageDistribution) -> f64 {
    let values = dist.values();
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return 0.0;
    }
    let n = values.len() as f64;
    let total = dist.total();
    let index: f64 = values
        .iter()
        .map(|&v| {
            let share = v / total;
            share * (n * share).ln()
        })
        .sum();
    // Rounding can push a near-equal distribution a hair below zero.
    index.max(0.0)
}

/// Validates `values` and returns their Theil index.
pub fn theil_index_of(values: &[f64]) -> Result<f64, InequalityError> {
    Ok(theil_index(&WageDistribution::new(values.to_vec())?))
}

/// Replaces every wage by the mean of its group.
pub fn smoothed_distribution(
    dist: &WageDistribution,
    part: &Partition,
) -> Result<WageDistribution, InequalityError> {
    part.check_len(dist)?;
    let members = part.members();
    let means: Vec<f64> = members
        .iter()
        .map(|m| m.iter().map(|&i| dist.values[i]).sum::<f64>() / m.len() as f64)
        .collect();
    let values = (0..dist.len()).map(|i| means[part.group_of(i)]).collect();
    WageDistribution::new(values)
}

/// Splits the Theil index of `dist` into per-group and between-group terms.
pub fn decompose(
    dist: &WageDistribution,
    part: &Partition,
) -> Result<DecompositionResult, InequalityError> {
    part.check_len(dist)?;
    let total_wage = dist.total();
    let groups = part
        .members()
        .iter()
        .map(|members| {
            let sub = dist.select(members);
            let weight = sub.total() / total_wage;
            let group_index = theil_index(&sub);
            GroupTerm {
                weight,
                group_index,
                contribution: weight * group_index,
            }
        })
        .collect();
    let between = theil_index(&smoothed_distribution(dist, part)?);
    Ok(DecompositionResult {
        total: theil_index(dist),
        groups,
        between,
    })
}
