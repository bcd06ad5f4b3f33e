use nalgebra::DMatrix;

use super::{VarxError, VarxSpec};
use crate::panel::{standardize, Quarter};

/// Observations required beyond the regressor count.
pub const DF_SLACK: usize = 10;

/// Aligned endogenous block and exogenous shock path.
#[derive(Debug, Clone, PartialEq)]
pub struct VarxData {
    quarters: Vec<Quarter>,
    names: Vec<String>,
    exog_name: String,
    /// `T × k`.
    endog: DMatrix<f64>,
    exog: Vec<f64>,
}

impl VarxData {
    /// `columns[i]` is the full path of endogenous variable `names[i]`.
    pub fn new(
        quarters: Vec<Quarter>,
        names: Vec<String>,
        columns: &[Vec<f64>],
        exog_name: impl Into<String>,
        exog: Vec<f64>,
    ) -> Result<Self, VarxError> {
        let t = quarters.len();
        if names.is_empty() || names.len() != columns.len() {
            return Err(VarxError::InvalidData(format!(
                "{} names for {} endogenous columns",
                names.len(),
                columns.len()
            )));
        }
        if let Some((name, c)) = names.iter().zip(columns).find(|(_, c)| c.len() != t) {
            return Err(VarxError::InvalidData(format!(
                "column {name} has {} values for {t} quarters",
                c.len()
            )));
        }
        if exog.len() != t {
            return Err(VarxError::InvalidData(format!(
                "shock path has {} values for {t} quarters",
                exog.len()
            )));
        }
        for pair in quarters.windows(2) {
            if pair[1] != pair[0].next() {
                return Err(VarxError::InvalidData(format!(
                    "quarters not contiguous at {} -> {}",
                    pair[0], pair[1]
                )));
            }
        }
        let endog = DMatrix::from_fn(t, columns.len(), |r, c| columns[c][r]);
        Self::from_parts(quarters, names, exog_name.into(), endog, exog)
    }

    fn from_parts(
        quarters: Vec<Quarter>,
        names: Vec<String>,
        exog_name: String,
        endog: DMatrix<f64>,
        exog: Vec<f64>,
    ) -> Result<Self, VarxError> {
        if endog.iter().chain(&exog).any(|v| !v.is_finite()) {
            return Err(VarxError::InvalidData("non-finite observation".into()));
        }
        Ok(Self {
            quarters,
            names,
            exog_name,
            endog,
            exog,
        })
    }

    pub fn quarters(&self) -> &[Quarter] {
        &self.quarters
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn exog_name(&self) -> &str {
        &self.exog_name
    }

    pub fn endog(&self) -> &DMatrix<f64> {
        &self.endog
    }

    pub fn exog(&self) -> &[f64] {
        &self.exog
    }

    pub fn len(&self) -> usize {
        self.quarters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quarters.is_empty()
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }

    /// Same quarters and shock path with a different endogenous block.
    pub(crate) fn with_endog(&self, endog: DMatrix<f64>) -> Result<Self, VarxError> {
        debug_assert_eq!(endog.shape(), self.endog.shape());
        Self::from_parts(
            self.quarters.clone(),
            self.names.clone(),
            self.exog_name.clone(),
            endog,
            self.exog.clone(),
        )
    }

    /// Each endogenous column rescaled to mean 0, sample sd 1. The shock is
    /// left in its own units.
    pub fn standardized(&self) -> Result<Self, VarxError> {
        let mut endog = self.endog.clone();
        for (c, name) in self.names.iter().enumerate() {
            let col: Vec<f64> = self.endog.column(c).iter().copied().collect();
            let z = standardize(&col)
                .map_err(|e| VarxError::InvalidData(format!("cannot standardize {name}: {e}")))?;
            endog.column_mut(c).copy_from_slice(&z);
        }
        self.with_endog(endog)
    }
}

/// Regressor layout: `[1, X_{t−1..t−p}, d_t?, d_{t−1..t−q}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub k: usize,
    pub endogenous_lags: usize,
    pub exogenous_lags: usize,
    pub contemporaneous: bool,
}

impl Layout {
    /// Regressors per equation.
    pub fn regressors(&self) -> usize {
        1 + self.k * self.endogenous_lags + usize::from(self.contemporaneous) + self.exogenous_lags
    }

    /// Leading observations consumed by lags.
    pub fn presample(&self) -> usize {
        self.endogenous_lags.max(self.exogenous_lags)
    }

    /// Row of the endogenous-lag block for variable `var` at lag `lag ≥ 1`.
    pub fn endog_row(&self, lag: usize, var: usize) -> usize {
        1 + (lag - 1) * self.k + var
    }

    /// Row of the shock coefficient at `lag` (0 = contemporaneous).
    pub fn exog_row(&self, lag: usize) -> Option<usize> {
        let base = 1 + self.k * self.endogenous_lags;
        match (lag, self.contemporaneous) {
            (0, true) => Some(base),
            (0, false) => None,
            (l, _) if l <= self.exogenous_lags => {
                Some(base + usize::from(self.contemporaneous) + l - 1)
            }
            _ => None,
        }
    }
}

/// Stacked regression for every usable quarter.
#[derive(Debug, Clone)]
pub struct Design {
    pub layout: Layout,
    /// Quarters of the response rows.
    pub quarters: Vec<Quarter>,
    pub variable_names: Vec<String>,
    pub regressor_names: Vec<String>,
    /// `T_eff × k`.
    pub response: DMatrix<f64>,
    /// `T_eff × m`.
    pub regressors: DMatrix<f64>,
}

impl Design {
    pub fn usable_rows(&self) -> usize {
        self.response.nrows()
    }
}

pub fn build_design(data: &VarxData, spec: &VarxSpec) -> Result<Design, VarxError> {
    let layout = spec.layout(data.k());
    if layout.endogenous_lags < 1 {
        return Err(VarxError::InvalidSpec(
            "endogenous_lags must be at least 1".into(),
        ));
    }
    let m = layout.regressors();
    let start = layout.presample();
    let usable = data.len().saturating_sub(start);
    let required = m + DF_SLACK;
    if usable < required {
        return Err(VarxError::InsufficientObservations {
            usable,
            required,
            regressors: m,
        });
    }

    let k = data.k();
    let mut regressors = DMatrix::zeros(usable, m);
    let mut response = DMatrix::zeros(usable, k);
    for row in 0..usable {
        let t = start + row;
        regressors[(row, 0)] = 1.0;
        for lag in 1..=layout.endogenous_lags {
            for var in 0..k {
                regressors[(row, layout.endog_row(lag, var))] = data.endog[(t - lag, var)];
            }
        }
        for lag in 0..=layout.exogenous_lags {
            if let Some(col) = layout.exog_row(lag) {
                regressors[(row, col)] = data.exog[t - lag];
            }
        }
        for var in 0..k {
            response[(row, var)] = data.endog[(t, var)];
        }
    }

    let mut regressor_names = vec!["const".to_string()];
    for lag in 1..=layout.endogenous_lags {
        regressor_names.extend(data.names.iter().map(|n| format!("{n}.l{lag}")));
    }
    for lag in 0..=layout.exogenous_lags {
        if layout.exog_row(lag).is_some() {
            regressor_names.push(format!("{}.l{lag}", data.exog_name));
        }
    }

    Ok(Design {
        layout,
        quarters: data.quarters[start..].to_vec(),
        variable_names: data.names.clone(),
        regressor_names,
        response,
        regressors,
    })
}

/// Restricts `data` to `[start, end]`. Lags are rebuilt from inside the
/// window, so nothing before `start` leaks into the fit.
pub fn subsample(
    data: &VarxData,
    start: Quarter,
    end: Quarter,
    spec: &VarxSpec,
) -> Result<VarxData, VarxError> {
    if start > end {
        return Err(VarxError::InvertedRange { start, end });
    }
    let lo = data.quarters.iter().position(|&q| q >= start);
    let hi = data.quarters.iter().rposition(|&q| q <= end);
    let (lo, hi) = match (lo, hi) {
        (Some(lo), Some(hi)) if lo <= hi => (lo, hi),
        _ => return Err(VarxError::EmptySubsample { start, end }),
    };
    let restricted = VarxData {
        quarters: data.quarters[lo..=hi].to_vec(),
        names: data.names.clone(),
        exog_name: data.exog_name.clone(),
        endog: data.endog.rows(lo, hi - lo + 1).into_owned(),
        exog: data.exog[lo..=hi].to_vec(),
    };
    build_design(&restricted, spec)?;
    Ok(restricted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(t: usize, k: usize) -> VarxData {
        let quarters = "2000Q1".parse::<Quarter>().unwrap().range(t);
        let names = (0..k).map(|i| format!("x{i}")).collect();
        // Encode (time, variable) in the value so rows can be traced.
        let columns: Vec<Vec<f64>> = (0..k)
            .map(|v| (0..t).map(|s| (s * 10 + v) as f64).collect())
            .collect();
        let exog = (0..t).map(|s| 1000.0 + s as f64).collect();
        VarxData::new(quarters, names, &columns, "shock", exog).unwrap()
    }

    #[test]
    fn usable_rows_drop_the_presample() {
        let spec = VarxSpec::default();
        let d = build_design(&toy(81, 1), &spec).unwrap();
        assert_eq!(d.usable_rows(), 77);
        assert_eq!(d.quarters[0].to_string(), "2001Q1");
        // Hand count on the index list: t = 4..=80.
        let hand: Vec<usize> = (0..81).filter(|t| *t >= 4).collect();
        assert_eq!(hand.len(), d.usable_rows());
    }

    #[test]
    fn regressor_layout() {
        let spec = VarxSpec::default();
        let d = build_design(&toy(40, 2), &spec).unwrap();
        assert_eq!(
            d.regressor_names,
            [
                "const", "x0.l1", "x1.l1", "shock.l0", "shock.l1", "shock.l2", "shock.l3",
                "shock.l4"
            ]
        );
        // First usable t = 4.
        let row: Vec<f64> = d.regressors.row(0).iter().copied().collect();
        assert_eq!(
            row,
            [1.0, 30.0, 31.0, 1004.0, 1003.0, 1002.0, 1001.0, 1000.0]
        );
        assert_eq!(d.response[(0, 1)], 41.0);
    }

    #[test]
    fn no_shock_terms() {
        let spec = VarxSpec {
            exogenous_lags: 0,
            include_contemporaneous_shock: false,
            ..Default::default()
        };
        let d = build_design(&toy(40, 3), &spec).unwrap();
        assert_eq!(d.regressors.ncols(), 1 + 3);
        assert_eq!(d.usable_rows(), 39);
    }

    #[test]
    fn too_few_observations() {
        let spec = VarxSpec::default();
        // m = 7 for k = 1, so T_eff must reach 17.
        assert!(build_design(&toy(21, 1), &spec).is_ok());
        assert!(matches!(
            build_design(&toy(20, 1), &spec),
            Err(VarxError::InsufficientObservations {
                usable: 16,
                required: 17,
                ..
            })
        ));
    }

    #[test]
    fn subsample_rebuilds_lags() {
        let spec = VarxSpec::default();
        let data = toy(81, 1);
        let pre = subsample(
            &data,
            "2000Q1".parse().unwrap(),
            "2007Q4".parse().unwrap(),
            &spec,
        )
        .unwrap();
        let post = subsample(
            &data,
            "2009Q1".parse().unwrap(),
            "2020Q1".parse().unwrap(),
            &spec,
        )
        .unwrap();
        assert_eq!(build_design(&pre, &spec).unwrap().usable_rows(), 32 - 4);
        assert_eq!(build_design(&post, &spec).unwrap().usable_rows(), 45 - 4);
        // The first post-split row only sees lags from 2009 onward.
        let d = build_design(&post, &spec).unwrap();
        assert_eq!(d.regressors[(0, 1)], (36 + 3) as f64 * 10.0);
        assert_eq!(d.regressors[(0, 6)], 1036.0);

        assert!(matches!(
            subsample(
                &data,
                "2010Q1".parse().unwrap(),
                "2009Q1".parse().unwrap(),
                &spec
            ),
            Err(VarxError::InvertedRange { .. })
        ));
        assert!(matches!(
            subsample(
                &data,
                "2030Q1".parse().unwrap(),
                "2031Q1".parse().unwrap(),
                &spec
            ),
            Err(VarxError::EmptySubsample { .. })
        ));
        assert!(matches!(
            subsample(
                &data,
                "2000Q1".parse().unwrap(),
                "2003Q4".parse().unwrap(),
                &spec
            ),
            Err(VarxError::InsufficientObservations { .. })
        ));
    }

    #[test]
    fn subsample_commutes_with_design() {
        let spec = VarxSpec::default();
        let data = toy(60, 2);
        let sub = subsample(
            &data,
            "2003Q2".parse().unwrap(),
            "2011Q3".parse().unwrap(),
            &spec,
        )
        .unwrap();
        let quarters = "2003Q2".parse::<Quarter>().unwrap().range(34);
        let columns: Vec<Vec<f64>> = (0..2)
            .map(|v| (13..47).map(|s| (s * 10 + v) as f64).collect())
            .collect();
        let exog = (13..47).map(|s| 1000.0 + s as f64).collect();
        let pre = VarxData::new(
            quarters,
            vec!["x0".into(), "x1".into()],
            &columns,
            "shock",
            exog,
        )
        .unwrap();
        let a = build_design(&sub, &spec).unwrap();
        let b = build_design(&pre, &spec).unwrap();
        assert_eq!(a.regressors, b.regressors);
        assert_eq!(a.response, b.response);
        assert_eq!(a.quarters, b.quarters);
    }

    #[test]
    fn data_validation() {
        let q = "2000Q1".parse::<Quarter>().unwrap().range(3);
        assert!(VarxData::new(
            q.clone(),
            vec!["a".into()],
            &[vec![1.0, 2.0]],
            "shock",
            vec![0.0; 3]
        )
        .is_err());
        assert!(VarxData::new(
            q.clone(),
            vec!["a".into()],
            &[vec![1.0; 3]],
            "shock",
            vec![0.0; 2]
        )
        .is_err());
        assert!(VarxData::new(
            q,
            vec!["a".into()],
            &[vec![1.0, f64::NAN, 2.0]],
            "shock",
            vec![0.0; 3]
        )
        .is_err());
    }
}
