use nalgebra::{DMatrix, DVector};

use super::design::{Design, Layout};
use super::irf::ImpulseResponse;
use super::ols::{least_squares, LeastSquaresError};
use super::{VarxError, VarxSpec};

/// Structural coefficients of a VARX.
#[derive(Debug, Clone, PartialEq)]
pub struct VarxCoefficients {
    pub intercept: DVector<f64>,
    /// `B_1..B_p`; entry `(i, l)` is the effect of variable `l` on equation `i`.
    pub endogenous: Vec<DMatrix<f64>>,
    /// `C_0`, present iff the shock enters contemporaneously.
    pub contemporaneous: Option<DVector<f64>>,
    /// `C_1..C_q`.
    pub lagged_exogenous: Vec<DVector<f64>>,
}

impl VarxCoefficients {
    pub fn k(&self) -> usize {
        self.intercept.len()
    }

    pub fn layout(&self) -> Layout {
        Layout {
            k: self.k(),
            endogenous_lags: self.endogenous.len(),
            exogenous_lags: self.lagged_exogenous.len(),
            contemporaneous: self.contemporaneous.is_some(),
        }
    }

    /// `C_lag`, if that term is in the model.
    pub fn exogenous(&self, lag: usize) -> Option<&DVector<f64>> {
        match lag {
            0 => self.contemporaneous.as_ref(),
            l => self.lagged_exogenous.get(l - 1),
        }
    }

    fn from_stacked(beta: &DMatrix<f64>, layout: Layout) -> Self {
        let k = layout.k;
        let intercept = DVector::from_fn(k, |i, _| beta[(0, i)]);
        let endogenous = (1..=layout.endogenous_lags)
            .map(|lag| DMatrix::from_fn(k, k, |i, l| beta[(layout.endog_row(lag, l), i)]))
            .collect();
        let exog = |lag: usize| {
            layout
                .exog_row(lag)
                .map(|row| DVector::from_fn(k, |i, _| beta[(row, i)]))
        };
        Self {
            intercept,
            endogenous,
            contemporaneous: exog(0),
            lagged_exogenous: (1..=layout.exogenous_lags)
                .map(|l| exog(l).expect("lag in range"))
                .collect(),
        }
    }

    /// Responses `Ψ_0..Ψ_horizon` of `X` to a one-time shock of `shock_size`
    /// with all later shocks held at zero:
    /// `Ψ_h = Σ_{j=1..min(h,p)} B_j Ψ_{h−j} + C_h · shock_size`.
    pub fn multipliers(&self, horizon: usize, shock_size: f64) -> Vec<DVector<f64>> {
        let k = self.k();
        let mut psi: Vec<DVector<f64>> = Vec::with_capacity(horizon + 1);
        for h in 0..=horizon {
            let mut next = match self.exogenous(h) {
                Some(c) => c * shock_size,
                None => DVector::zeros(k),
            };
            for (j, b) in self.endogenous.iter().enumerate().take(h) {
                next += b * &psi[h - j - 1];
            }
            psi.push(next);
        }
        psi
    }

    /// `kp × kp` companion matrix of the endogenous block.
    pub fn companion(&self) -> DMatrix<f64> {
        let k = self.k();
        let p = self.endogenous.len();
        let mut f = DMatrix::zeros(k * p, k * p);
        for (j, b) in self.endogenous.iter().enumerate() {
            f.view_mut((0, j * k), (k, k)).copy_from(b);
        }
        for i in k..k * p {
            f[(i, i - k)] = 1.0;
        }
        f
    }

    /// Largest eigenvalue modulus of the companion matrix.
    pub fn spectral_radius(&self) -> f64 {
        self.companion()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Generates `X` forward from `initial` (the first `presample` rows) along
/// `exog`, adding row `t − presample` of `innovations` at time `t`.
pub fn simulate(
    coefs: &VarxCoefficients,
    initial: &DMatrix<f64>,
    exog: &[f64],
    innovations: &DMatrix<f64>,
) -> Result<DMatrix<f64>, VarxError> {
    let k = coefs.k();
    let start = initial.nrows();
    let t_total = exog.len();
    let layout = coefs.layout();
    if start < layout.presample() || initial.ncols() != k {
        return Err(VarxError::InvalidData(format!(
            "need an initial block of at least {} × {k}",
            layout.presample()
        )));
    }
    if innovations.nrows() != t_total.saturating_sub(start) || innovations.ncols() != k {
        return Err(VarxError::InvalidData(format!(
            "innovations must be {} × {k}",
            t_total.saturating_sub(start)
        )));
    }
    let mut x = DMatrix::zeros(t_total, k);
    x.rows_mut(0, start).copy_from(initial);
    for t in start..t_total {
        let mut row = coefs.intercept.clone();
        for (j, b) in coefs.endogenous.iter().enumerate() {
            row += b * x.row(t - j - 1).transpose();
        }
        for lag in 0..=layout.exogenous_lags {
            if let Some(c) = coefs.exogenous(lag) {
                row += c * exog[t - lag];
            }
        }
        row += innovations.row(t - start).transpose();
        x.row_mut(t).copy_from(&row.transpose());
    }
    Ok(x)
}

/// Least-squares fit of a VARX.
#[derive(Debug, Clone)]
pub struct VarxModel {
    pub variable_names: Vec<String>,
    pub regressor_names: Vec<String>,
    pub layout: Layout,
    pub coefficients: VarxCoefficients,
    /// `T_eff × k`.
    pub fitted: DMatrix<f64>,
    /// `T_eff × k`.
    pub residuals: DMatrix<f64>,
    /// `EᵀE / (T_eff − m)`.
    pub residual_covariance: DMatrix<f64>,
    /// `m × k`, aligned with the stacked coefficients.
    pub std_errors: DMatrix<f64>,
}

impl VarxModel {
    pub fn k(&self) -> usize {
        self.layout.k
    }

    pub fn usable_rows(&self) -> usize {
        self.residuals.nrows()
    }
}

/// Equation-by-equation least squares on a design.
pub fn estimate(design: &Design) -> Result<VarxModel, VarxError> {
    let fit = least_squares(&design.regressors, &design.response).map_err(|e| match e {
        LeastSquaresError::RankDeficient { column } => VarxError::RankDeficient {
            column,
            name: design.regressor_names[column].clone(),
        },
        other => VarxError::NumericalFailure(other.to_string()),
    })?;
    let (t_eff, m) = design.regressors.shape();
    let k = design.layout.k;
    let dof = (t_eff - m) as f64;
    let mut cov = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = fit.residuals.column(i).dot(&fit.residuals.column(j)) / dof;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let std_errors = DMatrix::from_fn(m, k, |r, i| {
        (cov[(i, i)] * fit.inverse_gram_diagonal[r]).sqrt()
    });
    Ok(VarxModel {
        variable_names: design.variable_names.clone(),
        regressor_names: design.regressor_names.clone(),
        layout: design.layout,
        coefficients: VarxCoefficients::from_stacked(&fit.coefficients, design.layout),
        fitted: fit.fitted,
        residuals: fit.residuals,
        residual_covariance: cov,
        std_errors,
    })
}

/// Point responses for `spec.horizon` and `spec.shock_size`; bands equal
/// the point estimate.
pub fn dynamic_multipliers(model: &VarxModel, spec: &VarxSpec) -> ImpulseResponse {
    let psi = model
        .coefficients
        .multipliers(spec.horizon, spec.shock_size);
    ImpulseResponse::from_points(model.variable_names.clone(), &psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::Quarter;
    use crate::varx::{build_design, VarxData};

    fn univariate(b: f64, c: &[f64], contemporaneous: bool) -> VarxCoefficients {
        let dv = |x: f64| DVector::from_element(1, x);
        let (c0, rest) = if contemporaneous {
            (Some(dv(c[0])), &c[1..])
        } else {
            (None, c)
        };
        VarxCoefficients {
            intercept: dv(0.0),
            endogenous: vec![DMatrix::from_element(1, 1, b)],
            contemporaneous: c0,
            lagged_exogenous: rest.iter().map(|&x| dv(x)).collect(),
        }
    }

    #[test]
    fn geometric_response() {
        let coefs = univariate(0.5, &[1.0], true);
        let psi = coefs.multipliers(10, 1.0);
        for (h, p) in psi.iter().enumerate() {
            assert!((p[0] - 0.5f64.powi(h as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_coefficients_give_zero_response() {
        let coefs = univariate(0.0, &[0.0, 0.0, 0.0], true);
        assert!(coefs.multipliers(10, -0.25).iter().all(|p| p[0] == 0.0));
    }

    #[test]
    fn responses_scale_with_shock_size() {
        let coefs = univariate(0.8, &[0.3, -1.2, 0.4, 0.9], false);
        let unit = coefs.multipliers(10, 1.0);
        let cut = coefs.multipliers(10, -0.25);
        assert_eq!(unit[0][0], 0.0);
        for (u, c) in unit.iter().zip(&cut) {
            assert!((c[0] + 0.25 * u[0]).abs() <= 1e-15 * u[0].abs().max(1.0));
        }
    }

    #[test]
    fn lagged_only_recursion() {
        // Hand-rolled: Ψ0 = 0, Ψ1 = c1, Ψ2 = b c1 + c2, Ψ3 = b Ψ2, ...
        let coefs = univariate(0.5, &[2.0, -1.0], false);
        let psi: Vec<f64> = coefs.multipliers(4, 1.0).iter().map(|p| p[0]).collect();
        assert_eq!(psi, [0.0, 2.0, 0.0, 0.0, 0.0]);
        let coefs = univariate(0.5, &[2.0, 1.0], false);
        let psi: Vec<f64> = coefs.multipliers(3, 1.0).iter().map(|p| p[0]).collect();
        assert_eq!(psi, [0.0, 2.0, 2.0, 1.0]);
    }

    #[test]
    fn companion_radius() {
        let coefs = VarxCoefficients {
            intercept: DVector::zeros(2),
            endogenous: vec![DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.0, 0.7])],
            contemporaneous: None,
            lagged_exogenous: vec![],
        };
        assert!((coefs.spectral_radius() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn noise_free_recovery() {
        let coefs = VarxCoefficients {
            intercept: DVector::from_vec(vec![0.2, -0.1]),
            endogenous: vec![DMatrix::from_row_slice(2, 2, &[0.5, 0.1, -0.2, 0.6])],
            contemporaneous: Some(DVector::from_vec(vec![1.0, -0.5])),
            lagged_exogenous: (1..=4)
                .map(|l| DVector::from_vec(vec![0.3 / l as f64, 0.2 * l as f64]))
                .collect(),
        };
        let t = 120;
        let exog: Vec<f64> = (0..t).map(|s| ((s * 37 % 17) as f64 - 8.0) / 8.0).collect();
        let initial = DMatrix::from_row_slice(4, 2, &[0.1, 0.2, -0.3, 0.0, 0.5, 0.1, 0.0, -0.2]);
        let x = simulate(&coefs, &initial, &exog, &DMatrix::zeros(t - 4, 2)).unwrap();
        let columns: Vec<Vec<f64>> = (0..2)
            .map(|c| x.column(c).iter().copied().collect())
            .collect();
        let data = VarxData::new(
            "1990Q1".parse::<Quarter>().unwrap().range(t),
            vec!["a".into(), "b".into()],
            &columns,
            "shock",
            exog,
        )
        .unwrap();
        let design = build_design(&data, &VarxSpec::default()).unwrap();
        let model = estimate(&design).unwrap();
        let got = &model.coefficients;
        assert!((&got.intercept - &coefs.intercept).amax() < 1e-8);
        assert!((&got.endogenous[0] - &coefs.endogenous[0]).amax() < 1e-8);
        assert!(
            (got.contemporaneous.as_ref().unwrap() - coefs.contemporaneous.as_ref().unwrap())
                .amax()
                < 1e-8
        );
        for (a, b) in got.lagged_exogenous.iter().zip(&coefs.lagged_exogenous) {
            assert!((a - b).amax() < 1e-8);
        }
        // Fitted + residual reproduces the response.
        let recon = &model.fitted + &model.residuals;
        assert!((recon - &design.response).amax() < 1e-10);
        let cov = &model.residual_covariance;
        assert!((cov - cov.transpose()).amax() == 0.0);
        assert!(cov.diagonal().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn collinear_regressor_is_named() {
        // x_t = d_{t+1}, so x.l1 duplicates shock.l0.
        let t = 60;
        let d: Vec<f64> = (0..t + 1).map(|s| ((s * 13 % 7) as f64).sin()).collect();
        let x: Vec<f64> = (0..t).map(|s| d[s + 1]).collect();
        let data = VarxData::new(
            "2000Q1".parse::<Quarter>().unwrap().range(t),
            vec!["x".into()],
            &[x],
            "shock",
            d[..t].to_vec(),
        )
        .unwrap();
        let err = estimate(&build_design(&data, &VarxSpec::default()).unwrap()).unwrap_err();
        assert_eq!(
            err,
            VarxError::RankDeficient {
                column: 2,
                name: "shock.l0".into()
            }
        );
    }
}
