//! Recursive residual bootstrap for impulse-response bands.
//!
//! Each replication resamples residual rows i.i.d. with replacement, rebuilds
//! `X` forward from the observed initial lags along the observed shock path,
//! re-estimates, and recomputes the multipliers. Replication `r` draws from
//! ChaCha stream `r` under the run seed, so the result does not depend on
//! thread count or scheduling.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::design::{build_design, VarxData};
use super::irf::ImpulseResponse;
use super::model::{estimate, simulate, VarxModel};
use super::{VarxError, VarxSpec};

/// Replications allowed to fail before the run aborts.
pub const MAX_FAILED_FRACTION: f64 = 0.05;

const PERCENTILE_LOW: f64 = 0.1587;
const PERCENTILE_HIGH: f64 = 0.8413;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandMethod {
    /// Point estimate ± one bootstrap standard deviation.
    #[default]
    StdDev,
    /// 15.87th / 84.13th bootstrap percentiles, widened to contain the point.
    Percentile,
}

#[derive(Debug, Clone)]
pub struct BootstrapOutcome {
    pub response: ImpulseResponse,
    /// Replications that produced multipliers.
    pub succeeded: usize,
    pub failed: usize,
}

fn replicate(
    model: &VarxModel,
    data: &VarxData,
    spec: &VarxSpec,
    rep: u64,
) -> Result<Vec<DVector<f64>>, VarxError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(rep);
    let residuals = &model.residuals;
    let (n, k) = residuals.shape();
    let draws: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let innovations = DMatrix::from_fn(n, k, |r, c| residuals[(draws[r], c)]);
    let start = data.len() - n;
    let initial = data.endog().rows(0, start).into_owned();
    let endog = simulate(&model.coefficients, &initial, data.exog(), &innovations)?;
    let refit = estimate(&build_design(&data.with_endog(endog)?, spec)?)?;
    Ok(refit
        .coefficients
        .multipliers(spec.horizon, spec.shock_size))
}

/// Bands around the point multipliers of `model`, which must have been
/// estimated on `data` under `spec`.
pub fn bootstrap_bands(
    model: &VarxModel,
    data: &VarxData,
    spec: &VarxSpec,
) -> Result<BootstrapOutcome, VarxError> {
    spec.validate()?;
    if spec.layout(data.k()) != model.layout || data.len() < model.usable_rows() {
        return Err(VarxError::InvalidData(
            "model was not estimated on this data and specification".into(),
        ));
    }
    let point = model
        .coefficients
        .multipliers(spec.horizon, spec.shock_size);
    let reps = spec.bootstrap_reps;

    let results: Vec<Result<Vec<DVector<f64>>, VarxError>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| replicate(model, data, spec, r))
        .collect();

    let mut draws = Vec::with_capacity(reps);
    let mut first_error = None;
    for result in results {
        match result {
            Ok(psi) => draws.push(psi),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let failed = reps - draws.len();
    let limit = (MAX_FAILED_FRACTION * reps as f64).floor() as usize;
    if failed > limit || draws.len() < 2 {
        return Err(VarxError::BootstrapFailures {
            failed,
            reps,
            limit,
            first_error: first_error.map_or_else(|| "none".into(), |e| e.to_string()),
        });
    }

    let mut response = ImpulseResponse::from_points(model.variable_names.clone(), &point);
    let k = model.k();
    let mut sample = vec![0.0; draws.len()];
    for h in 0..=spec.horizon {
        for v in 0..k {
            for (slot, psi) in sample.iter_mut().zip(&draws) {
                *slot = psi[h][v];
            }
            let p = point[h][v];
            let (lo, hi) = match spec.bands {
                BandMethod::StdDev => {
                    let sd = std_dev(&sample);
                    (p - sd, p + sd)
                }
                BandMethod::Percentile => {
                    sample.sort_by(f64::total_cmp);
                    (
                        quantile_sorted(&sample, PERCENTILE_LOW).min(p),
                        quantile_sorted(&sample, PERCENTILE_HIGH).max(p),
                    )
                }
            };
            response.lower[h][v] = lo;
            response.upper[h][v] = hi;
        }
    }
    Ok(BootstrapOutcome {
        response,
        succeeded: draws.len(),
        failed,
    })
}

fn std_dev(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    let pos = prob * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
