//! VARX estimation and impulse responses to an exogenous shock.
//!
//! The model for a `k`-vector of endogenous series `X_t` and a scalar
//! exogenous series `d_t` is
//!
//! ```text
//! X_t = A0 + Σ_{j=1..p} B_j X_{t−j} + C_0 d_t + Σ_{i=1..q} C_i d_{t−i} + e_t
//! ```
//!
//! with `C_0` optional. The shock is assumed not to respond to `X` within the
//! quarter, which is what licenses the contemporaneous term. Every equation
//! shares the same regressors, so equation-by-equation least squares is the
//! multivariate least-squares estimator.

mod bootstrap;
mod design;
mod irf;
mod model;
pub mod ols;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::panel::{PanelError, Quarter};

pub use bootstrap::{bootstrap_bands, BandMethod, BootstrapOutcome, MAX_FAILED_FRACTION};
pub use design::{build_design, subsample, Design, Layout, VarxData, DF_SLACK};
pub use irf::{parse_irf_csv, write_irf_csv, ImpulseResponse};
pub use model::{dynamic_multipliers, estimate, simulate, VarxCoefficients, VarxModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VarxError {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error(
        "{usable} usable observations, at least {required} required for {regressors} regressors"
    )]
    InsufficientObservations {
        usable: usize,
        required: usize,
        regressors: usize,
    },
    #[error(
        "design is rank deficient: column {column} ({name}) is collinear with earlier regressors"
    )]
    RankDeficient { column: usize, name: String },
    #[error("linear solve failed: {0}")]
    NumericalFailure(String),
    #[error("subsample start {start} is after end {end}")]
    InvertedRange { start: Quarter, end: Quarter },
    #[error("subsample {start}..{end} does not intersect the data")]
    EmptySubsample { start: Quarter, end: Quarter },
    #[error("{failed} of {reps} bootstrap replications failed (limit {limit}); first failure: {first_error}")]
    BootstrapFailures {
        failed: usize,
        reps: usize,
        limit: usize,
        first_error: String,
    },
    #[error("row {row}: {reason}")]
    Format { row: u64, reason: String },
    #[error(transparent)]
    Panel(#[from] PanelError),
}

/// Lag structure, horizon, shock scaling and bootstrap settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarxSpec {
    /// Lags of the endogenous block.
    pub endogenous_lags: usize,
    /// Lags of the shock, excluding the contemporaneous term.
    pub exogenous_lags: usize,
    pub include_contemporaneous_shock: bool,
    /// Responses are computed for horizons `0..=horizon` quarters.
    pub horizon: usize,
    /// Size of the one-time shock; −0.25 is a 25 basis point cut.
    pub shock_size: f64,
    pub bootstrap_reps: usize,
    pub seed: u64,
    pub bands: BandMethod,
}

impl Default for VarxSpec {
    fn default() -> Self {
        Self {
            endogenous_lags: 1,
            exogenous_lags: 4,
            include_contemporaneous_shock: true,
            horizon: 10,
            shock_size: -0.25,
            bootstrap_reps: 2000,
            seed: 0,
            bands: BandMethod::StdDev,
        }
    }
}

/// Smallest accepted `bootstrap_reps`.
pub const MIN_BOOTSTRAP_REPS: usize = 100;

impl VarxSpec {
    pub fn validate(&self) -> Result<(), VarxError> {
        if self.endogenous_lags < 1 {
            return Err(VarxError::InvalidSpec(
                "endogenous_lags must be at least 1".into(),
            ));
        }
        if self.horizon < 1 {
            return Err(VarxError::InvalidSpec("horizon must be at least 1".into()));
        }
        if self.bootstrap_reps < MIN_BOOTSTRAP_REPS {
            return Err(VarxError::InvalidSpec(format!(
                "bootstrap_reps must be at least {MIN_BOOTSTRAP_REPS}, got {}",
                self.bootstrap_reps
            )));
        }
        if !self.shock_size.is_finite() {
            return Err(VarxError::InvalidSpec("shock_size must be finite".into()));
        }
        Ok(())
    }

    pub fn layout(&self, k: usize) -> Layout {
        Layout {
            k,
            endogenous_lags: self.endogenous_lags,
            exogenous_lags: self.exogenous_lags,
            contemporaneous: self.include_contemporaneous_shock,
        }
    }
}
