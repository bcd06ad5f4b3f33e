//! Synthetic wage panels with known structure.
//!
//! [`realistic_fixture`] builds a panel whose decomposition is planted: the
//! three within-group contributions and the between term are first simulated
//! as a VARX driven by a synthetic shock series, then each quarter's 3×3 grid
//! of wages is solved for so that decomposing it returns exactly those
//! components. The shock moves only the between term.
//!
//! Calibration of the realistic fixture: racial (within) inequality is about
//! 11.5% of the total on average, with the between term carrying the rest;
//! every quarter's within share stays inside [`REALISTIC_WITHIN_SHARE_BAND`].

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use thiserror::Error;

use crate::inequality::theil_index_of;
use crate::panel::{
    PanelError, QuantilePoint, Quarter, QuarterlyPanel, Race, ShockSeries, WageGrid,
};
use crate::varx::{simulate, VarxCoefficients, VarxError};

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot reach {what} = {target}")]
    Unattainable { what: &'static str, target: f64 },
    #[error("generated grid violates wage ordering at {quarter}")]
    Ordering { quarter: Quarter },
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error(transparent)]
    Varx(#[from] VarxError),
}

/// Decomposition targets for one quarter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentTargets {
    /// Within contributions of D1, Q3, D9.
    pub within: [f64; 3],
    pub between: f64,
}

impl ComponentTargets {
    pub fn total(&self) -> f64 {
        self.within.iter().sum::<f64>() + self.between
    }
}

/// Log spacing of the three group means around the Q3 mean; scaled by a
/// dispersion parameter solved per quarter.
const GROUP_LOG_SHAPE: [f64; 3] = [-1.5, 0.0, 1.0];

/// Relative race wages inside each quantile group, `[quantile][race]`
/// (Asian, Black, White). Only the pattern matters; its amplitude is solved.
const RACE_SHAPE: [[f64; 3]; 3] = [[1.6, 1.0, 1.4], [1.55, 1.0, 1.3], [1.6, 1.0, 1.35]];

/// Smallest increasing-function root on `[lo, hi]` by bisection.
fn bisect(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    if !(f(lo) <= target && target <= f(hi)) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn theil(values: &[f64]) -> f64 {
    theil_index_of(values).expect("positive by construction")
}

/// Solves for a wage grid whose Q3 group mean is `level` and whose
/// decomposition matches `targets`.
pub fn synthesize_grid(level: f64, targets: &ComponentTargets) -> Result<WageGrid, FixtureError> {
    let means_for = |sigma: f64| GROUP_LOG_SHAPE.map(|s| level * (s * sigma).exp());
    let sigma = bisect(|s| theil(&means_for(s)), targets.between, 0.0, 5.0).ok_or(
        FixtureError::Unattainable {
            what: "between",
            target: targets.between,
        },
    )?;
    let means = means_for(sigma);
    let total: f64 = means.iter().sum();

    let mut grid = [[0.0; 3]; 3];
    for k in 0..3 {
        let weight = means[k] / total;
        let target = targets.within[k] / weight;
        let shape = RACE_SHAPE[k];
        let avg = shape.iter().sum::<f64>() / 3.0;
        let min = shape.iter().cloned().fold(f64::INFINITY, f64::min);
        let alpha_max = 0.999 / (1.0 - min / avg);
        let ratios = |a: f64| shape.map(|u| 1.0 + a * (u / avg - 1.0));
        let alpha = bisect(|a| theil(&ratios(a)), target, 0.0, alpha_max).ok_or(
            FixtureError::Unattainable {
                what: "within",
                target: targets.within[k],
            },
        )?;
        grid[k] = ratios(alpha).map(|r| means[k] * r);
    }
    Ok(grid)
}

/// Builds a panel from per-quarter levels and targets.
pub fn synthesize_panel(
    start: Quarter,
    levels: &[f64],
    targets: &[ComponentTargets],
) -> Result<QuarterlyPanel, FixtureError> {
    let quarters = start.range(levels.len());
    let mut grids = Vec::with_capacity(levels.len());
    for ((&q, &level), t) in quarters.iter().zip(levels).zip(targets) {
        let grid = synthesize_grid(level, t)?;
        let ordered = (0..3).all(|r| grid[0][r] <= grid[1][r] && grid[1][r] <= grid[2][r]);
        if !ordered {
            return Err(FixtureError::Ordering { quarter: q });
        }
        grids.push(grid);
    }
    Ok(QuarterlyPanel::new(quarters, grids)?)
}

/// Quarters covered by the realistic fixture: 2000Q1..=2020Q1.
pub const REALISTIC_QUARTERS: usize = 81;
/// Every quarter's within share of the realistic fixture lies in this band.
pub const REALISTIC_WITHIN_SHARE_BAND: (f64, f64) = (0.08, 0.15);
/// Band for the sample mean of the within share.
pub const REALISTIC_MEAN_WITHIN_SHARE_BAND: (f64, f64) = (0.10, 0.13);

/// Mean levels of the planted components.
pub const MEAN_WITHIN: [f64; 3] = [0.0010, 0.0055, 0.0110];
pub const MEAN_BETWEEN: f64 = 0.135;
/// Relative movement of each component per unit of its latent state.
const WITHIN_SCALE: f64 = 0.06;
const BETWEEN_SCALE: f64 = 0.02;
/// Standard deviation of the synthetic policy shock.
pub const SHOCK_SD: f64 = 0.1;
/// Latent response of the between term to a unit shock at lags 0..=4; the
/// within terms do not respond.
pub const BETWEEN_SHOCK_COEFFICIENTS: [f64; 5] = [-4.0, -8.0, -10.0, -6.0, -3.0];
const LATENT_PERSISTENCE: [f64; 4] = [0.6, 0.6, 0.6, 0.7];
const IP_PERSISTENCE: f64 = 0.8;
const IP_SHOCK_COEFFICIENTS: [f64; 2] = [-3.0, -2.0];
/// Nominal wage growth of the Q3 group mean, per year.
const LEVEL_GROWTH: f64 = 0.025;
const BURN_IN: usize = 40;

#[derive(Debug, Clone)]
pub struct RealisticFixture {
    pub panel: QuarterlyPanel,
    pub shocks: ShockSeries,
    pub industrial_production: ShockSeries,
    /// Planted decomposition, one entry per quarter.
    pub targets: Vec<ComponentTargets>,
    /// Latent coefficients for (within D1, Q3, D9, between).
    pub latent: VarxCoefficients,
}

impl RealisticFixture {
    /// Responses of (within D1, Q3, D9, between), in index units, implied by
    /// the latent coefficients.
    pub fn planted_multipliers(&self, horizon: usize, shock_size: f64) -> Vec<[f64; 4]> {
        self.latent
            .multipliers(horizon, shock_size)
            .iter()
            .map(|psi| {
                let mut out = [0.0; 4];
                for g in 0..3 {
                    out[g] = MEAN_WITHIN[g] * WITHIN_SCALE * psi[g];
                }
                out[3] = MEAN_BETWEEN * BETWEEN_SCALE * psi[3];
                out
            })
            .collect()
    }
}

/// Latent VARX(1) for the four components with the shock acting on the
/// between term only.
pub fn planted_latent_model() -> VarxCoefficients {
    let k = 4;
    let exog = |lag: usize| {
        let mut c = DVector::zeros(k);
        c[3] = BETWEEN_SHOCK_COEFFICIENTS[lag];
        c
    };
    VarxCoefficients {
        intercept: DVector::zeros(k),
        endogenous: vec![DMatrix::from_diagonal(&DVector::from_row_slice(
            &LATENT_PERSISTENCE,
        ))],
        contemporaneous: Some(exog(0)),
        lagged_exogenous: (1..=4).map(exog).collect(),
    }
}

/// [`planted_latent_model`] with every shock coefficient set to zero.
pub fn null_latent_model() -> VarxCoefficients {
    let mut latent = planted_latent_model();
    for c in latent
        .contemporaneous
        .iter_mut()
        .chain(&mut latent.lagged_exogenous)
    {
        c.fill(0.0);
    }
    latent
}

/// 2000Q1–2020Q1 panel, shock series and an industrial-production control.
pub fn realistic_fixture(seed: u64) -> Result<RealisticFixture, FixtureError> {
    fixture_from_latent(seed, planted_latent_model())
}

/// As [`realistic_fixture`], with the four components driven by `latent`
/// (four variables, at most four presample quarters).
pub fn fixture_from_latent(
    seed: u64,
    latent: VarxCoefficients,
) -> Result<RealisticFixture, FixtureError> {
    if latent.k() != 4 || latent.layout().presample() > 4 {
        return Err(FixtureError::Varx(VarxError::InvalidSpec(
            "latent model must have 4 variables and at most 4 presample quarters".into(),
        )));
    }
    let t = REALISTIC_QUARTERS;
    let n = t + BURN_IN;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shock_dist = Normal::new(0.0, SHOCK_SD).expect("valid sd");
    let shocks: Vec<f64> = (0..n).map(|_| shock_dist.sample(&mut rng)).collect();
    let mut normal = |rows: usize, cols: usize| {
        DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
    };

    let x = simulate(&latent, &DMatrix::zeros(4, 4), &shocks, &normal(n - 4, 4))?;

    let ip_coefs = VarxCoefficients {
        intercept: DVector::zeros(1),
        endogenous: vec![DMatrix::from_element(1, 1, IP_PERSISTENCE)],
        contemporaneous: Some(DVector::from_element(1, IP_SHOCK_COEFFICIENTS[0])),
        lagged_exogenous: vec![DVector::from_element(1, IP_SHOCK_COEFFICIENTS[1])],
    };
    let ip = simulate(&ip_coefs, &DMatrix::zeros(1, 1), &shocks, &normal(n - 1, 1))?;

    let start = "2000Q1".parse::<Quarter>().expect("literal quarter");
    let quarters = start.range(t);
    let targets: Vec<ComponentTargets> = (BURN_IN..n)
        .map(|s| ComponentTargets {
            within: [0, 1, 2].map(|g| MEAN_WITHIN[g] * (1.0 + WITHIN_SCALE * x[(s, g)])),
            between: MEAN_BETWEEN * (1.0 + BETWEEN_SCALE * x[(s, 3)]),
        })
        .collect();
    let levels: Vec<f64> = (0..t)
        .map(|s| 800.0 * (1.0 + LEVEL_GROWTH).powf(s as f64 / 4.0))
        .collect();
    let panel = synthesize_panel(start, &levels, &targets)?;
    let shocks = ShockSeries::new("shock", quarters.clone(), shocks[BURN_IN..].to_vec())?;
    let industrial_production = ShockSeries::new(
        "industrial_production",
        quarters,
        (BURN_IN..n).map(|s| 100.0 + ip[(s, 0)]).collect(),
    )?;
    Ok(RealisticFixture {
        panel,
        shocks,
        industrial_production,
        targets,
        latent,
    })
}

/// Wages at `base[quantile][race]` growing at `annual_rates[quantile]` per
/// year, compounded quarterly as `(1 + g)^(t/4)`.
pub fn graded_growth_panel(
    start: Quarter,
    len: usize,
    base: WageGrid,
    annual_rates: [f64; 3],
) -> Result<QuarterlyPanel, PanelError> {
    let grids = (0..len)
        .map(|t| {
            let mut g = base;
            for k in QuantilePoint::ALL {
                let f = (1.0 + annual_rates[k.index()]).powf(t as f64 / 4.0);
                for r in Race::ALL {
                    g[k.index()][r.index()] *= f;
                }
            }
            g
        })
        .collect();
    QuarterlyPanel::new(start.range(len), grids)
}

/// Representative 2000-era weekly wages, `[quantile][race]`.
pub const BASE_WAGES: WageGrid = [
    [330.0, 240.0, 300.0],
    [1000.0, 650.0, 820.0],
    [1600.0, 1080.0, 1300.0],
];
