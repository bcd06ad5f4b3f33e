//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

mod common;

use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use wagegap_cli::demo::DEMO_FIXTURE_SEED;
use wagegap_core::fixtures::realistic_fixture;
use wagegap_core::inequality::{
    decompose, theil_index, theil_index_of, Partition, WageDistribution,
};
use wagegap_core::panel::{
    compute_series, parse_growth_csv, parse_inequality_csv, parse_series_csv, parse_shock_csv,
    parse_wage_csv, GrowthMethod, Quarter, SeriesColumn,
};
use wagegap_core::varx::{
    bootstrap_bands, build_design, estimate, parse_irf_csv, simulate, write_irf_csv, BandMethod,
    ImpulseResponse, VarxCoefficients, VarxData, VarxSpec,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    check(start.elapsed() < limit, || {
        format!("took {:.1?}, limit {limit:?}", start.elapsed())
    })
}

// Extended-precision term-by-term evaluations (40 significant digits).
const ORACLE_TOTAL: f64 = 0.15237968787641534;
const ORACLE_BETWEEN: f64 = 0.08153353372825396;
const ORACLE_LEFT: f64 = 0.13081203594113696;
const ORACLE_RIGHT: f64 = 0.05485525233670123;

fn criterion_1() -> Outcome {
    let dist = WageDistribution::new(vec![1.0, 3.0, 5.0, 7.0, 3.0]).map_err(|e| e.to_string())?;
    let part =
        Partition::from_groups(&[vec![0, 1], vec![2, 3, 4]], 5).map_err(|e| e.to_string())?;
    let d = decompose(&dist, &part).map_err(|e| e.to_string())?;
    check((d.groups[0].weight - 4.0 / 19.0).abs() < 1e-15, || {
        format!("weight {}", d.groups[0].weight)
    })?;
    check((d.groups[1].weight - 15.0 / 19.0).abs() < 1e-15, || {
        format!("weight {}", d.groups[1].weight)
    })?;
    let smoothed = theil_index_of(&[2.0, 2.0, 5.0, 5.0, 5.0]).map_err(|e| e.to_string())?;
    check((d.between - smoothed).abs() < 1e-15, || {
        format!("between {} vs {smoothed}", d.between)
    })?;
    let left = theil_index_of(&[1.0, 3.0]).map_err(|e| e.to_string())?;
    let right = theil_index_of(&[5.0, 7.0, 3.0]).map_err(|e| e.to_string())?;
    let gap = d.total - 4.0 / 19.0 * left - 15.0 / 19.0 * right - d.between;
    check(gap.abs() < 1e-12, || format!("identity gap {gap:e}"))?;
    for (name, got, want) in [
        ("total", d.total, ORACLE_TOTAL),
        ("between", d.between, ORACLE_BETWEEN),
        ("I(1,3)", left, ORACLE_LEFT),
        ("I(5,7,3)", right, ORACLE_RIGHT),
    ] {
        check((got - want).abs() < 1e-12, || {
            format!("{name} {got} vs oracle {want}")
        })?;
    }
    check(
        (d.total - 0.1523797).abs() < 5e-8 && (d.between - 0.0815335).abs() < 5e-8,
        || "rounded targets not met".into(),
    )?;
    Ok(format!(
        "total {:.7}, between {:.7}, identity gap {gap:.1e}",
        d.total, d.between
    ))
}

fn random_case(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<usize>) {
    let n = rng.random_range(2..=50usize);
    let l = rng.random_range(2..=n.min(5));
    let y: Vec<f64> = (0..n)
        .map(|_| rng.random_range(-3.0f64..7.0).exp())
        .collect();
    let mut labels: Vec<usize> = (0..l)
        .chain((l..n).map(|_| rng.random_range(0..l)))
        .collect();
    for i in (1..n).rev() {
        labels.swap(i, rng.random_range(0..=i));
    }
    (y, labels)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1_000);
    let mut worst = [0.0f64; 3];
    let err = |e: wagegap_core::inequality::InequalityError| e.to_string();
    for case in 0..1000 {
        let (y, labels) = random_case(&mut rng);
        let n = y.len();
        let dist = WageDistribution::new(y.clone()).map_err(err)?;
        let d = decompose(&dist, &Partition::new(labels).map_err(err)?).map_err(err)?;
        let rel = if d.total > 0.0 {
            d.residual().abs() / d.total
        } else {
            d.residual().abs()
        };
        check(rel < 1e-10, || {
            format!("case {case}: identity residual {rel:e}")
        })?;
        worst[0] = worst[0].max(rel);

        let i = d.total;
        check((0.0..=(n as f64).ln() + 1e-12).contains(&i), || {
            format!("case {case}: I = {i} outside [0, ln {n}]")
        })?;

        let lambda = [0.5, 3.0, 1000.0][case % 3];
        let scaled = theil_index(&dist.scaled(lambda).map_err(err)?);
        check((scaled - i).abs() < 1e-12, || {
            format!("case {case}: scale by {lambda} moves I by {:e}", scaled - i)
        })?;
        worst[1] = worst[1].max((scaled - i).abs());

        let m = 2 + case % 3;
        let replicated: Vec<f64> = (0..m).flat_map(|_| y.iter().copied()).collect();
        let rep = theil_index_of(&replicated).map_err(err)?;
        check((rep - i).abs() < 1e-12, || {
            format!("case {case}: {m}-fold replication moves I by {:e}", rep - i)
        })?;
        worst[2] = worst[2].max((rep - i).abs());

        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if y[a] != y[b] {
            let (lo, hi) = if y[a] < y[b] { (a, b) } else { (b, a) };
            let delta = rng.random_range(0.01..0.5) * (y[hi] - y[lo]);
            let mut after = y.clone();
            after[lo] += delta;
            after[hi] -= delta;
            let t = theil_index_of(&after).map_err(err)?;
            check(t < i, || {
                format!("case {case}: transfer did not decrease I ({t} ≥ {i})")
            })?;
        }
    }
    within_time(start, Duration::from_secs(5))?;
    Ok(format!(
        "1000 cases; worst identity {:.1e}, scale {:.1e}, replication {:.1e}; {:.2?}",
        worst[0],
        worst[1],
        worst[2],
        start.elapsed()
    ))
}

fn criterion_3() -> Outcome {
    let coefs = VarxCoefficients {
        intercept: DVector::zeros(1),
        endogenous: vec![DMatrix::from_element(1, 1, 0.5)],
        contemporaneous: Some(DVector::from_element(1, 1.0)),
        lagged_exogenous: vec![],
    };
    let psi = coefs.multipliers(10, 1.0);
    let worst = psi
        .iter()
        .enumerate()
        .map(|(h, p)| (p[0] - 0.5f64.powi(h as i32)).abs())
        .fold(0.0, f64::max);
    check(psi.len() == 11 && worst < 1e-12, || {
        format!("max error {worst:e}")
    })?;
    Ok(format!("Ψ_h = 0.5^h for h = 0..10, max error {worst:.1e}"))
}

fn simulate_data(coefs: &VarxCoefficients, t: usize, seed: u64) -> VarxData {
    let k = coefs.k();
    let pre = coefs.layout().presample();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exog: Vec<f64> = (0..t).map(|_| StandardNormal.sample(&mut rng)).collect();
    let innov = DMatrix::from_fn(t - pre, k, |_, _| StandardNormal.sample(&mut rng));
    let x = simulate(coefs, &DMatrix::zeros(pre, k), &exog, &innov).expect("valid simulation");
    let columns: Vec<Vec<f64>> = (0..k)
        .map(|c| x.column(c).iter().copied().collect())
        .collect();
    VarxData::new(
        Quarter::new(1000, 1).expect("quarter").range(t),
        (0..k).map(|i| format!("x{}", i + 1)).collect(),
        &columns,
        "shock",
        exog,
    )
    .expect("valid data")
}

fn flat(c: &VarxCoefficients) -> Vec<f64> {
    let mut v: Vec<f64> = c.intercept.iter().copied().collect();
    for b in &c.endogenous {
        v.extend(b.iter());
    }
    for x in c.contemporaneous.iter().chain(&c.lagged_exogenous) {
        v.extend(x.iter());
    }
    v
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let truth = VarxCoefficients {
        intercept: DVector::zeros(2),
        endogenous: vec![DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.1, 0.6])],
        contemporaneous: Some(DVector::from_vec(vec![1.0, 0.5])),
        lagged_exogenous: vec![
            DVector::from_vec(vec![0.6, -0.3]),
            DVector::from_vec(vec![0.3, 0.4]),
            DVector::from_vec(vec![-0.2, 0.2]),
            DVector::from_vec(vec![0.1, -0.1]),
        ],
    };
    let radius = truth.spectral_radius();
    check((radius - 0.7).abs() < 1e-12, || {
        format!("spectral radius {radius}")
    })?;
    let spec = VarxSpec::default();
    let true_psi = truth.multipliers(spec.horizon, 1.0);
    let peaks: Vec<f64> = (0..2)
        .map(|v| true_psi.iter().map(|p| p[v].abs()).fold(0.0, f64::max))
        .collect();
    let seeds = 20;
    let mut coef_error = 0.0;
    let mut coef_count = 0;
    let mut irf_error = vec![[0.0; 2]; spec.horizon + 1];
    for seed in 0..seeds {
        let data = simulate_data(&truth, 5000, seed);
        let design = build_design(&data, &spec).map_err(|e| e.to_string())?;
        let model = estimate(&design).map_err(|e| e.to_string())?;
        for (a, b) in flat(&model.coefficients).iter().zip(flat(&truth)) {
            coef_error += (a - b).abs();
            coef_count += 1;
        }
        for (h, p) in model
            .coefficients
            .multipliers(spec.horizon, 1.0)
            .iter()
            .enumerate()
        {
            for v in 0..2 {
                irf_error[h][v] += (p[v] - true_psi[h][v]).abs() / seeds as f64;
            }
        }
    }
    let mean_coef = coef_error / coef_count as f64;
    check(mean_coef < 0.05, || {
        format!("mean absolute coefficient error {mean_coef}")
    })?;
    let mut worst_rel: f64 = 0.0;
    for (h, row) in irf_error.iter().enumerate() {
        for v in 0..2 {
            let rel = row[v] / peaks[v];
            worst_rel = worst_rel.max(rel);
            check(rel < 0.02, || {
                format!(
                    "horizon {h} variable {v}: IRF error {:.2}% of peak",
                    100.0 * rel
                )
            })?;
        }
    }
    within_time(start, Duration::from_secs(60))?;
    Ok(format!(
        "mean |coef error| {mean_coef:.4}, worst IRF error {:.2}% of peak; {:.1?}",
        100.0 * worst_rel,
        start.elapsed()
    ))
}

fn components_data(seed: u64) -> Result<VarxData, String> {
    let fx = realistic_fixture(seed).map_err(|e| e.to_string())?;
    let series = compute_series(&fx.panel).map_err(|e| e.to_string())?;
    let names = SeriesColumn::COMPONENTS
        .iter()
        .map(|c| c.name().to_string())
        .collect();
    let columns: Vec<Vec<f64>> = SeriesColumn::COMPONENTS
        .iter()
        .map(|&c| series.column(c))
        .collect();
    VarxData::new(
        series.quarters.clone(),
        names,
        &columns,
        "shock",
        fx.shocks.values().to_vec(),
    )
    .and_then(|d| d.standardized())
    .map_err(|e| e.to_string())
}

fn bands(data: &VarxData, spec: &VarxSpec) -> Result<ImpulseResponse, String> {
    let model = estimate(&build_design(data, spec).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    Ok(bootstrap_bands(&model, data, spec)
        .map_err(|e| e.to_string())?
        .response)
}

fn irf_bytes(irf: &ImpulseResponse) -> Vec<u8> {
    let mut out = Vec::new();
    write_irf_csv(irf, &mut out).expect("in-memory write");
    out
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let data = components_data(DEMO_FIXTURE_SEED)?;
    check(data.len() == 81, || format!("{} quarters", data.len()))?;
    let spec = VarxSpec {
        seed: 17,
        ..Default::default()
    };
    check(spec.bootstrap_reps == 2000, || {
        "default reps changed".into()
    })?;
    let a = bands(&data, &spec)?;
    let timed = start.elapsed();
    let b = bands(&data, &spec)?;
    check(irf_bytes(&a) == irf_bytes(&b) && a == b, || {
        "same seed gave different bands".into()
    })?;
    check(a.is_ordered(), || {
        "std-dev bands do not contain the point".into()
    })?;
    let pct = bands(
        &data,
        &VarxSpec {
            bands: BandMethod::Percentile,
            ..spec.clone()
        },
    )?;
    check(pct.is_ordered(), || {
        "percentile bands do not contain the point".into()
    })?;

    // Noise-free data: every residual is rounding error.
    let exact = VarxCoefficients {
        intercept: DVector::from_element(1, 0.3),
        endogenous: vec![DMatrix::from_element(1, 1, 0.6)],
        contemporaneous: Some(DVector::from_element(1, 0.8)),
        lagged_exogenous: (1..=4)
            .map(|l| DVector::from_element(1, 0.4 / l as f64))
            .collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let exog: Vec<f64> = (0..81).map(|_| StandardNormal.sample(&mut rng)).collect();
    let x = simulate(&exact, &DMatrix::zeros(4, 1), &exog, &DMatrix::zeros(77, 1))
        .map_err(|e| e.to_string())?;
    let quiet = VarxData::new(
        Quarter::new(2000, 1).expect("quarter").range(81),
        vec!["x".into()],
        &[x.column(0).iter().copied().collect()],
        "shock",
        exog,
    )
    .map_err(|e| e.to_string())?;
    let z = bands(&quiet, &spec)?;
    let width = (0..=spec.horizon)
        .map(|h| z.upper[h][0] - z.lower[h][0])
        .fold(0.0, f64::max);
    check(width < 1e-10, || format!("noise-free band width {width:e}"))?;
    check(z.is_ordered(), || {
        "noise-free bands do not contain the point".into()
    })?;
    check(timed < Duration::from_secs(60), || {
        format!("2000 replications took {timed:.1?}")
    })?;
    Ok(format!(
        "byte-identical reruns, noise-free width {width:.1e}, bands ordered; 2000 reps on 81 quarters in {timed:.1?}"
    ))
}

fn criterion_6() -> Outcome {
    let data = components_data(DEMO_FIXTURE_SEED)?;
    let irf = bands(&data, &VarxSpec::default())?;
    let b = irf.variable_index("between").ok_or("no between response")?;
    let h = irf.peak_horizon(b);
    let show = |v: usize| {
        format!(
            "{} {:.3} [{:.3}, {:.3}]",
            irf.variables[v], irf.point[h][v], irf.lower[h][v], irf.upper[h][v]
        )
    };
    let mut problems = Vec::new();
    if irf.band_covers(h, b, 0.0) {
        problems.push(format!("between band covers 0 at its peak: {}", show(b)));
    }
    for v in 0..3 {
        if !irf.band_covers(h, v, 0.0) {
            problems.push(format!("band excludes 0: {}", show(v)));
        }
    }
    let summary = format!(
        "peak h={h}: {}",
        (0..4).map(show).collect::<Vec<_>>().join("; ")
    );
    if problems.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", problems.join("; ")))
    }
}

fn criterion_7() -> Outcome {
    let readme = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md");
    let text = fs::read_to_string(&readme).map_err(|e| format!("README: {e}"))?;
    for needle in ["12%", "88", "94%", "0.5", "0.6"] {
        check(text.contains(needle), || {
            format!("README does not document {needle}")
        })?;
    }
    Ok(
        "real-data reference values documented in README; not testable without licensed inputs"
            .into(),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("demo");
    let o = Command::new(env!("CARGO_BIN_EXE_wagegap"))
        .args(["demo", "--out", out.to_str().ok_or("path")?])
        .output()
        .map_err(|e| e.to_string())?;
    let report = String::from_utf8_lossy(&o.stdout).into_owned();
    check(o.status.success(), || {
        format!("demo exited with {:?}: {report}", o.status.code())
    })?;

    let mut parsed = 0;
    for sub in ["fixtures", "results"] {
        for entry in fs::read_dir(out.join(sub)).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or_default()
                .to_string();
            if !name.ends_with(".csv") {
                continue;
            }
            let bytes = fs::read(&path).map_err(|e| e.to_string())?;
            let r = bytes.as_slice();
            let ok = match name.as_str() {
                "wages.csv" | "growth_wages.csv" => {
                    parse_wage_csv(r).map(|_| ()).map_err(|e| e.to_string())
                }
                "shocks.csv" => parse_shock_csv(r).map(|_| ()).map_err(|e| e.to_string()),
                "industrial_production.csv" => {
                    parse_series_csv(r).map(|_| ()).map_err(|e| e.to_string())
                }
                "series.csv" => parse_inequality_csv(r)
                    .map(|_| ())
                    .map_err(|e| e.to_string()),
                "growth.csv" => parse_growth_csv(r, GrowthMethod::YearOverYear)
                    .map(|_| ())
                    .map_err(|e| e.to_string()),
                n if n.starts_with("irf_") => {
                    parse_irf_csv(r).map(|_| ()).map_err(|e| e.to_string())
                }
                n => Err(format!("unexpected output {n}")),
            };
            ok.map_err(|e| format!("{name}: {e}"))?;
            parsed += 1;
        }
    }
    check(parsed >= 11, || format!("only {parsed} CSV files found"))?;
    within_time(start, Duration::from_secs(120))?;
    Ok(format!(
        "demo exit 0, {parsed} CSV files parse; {:.1?}",
        start.elapsed()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "1 decomposition identity on the five-wage example",
            criterion_1,
        ),
        ("2 inequality property suite", criterion_2),
        ("3 closed-form multipliers", criterion_3),
        ("4 estimation recovery", criterion_4),
        ("5 bootstrap determinism and sanity", criterion_5),
        ("6 planted between effect, null within effects", criterion_6),
        ("7 real-data reference values", criterion_7),
        ("8 end-to-end demo", criterion_8),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
