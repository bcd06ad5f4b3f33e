//! End-to-end self check on generated fixtures.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use wagegap_core::fixtures::{
    graded_growth_panel, realistic_fixture, RealisticFixture, BASE_WAGES,
    REALISTIC_WITHIN_SHARE_BAND,
};
use wagegap_core::panel::{
    parse_growth_csv, parse_inequality_csv, parse_series_csv, parse_shock_csv, parse_wage_csv,
    write_growth_csv, write_inequality_csv, write_shock_csv, write_wage_csv, QuantilePoint,
    Quarter, Race,
};
use wagegap_core::varx::{parse_irf_csv, write_irf_csv};

use crate::commands::{
    cmd_decompose, cmd_growth, cmd_irf, manifest_file, sha256_hex, DecomposeOutcome, GrowthOutcome,
    IrfOutcome, Manifest, Summary, GROWTH_FILE, SERIES_FILE, SUMMARY_FILE,
};
use crate::config::{RunConfig, Window};

pub const DEMO_FIXTURE_SEED: u64 = 2008;
pub const WAGE_FILE: &str = "wages.csv";
pub const SHOCK_FILE: &str = "shocks.csv";
pub const CONTROL_FILE: &str = "industrial_production.csv";
pub const GROWTH_WAGE_FILE: &str = "growth_wages.csv";
/// Annual growth of D1, Q3, D9 in the growth fixture.
pub const GROWTH_FIXTURE_RATES: [f64; 3] = [0.015, 0.025, 0.035];

#[derive(Debug, Clone, Default)]
pub struct DemoOptions {
    /// Run on these fixture files instead of generating them.
    pub fixtures: Option<PathBuf>,
    /// Keep everything here instead of a temporary directory.
    pub out: Option<PathBuf>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemoReport {
    pub stages: Vec<Stage>,
}

impl DemoReport {
    pub fn passed(&self) -> bool {
        self.stages.iter().all(|s| s.status == Status::Pass)
    }

    pub fn failed_stage(&self) -> Option<&'static str> {
        self.stages
            .iter()
            .find(|s| s.status == Status::Fail)
            .map(|s| s.name)
    }
}

impl fmt::Display for DemoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.stages {
            let tag = match s.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skip => "SKIP",
            };
            writeln!(f, "{tag}  {:<11} {}", s.name, s.detail)?;
        }
        let ok = self
            .stages
            .iter()
            .filter(|s| s.status == Status::Pass)
            .count();
        write!(
            f,
            "demo {}: {ok}/{} stages passed",
            if self.passed() { "PASS" } else { "FAIL" },
            self.stages.len()
        )
    }
}

const STAGES: [&str; 6] = [
    "fixtures",
    "decompose",
    "irf",
    "growth",
    "round-trip",
    "invariants",
];

/// Configuration the demo runs with; inputs are relative to `dir`.
pub fn demo_config(dir: &Path, reps: Option<usize>, seed: Option<u64>) -> RunConfig {
    let mut config = RunConfig {
        wage_csv: Some(WAGE_FILE.into()),
        shock_csv: Some(SHOCK_FILE.into()),
        output_dir: dir.join("results"),
        controls: vec![CONTROL_FILE.into()],
        subsamples: vec![window("2000Q1", "2007Q4"), window("2009Q1", "2020Q1")],
        base_dir: dir.join("fixtures"),
        ..Default::default()
    };
    if let Some(r) = reps {
        config.varx.bootstrap_reps = r;
    }
    if let Some(s) = seed {
        config.varx.seed = s;
    }
    config
}

fn window(a: &str, b: &str) -> Window {
    Window {
        start: a.parse().expect("literal quarter"),
        end: b.parse().expect("literal quarter"),
    }
}

struct Outputs {
    fixture: Option<RealisticFixture>,
    decompose: Option<DecomposeOutcome>,
    irf: Option<IrfOutcome>,
    growth: Option<GrowthOutcome>,
}

pub fn run_demo(options: &DemoOptions) -> DemoReport {
    let temp;
    let dir = match &options.out {
        Some(d) => d.clone(),
        None => match tempfile::tempdir() {
            Ok(t) => {
                temp = t;
                temp.path().to_path_buf()
            }
            Err(e) => {
                return DemoReport {
                    stages: vec![Stage {
                        name: STAGES[0],
                        status: Status::Fail,
                        detail: format!("cannot create a temporary directory: {e}"),
                    }],
                }
            }
        },
    };
    let config = demo_config(&dir, options.reps, options.seed);
    let mut growth_config = config.clone();
    growth_config.wage_csv = Some(GROWTH_WAGE_FILE.into());

    let mut out = Outputs {
        fixture: None,
        decompose: None,
        irf: None,
        growth: None,
    };
    let mut stages = Vec::new();
    let mut failed = false;
    for name in STAGES {
        if failed {
            stages.push(Stage {
                name,
                status: Status::Skip,
                detail: "earlier stage failed".into(),
            });
            continue;
        }
        let result = match name {
            "fixtures" => fixtures_stage(&config.base_dir, options.fixtures.as_deref(), &mut out),
            "decompose" => cmd_decompose(&config).map(|d| {
                let detail = format!(
                    "{} quarters, mean within share {:.4}",
                    d.summary.quarters, d.summary.mean_within_share
                );
                out.decompose = Some(d);
                detail
            }),
            "irf" => cmd_irf(&config).map(|r| {
                let detail = format!(
                    "{} runs, {} replications each",
                    r.runs.len(),
                    config.varx.bootstrap_reps
                );
                out.irf = Some(r);
                detail
            }),
            "growth" => cmd_growth(&growth_config).map(|g| {
                let detail = format!(
                    "{} quarters of {:?} growth",
                    g.growth.quarters.len(),
                    g.growth.method
                );
                out.growth = Some(g);
                detail
            }),
            "round-trip" => round_trip(&config),
            _ => invariants(&config, &out),
        };
        stages.push(match result {
            Ok(detail) => Stage {
                name,
                status: Status::Pass,
                detail,
            },
            Err(e) => {
                failed = true;
                Stage {
                    name,
                    status: Status::Fail,
                    detail: format!("{e:#}"),
                }
            }
        });
    }
    DemoReport { stages }
}

fn write_fixture(
    dir: &Path,
    file: &str,
    write: impl FnOnce(&mut Vec<u8>) -> Result<()>,
) -> Result<()> {
    let mut bytes = Vec::new();
    write(&mut bytes)?;
    fs::write(dir.join(file), bytes).with_context(|| format!("writing {file}"))
}

fn fixtures_stage(dir: &Path, supplied: Option<&Path>, out: &mut Outputs) -> Result<String> {
    fs::create_dir_all(dir).context("creating fixture directory")?;
    let files = [WAGE_FILE, SHOCK_FILE, CONTROL_FILE, GROWTH_WAGE_FILE];
    if let Some(src) = supplied {
        for file in files {
            fs::copy(src.join(file), dir.join(file))
                .with_context(|| format!("copying supplied {file}"))?;
        }
        return Ok(format!("{} supplied files", files.len()));
    }
    let fx = realistic_fixture(DEMO_FIXTURE_SEED)?;
    write_fixture(dir, WAGE_FILE, |b| Ok(write_wage_csv(&fx.panel, b)?))?;
    write_fixture(dir, SHOCK_FILE, |b| Ok(write_shock_csv(&fx.shocks, b)?))?;
    write_fixture(dir, CONTROL_FILE, |b| {
        Ok(write_shock_csv(&fx.industrial_production, b)?)
    })?;
    let start: Quarter = "2000Q1".parse().expect("literal quarter");
    let growth = graded_growth_panel(start, fx.panel.len(), BASE_WAGES, GROWTH_FIXTURE_RATES)?;
    write_fixture(dir, GROWTH_WAGE_FILE, |b| Ok(write_wage_csv(&growth, b)?))?;
    let detail = format!(
        "{} generated files, {} quarters",
        files.len(),
        fx.panel.len()
    );
    out.fixture = Some(fx);
    Ok(detail)
}

/// Parses `bytes` with `parse` and checks that writing the result back
/// reproduces them exactly.
fn check_round_trip<T>(
    name: &str,
    bytes: &[u8],
    parse: impl Fn(&[u8]) -> Result<T>,
    write: impl Fn(&T, &mut Vec<u8>) -> Result<()>,
) -> Result<()> {
    let value = parse(bytes).with_context(|| format!("{name} does not parse"))?;
    let mut again = Vec::new();
    write(&value, &mut again)?;
    ensure!(again == bytes, "{name} changes when re-serialized");
    Ok(())
}

fn round_trip(config: &RunConfig) -> Result<String> {
    let read = |dir: &Path, file: &str| {
        fs::read(dir.join(file)).with_context(|| format!("reading {file}"))
    };
    let fixtures = &config.base_dir;
    let results = &config.output_dir;
    let mut checked = 0;

    for file in [WAGE_FILE, GROWTH_WAGE_FILE] {
        check_round_trip(
            file,
            &read(fixtures, file)?,
            |b| Ok(parse_wage_csv(b)?),
            |v, o| Ok(write_wage_csv(v, o)?),
        )?;
        checked += 1;
    }
    check_round_trip(
        SHOCK_FILE,
        &read(fixtures, SHOCK_FILE)?,
        |b| Ok(parse_shock_csv(b)?),
        |v, o| Ok(write_shock_csv(v, o)?),
    )?;
    check_round_trip(
        CONTROL_FILE,
        &read(fixtures, CONTROL_FILE)?,
        |b| Ok(parse_series_csv(b)?),
        |v, o| Ok(write_shock_csv(v, o)?),
    )?;
    check_round_trip(
        SERIES_FILE,
        &read(results, SERIES_FILE)?,
        |b| Ok(parse_inequality_csv(b)?),
        |v, o| Ok(write_inequality_csv(v, o)?),
    )?;
    check_round_trip(
        GROWTH_FILE,
        &read(results, GROWTH_FILE)?,
        |b| Ok(parse_growth_csv(b, config.growth_method)?),
        |v, o| Ok(write_growth_csv(v, o)?),
    )?;
    checked += 4;

    let irf_manifest = read_manifest(results, "irf")?;
    for run in &irf_manifest.runs {
        check_round_trip(
            &run.file,
            &read(results, &run.file)?,
            |b| Ok(parse_irf_csv(b)?),
            |v, o| Ok(write_irf_csv(v, o)?),
        )?;
        checked += 1;
    }
    serde_json::from_slice::<Summary>(&read(results, SUMMARY_FILE)?)
        .context("summary does not parse")?;
    checked += 1;
    Ok(format!(
        "{checked} files parse and re-serialize identically"
    ))
}

fn read_manifest(dir: &Path, command: &str) -> Result<Manifest> {
    let file = manifest_file(command);
    let bytes = fs::read(dir.join(&file)).with_context(|| format!("reading {file}"))?;
    serde_json::from_slice(&bytes).with_context(|| format!("{file} does not parse"))
}

fn invariants(config: &RunConfig, out: &Outputs) -> Result<String> {
    let results = &config.output_dir;
    let mut checks = 0;

    for command in ["decompose", "irf", "growth"] {
        let manifest = read_manifest(results, command)?;
        ensure!(
            manifest.seed == config.varx.seed,
            "{command} manifest has the wrong seed"
        );
        for digest in manifest.outputs.iter() {
            let bytes = fs::read(results.join(&digest.path))
                .with_context(|| format!("reading {}", digest.name))?;
            ensure!(
                sha256_hex(&bytes) == digest.sha256,
                "{} does not match its manifest digest",
                digest.name
            );
        }
        for input in &manifest.inputs {
            let bytes = fs::read(config.resolve(Path::new(&input.path)))
                .with_context(|| format!("reading {} input", input.name))?;
            ensure!(
                sha256_hex(&bytes) == input.sha256,
                "{} input changed after the run",
                input.name
            );
        }
        checks += 1;
    }

    let decompose = out.decompose.as_ref().context("decompose did not run")?;
    let series = parse_inequality_csv(fs::read(results.join(SERIES_FILE))?.as_slice())?;
    for (q, row) in series.quarters.iter().zip(&series.rows) {
        let gap = row.total - row.within() - row.between;
        ensure!(
            gap.abs() <= 1e-8 * row.total.max(1e-300),
            "{q}: components do not add up to the total"
        );
        ensure!(
            (row.within_share + row.between_share - 1.0).abs() < 1e-8,
            "{q}: shares do not sum to 1"
        );
    }
    let summary: Summary = serde_json::from_slice(&fs::read(results.join(SUMMARY_FILE))?)?;
    ensure!(
        summary == Summary::of(&decompose.series),
        "summary disagrees with the series"
    );
    ensure!(
        (summary.mean_within_share - Summary::of(&series).mean_within_share).abs() < 1e-9,
        "summary disagrees with series.csv"
    );
    checks += 2;

    if let Some(fx) = &out.fixture {
        for (row, target) in decompose.series.rows.iter().zip(&fx.targets) {
            ensure!(
                (row.between - target.between).abs() < 1e-10,
                "between term differs from the planted value"
            );
            for g in 0..3 {
                ensure!(
                    (row.within_by_group[g] - target.within[g]).abs() < 1e-10,
                    "within term differs from the planted value"
                );
            }
            let (lo, hi) = REALISTIC_WITHIN_SHARE_BAND;
            ensure!(
                (lo..=hi).contains(&row.within_share),
                "within share {} outside [{lo}, {hi}]",
                row.within_share
            );
        }
        checks += 1;
    }

    let irf = out.irf.as_ref().context("irf did not run")?;
    let horizons = config.varx.horizon + 1;
    for run in &irf.runs {
        let r = &run.response;
        ensure!(
            r.point.len() == horizons,
            "{}: expected {horizons} horizons",
            run.record.name
        );
        ensure!(
            r.is_ordered(),
            "{}: bands do not contain the point",
            run.record.name
        );
        ensure!(
            r.variables == run.record.variables,
            "{}: variables differ from the manifest",
            run.record.name
        );
    }
    let components = irf
        .runs
        .iter()
        .find(|r| r.record.name == "components")
        .context("no components run")?;
    if out.fixture.is_some() {
        let b = components
            .response
            .variable_index("between")
            .context("no between response")?;
        let peak = components.response.peak_horizon(b);
        ensure!(
            !components.response.band_covers(peak, b, 0.0),
            "planted between effect not detected at its peak"
        );
    }
    checks += 1;

    let growth = &out.growth.as_ref().context("growth did not run")?.growth;
    for race in Race::ALL {
        let [d1, q3, d9] = QuantilePoint::ALL.map(|k| growth.mean(race, k));
        if !(d9 > q3 && q3 > d1) {
            bail!("{race}: mean growth not increasing in quantile ({d1:.3}, {q3:.3}, {d9:.3})");
        }
    }
    checks += 1;
    Ok(format!("{checks} groups of checks hold"))
}
