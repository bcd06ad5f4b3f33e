use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wagegap_core::panel::{
    align, compute_series, growth_rates, parse_series_csv, parse_shock_csv, parse_wage_csv,
    write_growth_csv, write_inequality_csv, GrowthSeries, InequalitySeries, Quarter,
    QuarterlyPanel, SeriesColumn, ShockSeries,
};
use wagegap_core::varx::{
    bootstrap_bands, build_design, estimate, subsample, write_irf_csv, ImpulseResponse, VarxData,
};

use crate::config::{ComponentMode, RunConfig, Window};

pub const SERIES_FILE: &str = "series.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const GROWTH_FILE: &str = "growth.csv";

pub fn manifest_file(command: &str) -> String {
    format!("{command}_manifest.json")
}

pub fn irf_file(run: &str) -> String {
    format!("irf_{run}.csv")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Role for inputs, file name for outputs.
    pub name: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub name: String,
    pub file: String,
    pub variables: Vec<String>,
    pub sample_start: Quarter,
    pub sample_end: Quarter,
    /// Rows entering the regression after the presample.
    pub observations: usize,
    pub bootstrap_succeeded: usize,
    pub bootstrap_failed: usize,
}

/// Everything needed to repeat a command: the resolved configuration, the
/// bootstrap seed, and digests of every input and output. No timestamps, so
/// reruns reproduce it byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
    pub inputs: Vec<FileDigest>,
    pub runs: Vec<RunRecord>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Session {
    config: RunConfig,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

impl Session {
    fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        fs::create_dir_all(&config.output_dir).with_context(|| {
            format!("creating output directory {}", config.output_dir.display())
        })?;
        Ok(Self {
            config: config.clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    fn read(&mut self, role: &str, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(self.config.resolve(path))
            .with_context(|| format!("reading {role} {}", path.display()))?;
        self.inputs.push(FileDigest {
            name: role.into(),
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    fn wages(&mut self) -> Result<QuarterlyPanel> {
        let path = self.config.wage_path()?.to_path_buf();
        let bytes = self.read("wage_csv", &path)?;
        let panel =
            parse_wage_csv(bytes.as_slice()).with_context(|| format!("in {}", path.display()))?;
        restrict_panel(&panel, self.config.start, self.config.end)
    }

    fn shocks(&mut self) -> Result<ShockSeries> {
        let path = self.config.shock_path()?.to_path_buf();
        let bytes = self.read("shock_csv", &path)?;
        parse_shock_csv(bytes.as_slice()).with_context(|| format!("in {}", path.display()))
    }

    fn controls(&mut self) -> Result<Vec<ShockSeries>> {
        let paths = self.config.controls.clone();
        paths
            .iter()
            .map(|path| {
                let bytes = self.read("control", path)?;
                parse_series_csv(bytes.as_slice()).with_context(|| format!("in {}", path.display()))
            })
            .collect()
    }

    fn write(&mut self, file: &str, bytes: Vec<u8>) -> Result<()> {
        let path = self.config.output_dir.join(file);
        fs::write(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(FileDigest {
            name: file.into(),
            path: file.into(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    fn finish(mut self, command: &str, runs: Vec<RunRecord>) -> Result<Manifest> {
        let manifest = Manifest {
            tool: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            command: command.into(),
            seed: self.config.varx.seed,
            config: self.config.clone(),
            inputs: std::mem::take(&mut self.inputs),
            runs,
            outputs: std::mem::take(&mut self.outputs),
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let path = self.config.output_dir.join(manifest_file(command));
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(manifest)
    }
}

fn restrict_panel(
    panel: &QuarterlyPanel,
    start: Option<Quarter>,
    end: Option<Quarter>,
) -> Result<QuarterlyPanel> {
    let s = start.unwrap_or(panel.first());
    let e = end.unwrap_or(panel.last());
    panel.restrict(s, e).ok_or_else(|| {
        anyhow!(
            "wage panel {}..{} has no quarters in {s}..{e}",
            panel.first(),
            panel.last()
        )
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub quarters: usize,
    pub first_quarter: Quarter,
    pub last_quarter: Quarter,
    pub mean_within_share: f64,
    pub mean_between_share: f64,
    /// Quarters with a zero index, whose shares are reported as (0, 1).
    pub degenerate_quarters: usize,
}

impl Summary {
    pub fn of(series: &InequalitySeries) -> Self {
        let n = series.len() as f64;
        Self {
            quarters: series.len(),
            first_quarter: series.quarters[0],
            last_quarter: series.quarters[series.len() - 1],
            mean_within_share: series.rows.iter().map(|r| r.within_share).sum::<f64>() / n,
            mean_between_share: series.rows.iter().map(|r| r.between_share).sum::<f64>() / n,
            degenerate_quarters: series.rows.iter().filter(|r| r.degenerate).count(),
        }
    }
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "quarters            {} ({}..{})",
            self.quarters, self.first_quarter, self.last_quarter
        )?;
        writeln!(f, "mean within share   {:.4}", self.mean_within_share)?;
        write!(f, "mean between share  {:.4}", self.mean_between_share)?;
        if self.degenerate_quarters > 0 {
            write!(f, "\nzero-index quarters {}", self.degenerate_quarters)?;
        }
        Ok(())
    }
}

pub struct DecomposeOutcome {
    pub series: InequalitySeries,
    pub summary: Summary,
    pub manifest: Manifest,
}

/// Writes the decomposed series and its summary.
pub fn cmd_decompose(config: &RunConfig) -> Result<DecomposeOutcome> {
    let mut session = Session::new(config)?;
    let panel = session.wages()?;
    let series = compute_series(&panel)?;
    let summary = Summary::of(&series);

    let mut csv = Vec::new();
    write_inequality_csv(&series, &mut csv)?;
    session.write(SERIES_FILE, csv)?;
    let mut json = serde_json::to_vec_pretty(&summary)?;
    json.push(b'\n');
    session.write(SUMMARY_FILE, json)?;
    let manifest = session.finish("decompose", Vec::new())?;
    Ok(DecomposeOutcome {
        series,
        summary,
        manifest,
    })
}

pub struct IrfRun {
    pub record: RunRecord,
    pub response: ImpulseResponse,
}

pub struct IrfOutcome {
    pub runs: Vec<IrfRun>,
    pub manifest: Manifest,
}

struct System {
    name: String,
    columns: Vec<(String, Vec<f64>)>,
    window: Option<Window>,
}

fn fit_system(
    config: &RunConfig,
    quarters: &[Quarter],
    shocks: &[f64],
    system: &System,
) -> Result<IrfRun> {
    let spec = &config.varx;
    let (names, columns): (Vec<String>, Vec<Vec<f64>>) = system.columns.iter().cloned().unzip();
    let mut data = VarxData::new(quarters.to_vec(), names, &columns, "shock", shocks.to_vec())?;
    if let Some(w) = system.window {
        data = subsample(&data, w.start, w.end, spec)?;
    }
    if config.standardize {
        data = data.standardized()?;
    }
    let design = build_design(&data, spec)?;
    let model = estimate(&design)?;
    let outcome = bootstrap_bands(&model, &data, spec)?;
    Ok(IrfRun {
        record: RunRecord {
            name: system.name.clone(),
            file: irf_file(&system.name),
            variables: data.names().to_vec(),
            sample_start: data.quarters()[0],
            sample_end: data.quarters()[data.len() - 1],
            observations: design.usable_rows(),
            bootstrap_succeeded: outcome.succeeded,
            bootstrap_failed: outcome.failed,
        },
        response: outcome.response,
    })
}

/// Columns side by side; every part must share horizons.
fn merge(parts: Vec<IrfRun>, name: &str) -> IrfRun {
    let mut it = parts.into_iter();
    let mut first = it.next().expect("at least one part");
    for part in it {
        let r = &mut first.response;
        r.variables.extend(part.response.variables);
        for h in 0..r.point.len() {
            r.point[h].extend(&part.response.point[h]);
            r.lower[h].extend(&part.response.lower[h]);
            r.upper[h].extend(&part.response.upper[h]);
        }
        first.record.variables.extend(part.record.variables);
        first.record.bootstrap_succeeded += part.record.bootstrap_succeeded;
        first.record.bootstrap_failed += part.record.bootstrap_failed;
    }
    first.record.name = name.into();
    first.record.file = irf_file(name);
    first
}

/// Total index alone, each subsample, total plus each control, and the four
/// components.
pub fn cmd_irf(config: &RunConfig) -> Result<IrfOutcome> {
    let mut session = Session::new(config)?;
    let panel = session.wages()?;
    let shocks = session.shocks()?;
    let controls = session.controls()?;
    let aligned = align(&panel, &shocks).context("aligning wages with shocks")?;
    let quarters = aligned.quarters().to_vec();
    let shock_path = aligned.shocks.values().to_vec();
    let series = compute_series(&aligned.panel)?;
    let column = |c: SeriesColumn| (c.name().to_string(), series.column(c));

    let mut systems = vec![System {
        name: "total".into(),
        columns: vec![column(SeriesColumn::Total)],
        window: None,
    }];
    for w in &config.subsamples {
        systems.push(System {
            name: format!("total_{}_{}", w.start, w.end),
            columns: vec![column(SeriesColumn::Total)],
            window: Some(*w),
        });
    }
    for control in &controls {
        let values = control
            .values_for(&quarters)
            .with_context(|| format!("control {}", control.name()))?;
        systems.push(System {
            name: format!("total_{}", control.name()),
            columns: vec![
                column(SeriesColumn::Total),
                (control.name().to_string(), values),
            ],
            window: None,
        });
    }

    let mut runs = Vec::new();
    for system in &systems {
        let run = fit_system(config, &quarters, &shock_path, system)
            .with_context(|| format!("run {}", system.name))?;
        runs.push(run);
    }
    let components: Vec<(String, Vec<f64>)> = SeriesColumn::COMPONENTS
        .iter()
        .map(|&c| column(c))
        .collect();
    let component_run = match config.components {
        ComponentMode::Joint => fit_system(
            config,
            &quarters,
            &shock_path,
            &System {
                name: "components".into(),
                columns: components,
                window: None,
            },
        ),
        ComponentMode::Separate => components
            .into_iter()
            .map(|col| {
                fit_system(
                    config,
                    &quarters,
                    &shock_path,
                    &System {
                        name: col.0.clone(),
                        columns: vec![col],
                        window: None,
                    },
                )
            })
            .collect::<Result<Vec<_>>>()
            .map(|parts| merge(parts, "components")),
    }
    .context("run components")?;
    runs.push(component_run);

    for run in &runs {
        let mut csv = Vec::new();
        write_irf_csv(&run.response, &mut csv)?;
        session.write(&run.record.file, csv)?;
    }
    let manifest = session.finish("irf", runs.iter().map(|r| r.record.clone()).collect())?;
    Ok(IrfOutcome { runs, manifest })
}

pub struct GrowthOutcome {
    pub growth: GrowthSeries,
    pub manifest: Manifest,
}

pub fn cmd_growth(config: &RunConfig) -> Result<GrowthOutcome> {
    let mut session = Session::new(config)?;
    let panel = session.wages()?;
    let growth = growth_rates(&panel, config.growth_method)?;
    let mut csv = Vec::new();
    write_growth_csv(&growth, &mut csv)?;
    session.write(GROWTH_FILE, csv)?;
    let manifest = session.finish("growth", Vec::new())?;
    Ok(GrowthOutcome { growth, manifest })
}
