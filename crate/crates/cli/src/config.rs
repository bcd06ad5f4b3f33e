//! Run configuration: a JSON file, then command-line overrides on top.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use wagegap_core::panel::{GrowthMethod, Quarter};
use wagegap_core::varx::VarxSpec;

/// How the four inequality components enter the IRF runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ComponentMode {
    /// One four-variable system.
    #[default]
    Joint,
    /// One single-component system per component.
    Separate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: Quarter,
    pub end: Quarter,
}

impl std::str::FromStr for Window {
    type Err = String;

    /// `2000Q1:2007Q4`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("expected START:END, got {s:?}"))?;
        let start: Quarter = a.parse().map_err(|e| format!("{e}"))?;
        let end: Quarter = b.parse().map_err(|e| format!("{e}"))?;
        if start > end {
            return Err(format!("window {start}:{end} ends before it starts"));
        }
        Ok(Window { start, end })
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub wage_csv: Option<PathBuf>,
    /// Not needed for `decompose` or `growth`.
    pub shock_csv: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub varx: VarxSpec,
    pub standardize: bool,
    /// Bounds of the main sample; the overlap of the inputs when absent.
    pub start: Option<Quarter>,
    pub end: Option<Quarter>,
    /// Extra IRF runs of the total index on these windows.
    pub subsamples: Vec<Window>,
    /// Single-series files added to the total-index system one at a time.
    pub controls: Vec<PathBuf>,
    pub components: ComponentMode,
    pub growth_method: GrowthMethod,
    /// Relative input paths are resolved against this directory.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            wage_csv: None,
            shock_csv: None,
            output_dir: PathBuf::from("out"),
            varx: VarxSpec::default(),
            standardize: true,
            start: None,
            end: None,
            subsamples: Vec::new(),
            controls: Vec::new(),
            components: ComponentMode::default(),
            growth_method: GrowthMethod::default(),
            base_dir: PathBuf::new(),
        }
    }
}

/// Values given on the command line. `None` leaves the config untouched.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub wage_csv: Option<PathBuf>,
    pub shock_csv: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub standardize: Option<bool>,
    pub start: Option<Quarter>,
    pub end: Option<Quarter>,
    pub reps: Option<usize>,
    pub horizon: Option<usize>,
    pub shock_size: Option<f64>,
    pub no_contemporaneous: bool,
    pub bands: Option<wagegap_core::varx::BandMethod>,
    pub subsamples: Vec<Window>,
    pub controls: Vec<PathBuf>,
    pub components: Option<ComponentMode>,
    pub growth_method: Option<GrowthMethod>,
}

impl RunConfig {
    /// Reads a JSON config. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        config.output_dir = config.base_dir.join(&config.output_dir);
        Ok(config)
    }

    /// Applies `o` on top; anything set on the command line wins. Paths from
    /// the command line are relative to the working directory, so they are
    /// made absolute-or-cwd-relative before being stored.
    pub fn apply(&mut self, o: Overrides) {
        let cwd = |p: PathBuf| {
            if p.is_absolute() {
                p
            } else {
                std::env::current_dir().map(|d| d.join(&p)).unwrap_or(p)
            }
        };
        if let Some(p) = o.wage_csv {
            self.wage_csv = Some(cwd(p));
        }
        if let Some(p) = o.shock_csv {
            self.shock_csv = Some(cwd(p));
        }
        if let Some(p) = o.output_dir {
            self.output_dir = p;
        }
        if let Some(s) = o.seed {
            self.varx.seed = s;
        }
        if let Some(s) = o.standardize {
            self.standardize = s;
        }
        if o.start.is_some() {
            self.start = o.start;
        }
        if o.end.is_some() {
            self.end = o.end;
        }
        if let Some(r) = o.reps {
            self.varx.bootstrap_reps = r;
        }
        if let Some(h) = o.horizon {
            self.varx.horizon = h;
        }
        if let Some(s) = o.shock_size {
            self.varx.shock_size = s;
        }
        if o.no_contemporaneous {
            self.varx.include_contemporaneous_shock = false;
        }
        if let Some(b) = o.bands {
            self.varx.bands = b;
        }
        if !o.subsamples.is_empty() {
            self.subsamples = o.subsamples;
        }
        if !o.controls.is_empty() {
            self.controls = o.controls.into_iter().map(cwd).collect();
        }
        if let Some(c) = o.components {
            self.components = c;
        }
        if let Some(g) = o.growth_method {
            self.growth_method = g;
        }
    }

    /// Where an input path actually lives.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.base_dir.join(path)
    }

    pub fn wage_path(&self) -> Result<&Path> {
        match &self.wage_csv {
            Some(p) => Ok(p),
            None => bail!("no wage CSV given (set wage_csv in the config or pass --wages)"),
        }
    }

    pub fn shock_path(&self) -> Result<&Path> {
        match &self.shock_csv {
            Some(p) => Ok(p),
            None => bail!("no shock CSV given (set shock_csv in the config or pass --shocks)"),
        }
    }

    /// Spec and bound invariants that do not need the input files.
    pub fn validate(&self) -> Result<()> {
        self.varx.validate()?;
        if let (Some(s), Some(e)) = (self.start, self.end) {
            if s > e {
                bail!("start {s} is after end {e}");
            }
        }
        Ok(())
    }
}
