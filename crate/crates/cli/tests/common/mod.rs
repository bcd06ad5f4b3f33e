#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use wagegap_cli::config::RunConfig;
use wagegap_core::fixtures::RealisticFixture;
use wagegap_core::panel::{write_shock_csv, write_wage_csv, QuarterlyPanel, ShockSeries};

pub fn write_panel(path: &Path, panel: &QuarterlyPanel) {
    let mut out = Vec::new();
    write_wage_csv(panel, &mut out).unwrap();
    fs::write(path, out).unwrap();
}

pub fn write_series(path: &Path, series: &ShockSeries) {
    let mut out = Vec::new();
    write_shock_csv(series, &mut out).unwrap();
    fs::write(path, out).unwrap();
}

/// Writes the fixture's three files into `dir` and returns a config reading
/// them, with results under `dir/out`.
pub fn fixture_config(dir: &Path, fx: &RealisticFixture, reps: usize) -> RunConfig {
    write_panel(&dir.join("wages.csv"), &fx.panel);
    write_series(&dir.join("shocks.csv"), &fx.shocks);
    write_series(&dir.join("ip.csv"), &fx.industrial_production);
    let mut config = RunConfig {
        wage_csv: Some("wages.csv".into()),
        shock_csv: Some("shocks.csv".into()),
        output_dir: dir.join("out"),
        base_dir: dir.to_path_buf(),
        ..Default::default()
    };
    config.varx.bootstrap_reps = reps;
    config
}

/// Every file in `dir`, sorted by name.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    files.sort();
    files
}

pub fn sample_sd(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}
