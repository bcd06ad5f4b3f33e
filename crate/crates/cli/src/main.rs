use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use wagegap_cli::commands::{cmd_decompose, cmd_growth, cmd_irf};
use wagegap_cli::config::{ComponentMode, Overrides, RunConfig, Window};
use wagegap_cli::demo::{run_demo, DemoOptions};
use wagegap_core::panel::{GrowthMethod, QuantilePoint, Quarter, Race};
use wagegap_core::varx::BandMethod;

#[derive(Parser)]
#[command(
    name = "wagegap",
    version,
    about = "Wage inequality decomposition and policy-shock impulse responses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose the Theil index of each quarter into within and between terms.
    Decompose(Common),
    /// Estimate impulse responses of the inequality series to the shock.
    Irf(Common),
    /// Wage growth rates per race and quantile.
    Growth(Common),
    /// Generate fixtures and run every stage end to end.
    Demo(DemoArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Bands {
    StdDev,
    Percentile,
}

#[derive(Clone, Copy, ValueEnum)]
enum Growth {
    YearOverYear,
    QuarterLog,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `quarter,race,quantile,wage` file.
    #[arg(long)]
    wages: Option<PathBuf>,
    /// `quarter,shock` file.
    #[arg(long)]
    shocks: Option<PathBuf>,
    /// Control series (`quarter,<name>`) added to the total-index system; repeatable.
    #[arg(long = "control")]
    controls: Vec<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, overrides_with = "no_standardize")]
    standardize: bool,
    #[arg(long)]
    no_standardize: bool,
    #[arg(long)]
    start: Option<Quarter>,
    #[arg(long)]
    end: Option<Quarter>,
    /// Extra total-index run on START:END; repeatable.
    #[arg(long = "subsample")]
    subsamples: Vec<Window>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    shock_size: Option<f64>,
    #[arg(long)]
    no_contemporaneous: bool,
    #[arg(long, value_enum)]
    bands: Option<Bands>,
    #[arg(long, value_enum)]
    components: Option<ComponentMode>,
    #[arg(long, value_enum)]
    growth_method: Option<Growth>,
}

#[derive(Args)]
struct DemoArgs {
    /// Use the fixture files in this directory instead of generating them.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Keep fixtures and results here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn config(self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let standardize = match (self.standardize, self.no_standardize) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        };
        config.apply(Overrides {
            wage_csv: self.wages,
            shock_csv: self.shocks,
            output_dir: self.out,
            seed: self.seed,
            standardize,
            start: self.start,
            end: self.end,
            reps: self.reps,
            horizon: self.horizon,
            shock_size: self.shock_size,
            no_contemporaneous: self.no_contemporaneous,
            bands: self.bands.map(|b| match b {
                Bands::StdDev => BandMethod::StdDev,
                Bands::Percentile => BandMethod::Percentile,
            }),
            subsamples: self.subsamples,
            controls: self.controls,
            components: self.components,
            growth_method: self.growth_method.map(|g| match g {
                Growth::YearOverYear => GrowthMethod::YearOverYear,
                Growth::QuarterLog => GrowthMethod::QuarterLog,
            }),
        });
        Ok(config)
    }
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Decompose(args) => {
            let out = cmd_decompose(&args.config()?)?;
            println!("{}", out.summary);
        }
        Command::Irf(args) => {
            let out = cmd_irf(&args.config()?)?;
            for run in &out.runs {
                let r = &run.response;
                println!(
                    "{} ({}..{}, {} obs)",
                    run.record.name,
                    run.record.sample_start,
                    run.record.sample_end,
                    run.record.observations
                );
                for (v, name) in r.variables.iter().enumerate() {
                    let h = r.peak_horizon(v);
                    let sig = if r.band_covers(h, v, 0.0) { "" } else { "  *" };
                    println!(
                        "  {name:<22} peak h={h:<2} {:>9.4} [{:.4}, {:.4}]{sig}",
                        r.point[h][v], r.lower[h][v], r.upper[h][v]
                    );
                }
            }
        }
        Command::Growth(args) => {
            let out = cmd_growth(&args.config()?)?;
            println!("mean growth (%)   {:>8} {:>8} {:>8}", "D1", "Q3", "D9");
            for race in Race::ALL {
                let [a, b, c] = QuantilePoint::ALL.map(|k| out.growth.mean(race, k));
                println!("{race:<17} {a:>8.3} {b:>8.3} {c:>8.3}");
            }
        }
        Command::Demo(args) => {
            let report = run_demo(&DemoOptions {
                fixtures: args.fixtures,
                out: args.out,
                reps: args.reps,
                seed: args.seed,
            });
            println!("{report}");
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
