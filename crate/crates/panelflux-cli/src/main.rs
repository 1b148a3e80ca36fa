//! `panelflux` — panel trade-openness and ICT econometrics pipeline.
//!
//! Subcommands run the pipeline up to a chosen stage. The stage commands
//! (`forecast`, `unitroot`, `pvar`, `irf`) reuse intermediate CSVs already
//! present in the output directory, so a single stage can be re-run from
//! the previous stage's artifact; `run` and `demo` always start fresh.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use panelflux_cli::config::{Overrides, PipelineConfig};
use panelflux_cli::papersim;
use panelflux_cli::pipeline::{run_pipeline_with, RunReport, StagePoint, StageStatus};
use panelflux_cli::worldbank::HttpTransport;

#[derive(Parser)]
#[command(
    name = "panelflux",
    version,
    about = "Forecast trade panels with per-series MLPs, test stationarity, \
             fit a fixed-effects panel VAR, and trace impulse responses."
)]
struct Cli {
    /// Structured config file (TOML); flags override file values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for artifacts and the run report.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Root seed; per-series and per-replicate seeds derive from it.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Bypass the HTTP cache and re-fetch source data.
    #[arg(long, global = true)]
    refresh: bool,

    /// Comma-separated ISO3 country codes.
    #[arg(long, global = true, value_name = "LIST", value_delimiter = ',')]
    countries: Option<Vec<String>>,

    /// Panel VAR lag order (overrides the config's lag policy).
    #[arg(long, global = true, value_name = "N")]
    lags: Option<usize>,

    /// Impulse-response horizon in quarters.
    #[arg(long, global = true, value_name = "N")]
    horizon: Option<usize>,

    /// Comma-separated Cholesky ordering, e.g. `ICT,F`.
    #[arg(long, global = true, value_name = "LIST", value_delimiter = ',')]
    ordering: Option<Vec<String>>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fetch (or reuse cached) source data and write `observed.csv`.
    Fetch,
    /// Run through the MLP forecast stage and fuse observed + forecast.
    Forecast,
    /// Run the panel unit-root suite (differencing if non-stationary).
    Unitroot,
    /// Fit the fixed-effects panel VAR and write the estimates table.
    Pvar,
    /// Compute impulse responses with bootstrap bands, CSV + SVG charts.
    Irf,
    /// Run the full pipeline from a fresh start.
    Run,
    /// Run the full pipeline on the bundled synthetic dataset.
    Demo,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        out: cli.out.clone(),
        seed: cli.seed,
        refresh: cli.refresh,
        countries: cli.countries.clone(),
        lags: cli.lags,
        horizon: cli.horizon,
        ordering: cli.ordering.clone(),
    };

    let cfg = match &cli.command {
        Command::Demo => papersim::demo_config().finalize(&overrides),
        _ => PipelineConfig::resolve(cli.config.as_deref(), &overrides),
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };

    let (through, resume) = match cli.command {
        Command::Fetch => (StagePoint::Ingest, false),
        Command::Forecast => (StagePoint::Fuse, true),
        Command::Unitroot => (StagePoint::UnitRoot, true),
        Command::Pvar => (StagePoint::Pvar, true),
        Command::Irf => (StagePoint::Irf, true),
        Command::Run | Command::Demo => (StagePoint::Irf, false),
    };

    let (report, result) = run_pipeline_with(&cfg, HttpTransport::new(), through, resume);
    print_report(&report);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn print_report(report: &RunReport) {
    for stage in &report.stages {
        let tag = match stage.status {
            StageStatus::Ok => "ok",
            StageStatus::Failed => "FAILED",
            StageStatus::Skipped => "skipped",
        };
        println!("[{tag}] {} ({} ms)", stage.name, stage.duration_ms);
    }
    for warning in &report.warnings {
        println!("warning: {warning}");
    }
    println!(
        "wrote {} artifact(s) to {}",
        report.manifest.len(),
        report.out_dir
    );
}
