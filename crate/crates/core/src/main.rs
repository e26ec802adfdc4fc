use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sis_invariance::config::parse_config;
use sis_invariance::report::{emit_report, run_analysis, ReportFormat};
use sis_invariance::{Error, FrequencyGrid};

const THREADS_VAR: &str = "SIS_INVARIANCE_THREADS";

#[derive(Parser)]
#[command(name = "sis-invariance", version, about = "Extra translation invariance of shift-invariant spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze the generators described in a JSON config.
    Analyze {
        config: PathBuf,
        /// Largest n tested for 1/n-invariance.
        #[arg(long)]
        n_max: Option<usize>,
        /// Grid as `M,K`.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
        /// Relative rank tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        oracle_tol: Option<f64>,
        /// Write per-cell CSV files into this directory.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        #[arg(long)]
        no_oracle: bool,
        /// Write the JSON report here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (m, k) = s.split_once(',').ok_or_else(|| format!("expected M,K, got {s:?}"))?;
    let m = m.trim().parse().map_err(|e| format!("M: {e}"))?;
    let k = k.trim().parse().map_err(|e| format!("K: {e}"))?;
    Ok((m, k))
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_VAR} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("{THREADS_VAR}: {e}")))
}

fn run(cli: Cli) -> Result<bool, Error> {
    configure_threads()?;
    let Command::Analyze { config, n_max, grid, tol, oracle_tol, csv_dir, no_oracle, output } = cli.command;
    let text = fs::read_to_string(&config).map_err(|source| Error::Io { path: config.clone(), source })?;
    let mut cfg = parse_config(&text)?;
    if let Some(n) = n_max {
        cfg.n_max = n;
    }
    if let Some((m, k)) = grid {
        cfg.grid = FrequencyGrid::with_sampling(m, k, cfg.grid.sampling())?;
    }
    if let Some(t) = tol {
        cfg.rel_tol = t;
    }
    if let Some(t) = oracle_tol {
        cfg.oracle_tol = t;
    }
    if no_oracle {
        cfg.analyses.oracle = false;
    }
    if csv_dir.is_some() {
        cfg.outputs.csv_dir = csv_dir;
    }
    if output.is_some() {
        cfg.outputs.report = output;
    }
    cfg.validate()?;

    let report = run_analysis(&cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match &cfg.outputs.report {
        Some(path) => {
            emit_report(&report, ReportFormat::Json, path)?;
        }
        None => print!("{}", report.to_json()?),
    }
    if let Some(dir) = &cfg.outputs.csv_dir {
        emit_report(&report, ReportFormat::CsvBundle, dir)?;
    }
    let agreement = report.oracle.as_ref().is_none_or(|o| o.agreement);
    Ok(report.consistent && agreement)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: internal inconsistency between analyses (see warnings)");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
