use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;
mod output;

use error::CliError;

#[derive(Parser)]
#[command(name = "siband", version, about = "Recoverability analysis and recovery for shift-invariant signals behind a lowpass filter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether a scenario's coefficients are recoverable
    Analyze(Common),
    /// Design a binary mixer bank or a single shift mixer
    DesignMixers(Common),
    /// Simulate the lowpass measurements of a scenario
    Simulate(Common),
    /// Recover coefficients from a measurement CSV
    Recover {
        #[command(flatten)]
        common: Common,
        /// Measurement CSV written by `simulate`
        #[arg(long)]
        obs: PathBuf,
    },
    /// Simulate, recover and compare against the true coefficients
    Roundtrip(Common),
    /// Sample α̂ of the lowpassed Grammian over a range of cutoffs
    SweepCutoff {
        #[command(flatten)]
        common: Common,
        /// Lowest cutoff, in units of π/T
        #[arg(long, default_value_t = 1.0)]
        from: f64,
        /// Highest cutoff, in units of π/T
        #[arg(long, default_value_t = 2.0)]
        to: f64,
        #[arg(long, default_value_t = 41)]
        steps: usize,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario (or design) JSON file
    input: PathBuf,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Frequency grid size, a power of two of at least 64
    #[arg(long, value_parser = parse_grid)]
    grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Verdict threshold for `analyze`, pseudo-inverse tolerance otherwise
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Extra CSV with per-frequency diagnostics
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn parse_grid(s: &str) -> Result<usize, String> {
    let g: usize = s.parse().map_err(|e| format!("{e}"))?;
    if g < 64 || !g.is_power_of_two() {
        return Err(format!("grid size must be a power of two >= 64, got {g}"));
    }
    Ok(g)
}

fn threads_from_env() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SIBAND_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("SIBAND_THREADS must be a positive integer, got {v:?}")))?;
    siband_core::par::init_threads(n);
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    threads_from_env()?;
    match cli.command {
        Command::Analyze(c) => commands::analyze(&c.into()),
        Command::DesignMixers(c) => commands::design_mixers(&c.into()),
        Command::Simulate(c) => commands::simulate(&c.into()),
        Command::Recover { common, obs } => commands::recover(&common.into(), &obs),
        Command::Roundtrip(c) => commands::roundtrip(&c.into()),
        Command::SweepCutoff { common, from, to, steps } => commands::sweep_cutoff(&common.into(), from, to, steps),
    }
}

impl From<Common> for commands::Options {
    fn from(c: Common) -> Self {
        commands::Options {
            input: c.input,
            out: c.out,
            grid: c.grid,
            seed: c.seed,
            tol: c.tol,
            format: c.format,
            diagnostics: c.diagnostics,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let err = CliError::Usage(e.render().to_string().trim().to_string());
            eprintln!("{}", output::to_json_string(&err.to_json()));
            return ExitCode::from(err.exit_code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", output::to_json_string(&e.to_json()));
            ExitCode::from(e.exit_code())
        }
    }
}
