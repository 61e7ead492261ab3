use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use slicegam::artifacts::write_atomic;
use slicegam::cli::{cmd_bands, cmd_diagnostics, cmd_fit, cmd_simulate, error_report};
use slicegam::inference::DEFAULT_GRID_POINTS;
use slicegam::Error;

#[derive(Parser)]
#[command(name = "slicegam", version, about = "Constrained Bayesian GAM fitting by slice-sampler Gibbs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the model described by a config file.
    Fit { config: PathBuf },
    /// Write a synthetic data set (scenarios: a, b, c, null).
    Simulate {
        scenario: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Number of sine periods for scenario b.
        #[arg(long, default_value_t = 2)]
        periods: u32,
    },
    /// Recompute a joint band table from a draws file.
    Bands {
        draws: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long, default_value_t = 0.05)]
        u: f64,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid: usize,
        /// Write here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print GBPV and MCSE/ESS diagnostics for a draws file.
    Diagnostics {
        draws: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        u: f64,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid: usize,
    },
}

fn emit(text: String, out: Option<PathBuf>) -> slicegam::Result<()> {
    match out {
        Some(p) => write_atomic(&p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> slicegam::Result<()> {
    match cli.command {
        Command::Fit { config } => {
            let started = std::time::Instant::now();
            let out = cmd_fit(config)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("wrote {} in {:.1?}", out.draws.parent().unwrap_or(&out.draws).display(), started.elapsed());
            Ok(())
        }
        Command::Simulate { scenario, n, seed, out, periods } => cmd_simulate(&scenario, n, seed, periods, out).map(|_| ()),
        Command::Bands { draws, term, u, grid, out } => emit(cmd_bands(draws, &term, u, grid)?, out),
        Command::Diagnostics { draws, u, grid } => emit(cmd_diagnostics(draws, u, grid)?, None),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = Error::Usage(e.to_string().lines().next().unwrap_or("").to_string());
            eprintln!("{}", error_report(&err));
            let _ = e.print();
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_report(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
