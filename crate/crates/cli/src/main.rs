//! `wpr-secrecy`: batch experiments for the wireless-powered relay model.
//!
//! Exit codes: 0 success, 1 I/O error, 2 solver failure, 64 usage error.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wpr_secrecy::sim::Algorithm;

use commands::{Fig2Args, Overrides, SingleArgs};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "wpr-secrecy", version, about = "Secrecy-rate experiments for a wireless-powered untrusted relay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON config object, or a manifest.json from an earlier run.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// GOA grid step and LOA tolerance; for `timing`, the only epsilon run.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Worker threads for the sweep (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Channel realizations per cell.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one channel realization.
    Single {
        #[command(flatten)]
        common: Common,
        #[arg(long = "alg", value_parser = parse_alg)]
        algorithm: Option<Algorithm>,
        /// Source power, dBm.
        #[arg(long = "p-s", allow_negative_numbers = true)]
        p_s: Option<f64>,
        /// Destination jamming power, dBm.
        #[arg(long = "p-d", allow_negative_numbers = true)]
        p_d: Option<f64>,
        #[arg(long)]
        trial: Option<u64>,
        /// Also write single.csv and manifest.json here.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Monte Carlo sweep over the SNR and P_d grids; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Algorithms to run, overriding the config.
        #[arg(long = "alg", value_parser = parse_alg, value_delimiter = ',')]
        algorithms: Vec<Algorithm>,
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
    /// Single-antenna rate and derivative over rho; writes fig2.csv.
    Fig2 {
        #[command(flatten)]
        common: Common,
        #[arg(long = "p-s", allow_negative_numbers = true)]
        p_s: Option<f64>,
        #[arg(long = "p-d", allow_negative_numbers = true)]
        p_d: Option<f64>,
        #[arg(long)]
        trial: Option<u64>,
        /// Grid points on [0, 1].
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
    /// GOA vs LOA wall time per realization; writes timing.csv.
    Timing {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
}

fn parse_alg(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

fn overrides(c: &Common) -> Overrides {
    Overrides {
        config: c.config.clone(),
        seed: c.seed,
        epsilon: c.epsilon,
        trials: c.trials,
    }
}

fn set_threads(n: Option<usize>) -> Result<(), CliError> {
    let Some(n) = n else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Usage("--threads must be >= 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("--threads: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Single {
            common,
            algorithm,
            p_s,
            p_d,
            trial,
            out,
        } => {
            set_threads(common.threads)?;
            let args = SingleArgs {
                algorithm,
                p_s_dbm: p_s,
                p_d_dbm: p_d,
                trial,
                out,
            };
            commands::cmd_single(&overrides(&common), &args)
        }
        Command::Sweep { common, algorithms, out } => {
            set_threads(common.threads)?;
            commands::cmd_sweep(&overrides(&common), &algorithms, &out)
        }
        Command::Fig2 {
            common,
            p_s,
            p_d,
            trial,
            points,
            out,
        } => {
            set_threads(common.threads)?;
            let args = Fig2Args {
                p_s_dbm: p_s,
                p_d_dbm: p_d,
                trial,
                points,
            };
            commands::cmd_fig2(&overrides(&common), &args, &out)
        }
        Command::Timing { common, out } => {
            set_threads(common.threads)?;
            commands::cmd_timing(&overrides(&common), &out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { CliError::USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
