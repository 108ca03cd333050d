//! Command-line front end: network validation, fixed-magnitude reliability
//! studies, fragility curves and reference oracles.
//!
//! Exit codes: 0 success, 1 user error (bad arguments, invalid inputs),
//! 2 internal/computation error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use seisfrag::{commands, CliError};

#[derive(Parser)]
#[command(
    name = "seisfrag",
    version,
    about = "Seismic connectivity reliability and fragility curves of lifeline networks via subset simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a network JSON file against the schema and its invariants.
    Validate {
        /// Network JSON file.
        network: PathBuf,
    },
    /// Estimate the network failure probability at one moment magnitude.
    Reliability {
        #[arg(long)]
        network: PathBuf,
        /// Optional study config (TOML or JSON); flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Moment magnitude.
        #[arg(long)]
        mw: f64,
        /// Limit-state function: rp, sp or binary.
        #[arg(long, default_value = "rp")]
        ls: String,
        /// Estimator: ss (subset simulation) or mcs (crude Monte Carlo).
        #[arg(long, default_value = "ss")]
        method: String,
        /// Override the origin/destination pair (two node ids).
        #[arg(long, num_args = 2)]
        od: Option<Vec<String>>,
        /// k for k-out-of-N aggregation over the file's od_pairs.
        #[arg(long)]
        k: Option<usize>,
        /// Seeded repetitions (c.o.v. reported when > 1).
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p0: Option<f64>,
        #[arg(long)]
        tf: Option<f64>,
        #[arg(long)]
        max_levels: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Crude-MCS sample count (with --method mcs).
        #[arg(long)]
        mcs_n: Option<u64>,
        /// Crude-MCS target c.o.v. (overrides --mcs-n).
        #[arg(long)]
        target_cov: Option<f64>,
        /// Crude-MCS sample cap for --target-cov.
        #[arg(long)]
        cap: Option<u64>,
        /// Write the machine-readable JSON record here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append a CSV row here (header written for new files).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Produce a full fragility curve over a magnitude grid.
    Fragility {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Grid as max:min:step, e.g. 9.0:3.0:0.5.
        #[arg(long)]
        grid: Option<String>,
        /// Divide-and-conquer interval tops, e.g. 9.0,7.0,5.0.
        #[arg(long)]
        intervals: Option<String>,
        /// Damage states: hazus-4 or label:median:zeta[,...].
        #[arg(long)]
        damage_states: Option<String>,
        #[arg(long, default_value = "rp")]
        ls: String,
        #[arg(long, num_args = 2)]
        od: Option<Vec<String>>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p0: Option<f64>,
        #[arg(long)]
        tf: Option<f64>,
        #[arg(long)]
        max_levels: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Curve CSV destination (stdout when omitted).
        #[arg(long)]
        out_csv: Option<PathBuf>,
        /// Full level diagnostics as JSON.
        #[arg(long)]
        out_json: Option<PathBuf>,
    },
    /// Crude Monte Carlo reference estimate.
    Mcs {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        mw: f64,
        #[arg(long, default_value = "binary")]
        ls: String,
        #[arg(long, num_args = 2)]
        od: Option<Vec<String>>,
        #[arg(long)]
        k: Option<usize>,
        /// Sample count.
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        /// Run until this c.o.v. instead of a fixed sample count.
        #[arg(long)]
        target_cov: Option<f64>,
        /// Sample cap for --target-cov (default 1e8).
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact two-component series/parallel probability by 2-D quadrature.
    Oracle {
        /// series or parallel.
        #[arg(long, default_value = "parallel")]
        system: String,
        /// Moment magnitude (geometry mode).
        #[arg(long)]
        mw: Option<f64>,
        /// Reliability indices (direct mode, with --rho).
        #[arg(long, num_args = 2, allow_negative_numbers = true)]
        beta: Option<Vec<f64>>,
        /// Margin correlation (direct mode).
        #[arg(long, allow_negative_numbers = true)]
        rho: Option<f64>,
        /// Epicentral distance of component 1, km.
        #[arg(long, default_value_t = 3.46)]
        r1: f64,
        /// Epicentral distance of component 2, km.
        #[arg(long, default_value_t = 9.28)]
        r2: f64,
        /// Inter-component distance, km.
        #[arg(long, default_value_t = 11.12)]
        delta: f64,
        #[arg(long, default_value_t = 0.98)]
        c_median: f64,
        #[arg(long, default_value_t = 0.69)]
        zeta: f64,
        #[arg(long, default_value_t = 0.265)]
        sigma_eta: f64,
        #[arg(long, default_value_t = 0.502)]
        sigma_eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{err}");
                    ExitCode::from(1)
                }
            };
        }
    };
    init_thread_pool();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::User(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Default worker count from SEISFRAG_THREADS (otherwise rayon's default).
fn init_thread_pool() {
    if let Ok(value) = std::env::var("SEISFRAG_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { network } => commands::validate(&network),
        Command::Reliability {
            network,
            config,
            mw,
            ls,
            method,
            od,
            k,
            reps,
            n,
            p0,
            tf,
            max_levels,
            seed,
            mcs_n,
            target_cov,
            cap,
            out,
            csv,
        } => commands::reliability(commands::ReliabilityArgs {
            network,
            config,
            mw,
            ls,
            method,
            od,
            k,
            reps,
            n,
            p0,
            tf,
            max_levels,
            seed,
            mcs_n,
            target_cov,
            cap,
            out,
            csv,
        }),
        Command::Fragility {
            network,
            config,
            grid,
            intervals,
            damage_states,
            ls,
            od,
            k,
            reps,
            n,
            p0,
            tf,
            max_levels,
            seed,
            out_csv,
            out_json,
        } => commands::fragility(commands::FragilityArgs {
            network,
            config,
            grid,
            intervals,
            damage_states,
            ls,
            od,
            k,
            reps,
            n,
            p0,
            tf,
            max_levels,
            seed,
            out_csv,
            out_json,
        }),
        Command::Mcs {
            network,
            config,
            mw,
            ls,
            od,
            k,
            n,
            target_cov,
            cap,
            seed,
            out,
        } => commands::mcs(commands::McsArgs {
            network,
            config,
            mw,
            ls,
            od,
            k,
            n,
            target_cov,
            cap,
            seed,
            out,
        }),
        Command::Oracle {
            system,
            mw,
            beta,
            rho,
            r1,
            r2,
            delta,
            c_median,
            zeta,
            sigma_eta,
            sigma_eps,
            out,
        } => commands::oracle(commands::OracleArgs {
            system,
            mw,
            beta,
            rho,
            r1,
            r2,
            delta,
            c_median,
            zeta,
            sigma_eta,
            sigma_eps,
            out,
        }),
    }
}
