use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pia::cli::{self, PolicySource, ProblemSource, EXIT_ERROR};
use pia::SimConfig;

#[derive(Parser)]
#[command(name = "pia", version, about = "Policy improvement for killed diffusions on an interval")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run policy improvement and write iterations.csv, value.csv, policy.csv.
    Solve {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// example1, example2 or manufactured
        #[arg(long)]
        oracle: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Estimate payoffs by Monte Carlo and write estimate.csv.
    Simulate {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        oracle: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Starting point; may be repeated.
        #[arg(long = "x0", required = true, allow_negative_numbers = true)]
        x0: Vec<f64>,
        /// Policy as an expression in x. Without it, policy.csv from a
        /// previous solve is read from --policy-from (default: --out).
        #[arg(long)]
        policy: Option<String>,
        #[arg(long = "policy-from")]
        policy_from: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Joint-law demonstration; writes tanaka.csv.
    Tanaka {
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long = "n-paths", default_value_t = 100_000)]
        n_paths: usize,
        #[arg(long = "t-max", default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match args.command {
        Command::Solve { spec, oracle, out } => match ProblemSource::from_flags(spec, oracle) {
            Ok(source) => cli::cmd_solve(&source, &out),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_ERROR
            }
        },
        Command::Simulate {
            spec,
            oracle,
            out,
            x0,
            policy,
            policy_from,
            seed,
        } => match ProblemSource::from_flags(spec, oracle) {
            Ok(source) => {
                let policy = match policy {
                    Some(expr) => PolicySource::Expression(expr),
                    None => PolicySource::PriorSolve(policy_from.unwrap_or_else(|| out.clone())),
                };
                cli::cmd_simulate(&source, &x0, &policy, seed, &out)
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_ERROR
            }
        },
        Command::Tanaka {
            t,
            step,
            n_paths,
            t_max,
            seed,
            out,
        } => {
            let cfg = SimConfig {
                step,
                n_paths,
                seed,
                t_max,
            };
            cli::cmd_tanaka(t, &cfg, &out)
        }
    };
    ExitCode::from(code as u8)
}
