//! `qbi`: query, export and stress-test quantum-encoded Bayesian networks.
//!
//! Exit codes: 0 success, 1 input or parse error, 2 impossible evidence,
//! 3 internal invariant failure.

mod commands;
mod error;
mod scenario;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use commands::{DistSelection, Engine, Format, MetricRequest};
use error::CliError;
use scenario::Scenario;

#[derive(Parser)]
#[command(
    name = "qbi",
    version,
    about = "Quantum statevector Bayesian inference"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Model file (`.qbn`), or `@ids` for the bundled intrusion-detection scenario
    model: PathBuf,
    /// Display order for outcome bit-strings, leftmost first (default: declaration order)
    #[arg(long, value_name = "NAMES")]
    order: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Posterior / conditional table for target variables given evidence
    Query {
        #[command(flatten)]
        model: ModelArgs,
        /// Target variable, optionally `NAME=bit` to print only matching rows
        #[arg(long = "target", required = true, value_name = "NAME[=BIT]")]
        targets: Vec<String>,
        #[arg(long, value_name = "NAME=BIT")]
        evidence: Vec<String>,
        #[arg(long, value_enum, default_value = "quantum")]
        engine: Engine,
    },
    /// Export a joint, marginal, conditional or heatmap table
    #[command(group(ArgGroup::new("selection").required(true)
        .args(["joint", "marginal", "conditional", "heatmap"])))]
    Dist {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        joint: bool,
        #[arg(long, value_name = "NAMES")]
        marginal: Option<String>,
        #[arg(long, value_name = "NAMES")]
        conditional: Option<String>,
        /// Two variables: rows are the first, columns the second
        #[arg(long, value_name = "ROW,COL")]
        heatmap: Option<String>,
        #[arg(long, value_name = "NAME=BIT")]
        evidence: Vec<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Write to this file instead of stdout
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Entropy, mutual information, fidelity, CDF and top-k reports
    Metrics {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_name = "NAME")]
        entropy: Option<String>,
        #[arg(long, value_name = "NAME")]
        posterior_entropy: Option<String>,
        #[arg(long, value_name = "NAME=BIT")]
        evidence: Vec<String>,
        #[arg(long, value_name = "A,B")]
        mi: Option<String>,
        #[arg(long, num_args = 2, value_names = ["A.csv", "B.csv"])]
        fidelity: Option<Vec<PathBuf>>,
        #[arg(long)]
        cdf: bool,
        #[arg(long, value_name = "K")]
        top: Option<usize>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Jitter every CPT entry and report how stable the top-3 outcomes are
    Perturb {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_name = "EPS")]
        noise: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the compiled gate list
    Circuit {
        #[command(flatten)]
        model: ModelArgs,
    },
}

fn load(m: &ModelArgs) -> Result<Scenario, CliError> {
    Scenario::load(&m.model, m.order.as_deref())
}

fn run(cli: Cli) -> Result<(String, Option<PathBuf>), CliError> {
    match cli.command {
        Command::Query {
            model,
            targets,
            evidence,
            engine,
        } => Ok((
            commands::cmd_query(&load(&model)?, &targets, &evidence, engine)?,
            None,
        )),
        Command::Dist {
            model,
            joint,
            marginal,
            conditional,
            heatmap,
            evidence,
            format,
            output,
        } => {
            let selection = match (joint, marginal, conditional, heatmap) {
                (true, ..) => DistSelection::Joint,
                (_, Some(m), ..) => DistSelection::Marginal(m),
                (_, _, Some(c), _) => DistSelection::Conditional(c),
                (_, _, _, Some(h)) => DistSelection::Heatmap(h),
                _ => unreachable!("clap requires one selection"),
            };
            let text = commands::cmd_dist(&load(&model)?, &selection, &evidence, format)?;
            Ok((text, output))
        }
        Command::Metrics {
            model,
            entropy,
            posterior_entropy,
            evidence,
            mi,
            fidelity,
            cdf,
            top,
            output,
        } => {
            let req = MetricRequest {
                entropy,
                posterior_entropy,
                evidence,
                mi,
                fidelity: fidelity.map(|mut v| {
                    let b = v.pop().expect("two paths");
                    let a = v.pop().expect("two paths");
                    (a, b)
                }),
                cdf,
                top,
            };
            Ok((commands::cmd_metrics(&load(&model)?, &req)?, output))
        }
        Command::Perturb {
            model,
            noise,
            trials,
            seed,
        } => Ok((
            commands::cmd_perturb(&load(&model)?, noise, trials, seed)?,
            None,
        )),
        Command::Circuit { model } => Ok((commands::cmd_circuit(&load(&model)?)?, None)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok((text, None)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Ok((text, Some(path))) => match std::fs::write(&path, text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("qbi: {}: {e}", path.display());
                ExitCode::from(1)
            }
        },
        Err(e) => {
            eprintln!("qbi: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
