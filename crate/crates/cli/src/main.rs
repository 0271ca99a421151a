//! `hct`: analyse `.hct` netlists from the command line.

mod check;
mod commands;
mod format;
mod session;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use session::{CliError, Globals, Report};

#[derive(Parser, Debug)]
#[command(name = "hct", version, about = "Homogeneous linear circuit analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Relative tolerance for singularity, residual and patch decisions
    /// [default: netlist option, else 1e-9].
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Reference node for the default cut/cycle pair [default: last node].
    #[arg(long = "ref", global = true, value_name = "NODE")]
    reference: Option<String>,

    /// Seed for the `check` harness.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Significant digits in text output.
    #[arg(long, global = true, default_value_t = 6)]
    precision: usize,

    /// JSON file whose `branches` entries replace triads by id.
    #[arg(long, global = true, value_name = "FILE")]
    overrides: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for branch currents and voltages.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Model::Symmetric)]
        model: Model,
        /// Branch ids kept homogeneous in the partial model
        /// [default: branches with p = 0 or q = 0].
        #[arg(long, value_delimiter = ',', value_name = "IDS")]
        homog: Option<Vec<String>>,
        /// Branch ids solved in admittance form in the partial model.
        #[arg(long, value_delimiter = ',', value_name = "IDS")]
        admittance: Vec<String>,
    },
    /// Kirchhoff polynomial, its dehomogenizations and the tree count.
    Poly {
        file: PathBuf,
        /// Print only the symbolic polynomials, without evaluating them.
        #[arg(long)]
        graph_only: bool,
    },
    /// Degeneracy verdict with a determinant cross-check.
    Degeneracy { file: PathBuf },
    /// Spanning trees and the invariants of the default pair.
    Trees {
        file: PathBuf,
        /// Maximum number of trees listed.
        #[arg(long, default_value_t = 100)]
        limit: usize,
    },
    /// Thévenin/Norton equivalent at a port.
    Thevenin {
        file: PathBuf,
        #[arg(long, num_args = 2, required = true, value_names = ["N+", "N-"])]
        port: Vec<String>,
    },
    /// Fault dictionary for one observed branch voltage.
    Faults {
        file: PathBuf,
        /// Observed branch [default: netlist option].
        #[arg(long)]
        observe: Option<String>,
        #[arg(long, value_delimiter = ',', value_name = "IDS")]
        short: Vec<String>,
        #[arg(long, value_delimiter = ',', value_name = "IDS")]
        open: Vec<String>,
        /// Node pair `n+:n-`; repeatable.
        #[arg(long, value_name = "N+:N-")]
        bridge: Vec<String>,
        /// Every single short/open fault plus all declared bridges.
        #[arg(long)]
        all_single: bool,
        /// Relative tolerance under which two fault values share a signature.
        #[arg(long, default_value_t = 1e-6)]
        signature_tol: f64,
    },
    /// Z-parameter existence for a three-branch Π model.
    Zparams { file: PathBuf },
    /// Randomized self-check of the core identities.
    Check {
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Full,
    Symmetric,
    Bcurrent,
    Bvoltage,
    Partial,
}

fn dispatch(cli: Cli) -> Result<Report, CliError> {
    let globals = Globals {
        tol: cli.tol,
        reference: cli.reference,
        seed: cli.seed,
        precision: cli.precision,
        overrides: cli.overrides,
    };
    match cli.command {
        Command::Solve {
            file,
            model,
            homog,
            admittance,
        } => commands::solve(&globals, &file, model, homog, &admittance),
        Command::Poly { file, graph_only } => commands::poly(&globals, &file, graph_only),
        Command::Degeneracy { file } => commands::degeneracy(&globals, &file),
        Command::Trees { file, limit } => commands::trees(&globals, &file, limit),
        Command::Thevenin { file, port } => commands::thevenin(&globals, &file, (&port[0], &port[1])),
        Command::Faults {
            file,
            observe,
            short,
            open,
            bridge,
            all_single,
            signature_tol,
        } => commands::faults(
            &globals,
            &file,
            commands::FaultRequest {
                observe,
                short,
                open,
                bridge,
                all_single,
                signature_tol,
            },
        ),
        Command::Zparams { file } => commands::zparams(&globals, &file),
        Command::Check { cases } => check::run(&globals, cases),
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json_mode = cli.json;
    match dispatch(cli) {
        Ok(report) => {
            let out = if json_mode {
                format!("{}\n", report.to_json())
            } else {
                report.text
            };
            emit(&out);
            if report.failed {
                ExitCode::from(5)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            eprintln!("error[{}]: {}", err.category.as_str(), err.message);
            if json_mode {
                let doc = json!({
                    "branches": Value::Array(Vec::new()),
                    "result": Value::Null,
                    "residuals": Value::Null,
                    "diagnostics": {
                        "error": { "category": err.category.as_str(), "message": err.message },
                    },
                });
                emit(&format!("{}\n", serde_json::to_string_pretty(&doc).expect("JSON values serialize")));
            }
            ExitCode::from(err.exit_code())
        }
    }
}
