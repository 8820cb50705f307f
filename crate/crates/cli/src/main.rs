mod commands;
mod dot;
mod error;
mod inputs;
mod model;
mod text;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::Exit;

#[derive(Parser, Debug)]
#[command(
    name = "wirecomp",
    version,
    about = "Compose, simulate and check linear systems wired by diagrams"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Dot,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Model file (`.wd`).
    pub model: PathBuf,
    /// Write the payload here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Output format; json unless the command says otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Absolute comparison tolerance.
    #[arg(long, default_value_t = 1e-9, value_parser = positive)]
    pub tol: f64,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(_) => Err("must be a positive number".into()),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Args, Debug, Clone)]
pub struct Composite {
    /// Diagram to apply.
    #[arg(long)]
    pub diagram: Option<String>,
    /// Comma-separated component systems, in the diagram's inner-box order.
    #[arg(long, value_delimiter = ',')]
    pub systems: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Apply a diagram to component systems and print the composite.
    Compose {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        composite: Composite,
    },
    /// Simulate a system, or a diagram applied to systems.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// A named system.
        #[arg(long, conflicts_with_all = ["diagram", "systems"])]
        system: Option<String>,
        #[command(flatten)]
        composite: Composite,
        /// Number of steps; defaults to the number of input rows.
        #[arg(long)]
        steps: Option<usize>,
        /// Initial state, comma separated; zero when omitted.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        init: Option<Vec<f64>>,
        /// Constant input applied at every step, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, group = "input_source")]
        input_const: Option<Vec<f64>>,
        /// Inline inputs: rows separated by `;`, entries by `,`.
        #[arg(long, allow_hyphen_values = true, group = "input_source")]
        inputs: Option<String>,
        /// Inputs from a CSV file, one row per step; a header row is skipped.
        #[arg(long, group = "input_source")]
        inputs_csv: Option<PathBuf>,
        /// Run the coupled per-component simulation instead of the composite.
        #[arg(long)]
        oracle: bool,
        /// Run both simulations and fail (exit 3) unless they agree within --tol.
        #[arg(long, conflicts_with = "oracle")]
        compare: bool,
    },
    /// Compose candidates and compare against a target system.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        diagram: String,
        /// Comma-separated candidate systems.
        #[arg(long, value_delimiter = ',')]
        candidates: Vec<String>,
        #[arg(long)]
        target: String,
    },
    /// Recover component blocks from a sensor/controller/dynamics composite.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        system: String,
        /// State sizes of sensor, controller and dynamics, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        partition: Vec<usize>,
        /// Controller readout used to split the coupling product, rows
        /// separated by `;` (orthonormal rows). Identity when omitted.
        #[arg(long, allow_hyphen_values = true)]
        controller_readout: Option<String>,
    },
    /// Flatten an implementation tree to a single diagram.
    Flatten {
        #[command(flatten)]
        common: Common,
        /// Root box of the `implement` block.
        #[arg(long)]
        implementation: String,
    },
    /// Graphviz rendering of a diagram or an implementation tree.
    ExportDot {
        #[command(flatten)]
        common: Common,
        #[arg(long, group = "what", required = true)]
        diagram: Option<String>,
        #[arg(long, group = "what")]
        implementation: Option<String>,
    },
    /// Execute the directives in a model file.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Print the model in canonical form.
    Fmt {
        #[command(flatten)]
        common: Common,
        /// Only report whether the file is already canonical (exit 3 if not).
        #[arg(long)]
        check: bool,
    },
    /// Machine-readable JSON export of the model.
    Json {
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit { code, message }) => {
            if !message.is_empty() {
                eprintln!("{message}");
            }
            ExitCode::from(code)
        }
    }
}
