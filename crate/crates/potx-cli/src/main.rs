//! `potx` — command line front end for the system-model analysis
//! toolkit: validation, classification, transparency regions, gap
//! analysis, probabilistic inference, and DOT export.

mod commands;
mod dot;
mod out;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "potx",
    version,
    about = "Analyze observer transparency in human-in-the-loop system models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Suppress commentary; keep primary results and machine lines.
    #[arg(long, global = true)]
    quiet: bool,
    /// Output style. `dot` is only valid for `export`.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a document: structure, classification, observer rules,
    /// and its expect blocks.
    Check { file: PathBuf },
    /// Print the perspective, class, and level of every node.
    Classify { file: PathBuf },
    /// Show what the deployed observers render transparent.
    Regions {
        file: PathBuf,
        /// Observers to deploy (comma separated); default: all declared.
        #[arg(long, value_delimiter = ',')]
        deploy: Option<Vec<String>>,
    },
    /// Compare transparency targets against the deployed observers and
    /// suggest observers for the gaps.
    Gaps {
        file: PathBuf,
        /// Observers to deploy (comma separated); default: all declared.
        #[arg(long, value_delimiter = ',')]
        deploy: Option<Vec<String>>,
    },
    /// Posterior of a state, by exact inference over the transparent
    /// region.
    Infer {
        file: PathBuf,
        /// State to query.
        #[arg(long)]
        query: String,
        /// Observed values as state=value pairs (comma separated).
        #[arg(long, value_delimiter = ',')]
        evidence: Vec<String>,
        /// Observers to deploy (comma separated); default: all declared.
        #[arg(long, value_delimiter = ',')]
        deploy: Option<Vec<String>>,
    },
    /// Render the system as a graph description (requires --format dot).
    Export { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(_) => {
            eprintln!("internal error: unexpected panic");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> u8 {
    let writer = out::Writer::new(cli.quiet, cli.format == Format::Machine);
    match cli.command {
        Command::Check { file } => commands::check(&file, cli.format, &writer),
        Command::Classify { file } => commands::classify(&file, cli.format, &writer),
        Command::Regions { file, deploy } => {
            commands::regions(&file, deploy.as_deref(), cli.format, &writer)
        }
        Command::Gaps { file, deploy } => {
            commands::gaps(&file, deploy.as_deref(), cli.format, &writer)
        }
        Command::Infer { file, query, evidence, deploy } => {
            commands::infer(&file, &query, &evidence, deploy.as_deref(), cli.format, &writer)
        }
        Command::Export { file } => commands::export(&file, cli.format, &writer),
    }
}
