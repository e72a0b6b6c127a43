//! File formats, report rendering and the `revrate` command line on top of
//! `revrate-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod report;

use clap::{Parser, Subcommand};

use config::{Flags, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "revrate",
    version,
    about = "Predict app-review star ratings and find review-rating mismatches"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model (--model <kind>) on a rated corpus.
    Train(Flags),
    /// Score reviews (--input) with a trained model file (--model).
    Predict(Flags),
    /// Mismatch prevalence and mean ratings per app.
    MismatchReport(Flags),
    /// k-fold cross-validation of a model kind.
    Crossval(Flags),
    /// Fleiss' kappa, consolidated ratings and the original-vs-annotated matrix.
    Agreement(Flags),
    /// Generate a rated synthetic corpus.
    Synth(Flags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Train(_) => "train",
            Command::Predict(_) => "predict",
            Command::MismatchReport(_) => "mismatch-report",
            Command::Crossval(_) => "crossval",
            Command::Agreement(_) => "agreement",
            Command::Synth(_) => "synth",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Command::Train(f)
            | Command::Predict(f)
            | Command::MismatchReport(f)
            | Command::Crossval(f)
            | Command::Agreement(f)
            | Command::Synth(f) => f,
        }
    }
}

pub fn run(command: &Command) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(command.name(), command.flags())?;
    match command {
        Command::Train(_) => commands::train(&cfg),
        Command::Predict(_) => commands::predict(&cfg),
        Command::MismatchReport(_) => commands::mismatch_report(&cfg),
        Command::Crossval(_) => commands::crossval(&cfg),
        Command::Agreement(_) => commands::agreement(&cfg),
        Command::Synth(_) => commands::synth(&cfg),
    }
}
