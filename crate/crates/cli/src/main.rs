//! `itca`: search for class combinations, run simulation benchmarks and
//! evaluate the theoretical merge regions from the command line.

mod args;
mod jobs;
mod manifest;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

/// Failures surfaced to the user, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] itca::Error),

    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for usage and configuration problems, 3 for failures while computing.
    pub fn exit_code(&self) -> u8 {
        use itca::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Output { .. } => 3,
            CliError::Core(e) => match e {
                E::FileNotFound(_)
                | E::TooManyClasses { .. }
                | E::InvalidConfig(_)
                | E::PartitionSyntax { .. }
                | E::LabelOutOfRange { .. }
                | E::NotOrdinal(_)
                | E::Parse { .. }
                | E::NonNumericFeature { .. }
                | E::InvalidDataset(_)
                | E::SingleClass
                | E::Io { .. }
                | E::Csv(_)
                | E::Json(_) => 2,
                _ => 3,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match jobs::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
