//! `sbd`: command-line front end.
//!
//! Exit codes: 0 success, 1 internal error, 2 usage or configuration
//! error, 3 bad input data.

mod args;
mod commands;
mod config_file;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

/// A failed run, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Internal(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<sbd_core::Error> for Failure {
    fn from(e: sbd_core::Error) -> Self {
        use sbd_core::Error as E;
        let msg = e.to_string();
        match e {
            E::Argument(_) | E::Config(_) => Failure::Usage(msg),
            E::Io { .. } | E::Format { .. } | E::Data(_) | E::Lookup(_) => Failure::Data(msg),
            E::Shape(_) | E::Numeric(_) | E::Divergence { .. } => Failure::Internal(msg),
        }
    }
}

fn run() -> Result<(), Failure> {
    let args = config_file::expand(std::env::args_os().collect())?;
    let cli = Cli::try_parse_from(args).unwrap_or_else(|e| e.exit());
    match cli.command {
        Command::EmbedTrain(a) => commands::embed_train(a),
        Command::SbdTrain(a) => commands::sbd_train(a),
        Command::SbdEval(a) => commands::sbd_eval(a),
        Command::SbdPredict(a) => commands::sbd_predict(a),
        Command::Synth(a) => commands::synth(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
