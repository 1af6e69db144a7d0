//! `cia-sim`: command-line front end for the alignment toolkit.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use args::Cli;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_DIAGNOSTIC: u8 = 4;

#[derive(Debug, Serialize)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    pub exit_code: u8,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: "config",
            message: message.into(),
            exit_code: EXIT_CONFIG,
        }
    }

    pub fn diagnostic(message: impl Into<String>) -> Self {
        Self {
            kind: "diagnostic",
            message: message.into(),
            exit_code: EXIT_DIAGNOSTIC,
        }
    }

    pub fn io(e: std::io::Error) -> Self {
        Self {
            kind: "io",
            message: e.to_string(),
            exit_code: EXIT_CONFIG,
        }
    }

    pub fn internal(e: impl std::fmt::Display) -> Self {
        Self {
            kind: "internal",
            message: e.to_string(),
            exit_code: 1,
        }
    }
}

impl From<cia_core::Error> for CliError {
    fn from(e: cia_core::Error) -> Self {
        use cia_core::Error as E;
        let (kind, exit_code) = match &e {
            E::Infeasible(_) => ("infeasible", EXIT_INFEASIBLE),
            E::SizeCap { .. } => ("size_cap", EXIT_INFEASIBLE),
            E::NumericCollision(_) => ("numeric_collision", EXIT_DIAGNOSTIC),
            E::RankDeficient(_) => ("rank_deficient", EXIT_DIAGNOSTIC),
            E::InsufficientData(_) => ("insufficient_data", EXIT_DIAGNOSTIC),
            E::Sampling(_) => ("sampling", EXIT_DIAGNOSTIC),
            E::ChannelFile(_) => ("channel_file", EXIT_CONFIG),
            E::Config(_) | E::IndexOutOfRange { .. } | E::UnresolvableSymbol(_) => {
                ("config", EXIT_CONFIG)
            }
        };
        Self {
            kind,
            message: e.to_string(),
            exit_code,
        }
    }
}

fn report(err: &CliError, json: bool) {
    if json {
        eprintln!(
            "{}",
            serde_json::to_string(err).unwrap_or_else(|_| err.message.clone())
        );
    } else {
        eprintln!("cia-sim: {} error: {}", err.kind, err.message);
    }
}

fn main() -> ExitCode {
    let json_errors = std::env::args().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if json_errors {
                report(&CliError::config(e.to_string().trim().to_string()), true);
            } else {
                let _ = e.print();
            }
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            report(&err, json_errors);
            ExitCode::from(err.exit_code)
        }
    }
}
