//! Deterministic, scriptable front end over the model library.
//!
//! Exit codes: 0 on success, 2 on usage errors, 3 on invalid data or
//! requests, 4 on numerical failures (nonexistent estimates,
//! non-convergence, singular information). Identical invocations with
//! identical seeds produce byte-identical standard output.

mod commands;
mod inputs;
mod render;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use betagraph_core::Error;

#[derive(Parser)]
#[command(
    name = "betagraph",
    version,
    about = "Estimation, variance bounds, and likelihood-ratio tests for \
             degree-heterogeneous random-graph models"
)]
struct Cli {
    /// Report failures as one-line JSON on stderr instead of plain text.
    #[arg(long, global = true)]
    json_errors: bool,
    #[command(subcommand)]
    command: commands::Command,
}

/// Everything that can stop a subcommand, tagged for the exit-code
/// contract.
pub enum Failure {
    /// A structurally valid parse that still asks for something impossible.
    Usage(String),
    /// A library error; data defects exit 3, numerical failures exit 4.
    Core(Error),
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure::Core(err)
    }
}

impl Failure {
    fn describe(&self) -> (&'static str, String, u8) {
        match self {
            Failure::Usage(message) => ("Usage", message.clone(), 2),
            Failure::Core(err) => {
                let code = if err.is_data_error() { 3 } else { 4 };
                (error_kind(err), err.to_string(), code)
            }
        }
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::DiagonalNonzero { .. } => "DiagonalNonzero",
        Error::CountExceedsTrials { .. } => "CountExceedsTrials",
        Error::AsymmetricUndirected { .. } => "AsymmetricUndirected",
        Error::EmptyWhitelist => "EmptyWhitelist",
        Error::NoWindows => "NoWindows",
        Error::OverlappingWindows { .. } => "OverlappingWindows",
        Error::Parse { .. } => "Parse",
        Error::Schema { .. } => "Schema",
        Error::ShapeMismatch { .. } => "ShapeMismatch",
        Error::SelfLoop { .. } => "SelfLoop",
        Error::NonexistentMle { .. } => "NonexistentMLE",
        Error::NotConverged { .. } => "NotConverged",
        Error::BracketFailure { .. } => "BracketFailure",
        Error::SingularFim { .. } => "SingularFim",
        Error::InvalidSpecialCase { .. } => "InvalidSpecialCase",
        Error::DegenerateInput { .. } => "DegenerateInput",
        Error::FitFailed { source, .. } => error_kind(source),
        Error::TooFewValidSims { .. } => "TooFewValidSims",
        Error::Io(_) => "Io",
        Error::Json(_) => "Json",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            let (kind, message, code) = failure.describe();
            if cli.json_errors {
                eprintln!("{}", render::error_json(kind, &message, code));
            } else {
                eprintln!("error[{kind}]: {message}");
            }
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failure_kinds_follow_the_exit_code_contract() {
        let usage = Failure::Usage("bad combination".into());
        assert_eq!(usage.describe().2, 2);

        let data = Failure::Core(Error::Schema { message: "ragged".into() });
        let (kind, _, code) = data.describe();
        assert_eq!((kind, code), ("Schema", 3));

        let numerical = Failure::Core(Error::NonexistentMle { message: "pinned".into() });
        let (kind, _, code) = numerical.describe();
        assert_eq!((kind, code), ("NonexistentMLE", 4));

        let wrapped = Failure::Core(Error::FitFailed {
            which: "alternative",
            source: Box::new(Error::NotConverged {
                max_iter: 10,
                final_step_norm: 1.0,
                tol: 1e-4,
            }),
        });
        let (kind, message, code) = wrapped.describe();
        assert_eq!((kind, code), ("NotConverged", 4));
        assert!(message.contains("alternative"));
    }

    #[test]
    fn the_command_tree_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
