//! `sandwichpost fit` and `sandwichpost study`.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 usage or input parse
//! error, 3 singular design, 4 a study replicate failed.

mod args;
mod fit;
mod input;
mod study;

use std::fs;
use std::process::ExitCode;

use clap::Parser;

use sandwichpost::Error;

use args::{Args, Command};

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Replicate { .. } => 4,
            Error::SingularDesign { .. } => 3,
            Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn write_output(args: &Args, text: &str) -> Result<(), CliError> {
    match &args.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(args: &Args) -> Result<(), CliError> {
    args.validate()?;
    match args.command()? {
        Command::Fit => {
            let text = fit::run(args)?;
            write_output(args, &text)
        }
        Command::Study => {
            let out = study::run(args)?;
            print!("{}", out.stdout);
            match out.file {
                Some(text) => write_output(args, &text),
                None => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
