//! Exit-code contract: 2 bad input, 3 degenerate data, 4 non-convergence,
//! 5 failed self-check.

use std::fmt;
use std::process::ExitCode;

use censreg::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    Input = 2,
    Data = 3,
    Convergence = 4,
    Check = 5,
}

#[derive(Debug)]
pub struct CliError {
    pub code: Code,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: Code::Input,
            message: message.into(),
        }
    }

    pub fn convergence(message: impl Into<String>) -> Self {
        CliError {
            code: Code::Convergence,
            message: message.into(),
        }
    }

    pub fn check(message: impl Into<String>) -> Self {
        CliError {
            code: Code::Check,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code as u8)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DegenerateData(_)
            | Error::ZeroVariance { .. }
            | Error::Stratification { .. } => Code::Data,
            Error::InvalidArgument(_) | Error::ShapeMismatch(_) | Error::ModelFile(_) => {
                Code::Input
            }
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}
