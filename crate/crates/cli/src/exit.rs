//! Exit statuses and the mapping from library errors onto them.

use cf_interp::format::FormatError;
use cf_interp::Error;

/// Unreadable or malformed input file.
pub const PARSE: u8 = 2;
/// Data is not positive, or not factorable.
pub const INFEASIBLE: u8 = 3;
/// Point outside the evaluation disk.
pub const DOMAIN: u8 = 4;
/// A numerical check failed inside the pipeline.
pub const TOLERANCE: u8 = 5;
pub const USAGE: u8 = 64;
pub const IO: u8 = 74;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible { .. }
            | Error::NegativeEigenvalue { .. }
            | Error::RangeCompatibility { .. } => INFEASIBLE,
            Error::Domain { .. } => DOMAIN,
            Error::Conditioning { .. }
            | Error::Tolerance(_)
            | Error::InconsistentFactorization { .. }
            | Error::SingularBlock { .. }
            | Error::Realization(_) => TOLERANCE,
            Error::Dimension(_)
            | Error::Contract(_)
            | Error::InsufficientCoefficients { .. }
            | Error::OutOfBall { .. } => PARSE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        let code = match e {
            FormatError::NonFinite(_) => TOLERANCE,
            _ => PARSE,
        };
        Failure::new(code, e.to_string())
    }
}
