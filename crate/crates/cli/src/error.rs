//! Process-level failure classification.
//!
//! Exit codes: 0 success, 1 unexpected error, 2 configuration error,
//! 3 trajectory blow-up, 4 a verification command's check failed.

use std::fmt;

#[derive(Debug)]
pub enum Failure {
    /// Unusable flags or config file; the message names the violated
    /// constraint.
    Config(String),
    /// The trajectory left the admissible ball.
    BlowUp { time: f64, norm2_sq: f64 },
    /// A `verify-*` command ran fine but its check did not pass.
    Check(String),
    /// Anything else (I/O, serialization).
    Other(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::BlowUp { .. } => 3,
            Failure::Check(_) => 4,
            Failure::Other(_) => 1,
        }
    }

    pub fn other(err: impl fmt::Display) -> Self {
        Failure::Other(err.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(msg) => write!(f, "config error: {msg}"),
            Failure::BlowUp { time, norm2_sq } => write!(
                f,
                "blow-up at t = {time}: |||u|||_2^2 = {norm2_sq} left the admissible ball"
            ),
            Failure::Check(msg) => write!(f, "check failed: {msg}"),
            Failure::Other(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}
