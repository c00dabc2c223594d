//! Driver layer behind the `cpdr` binary. Each subcommand is an ordinary
//! function taking a parsed config, so the acceptance tests can call the
//! drivers in-process instead of shelling out.

use std::fmt;

pub mod bounds;
pub mod config;
pub mod ising_mse;
pub mod mitigate_csv;
pub mod seed;
pub mod spd_bench;

/// Failure classes with distinct exit codes: bad inputs are the caller's
/// problem (2), a violated bound is ours (3).
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Assertion(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Assertion(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(msg) => write!(f, "invalid input: {msg}"),
            Failure::Assertion(msg) => write!(f, "assertion failed: {msg}"),
        }
    }
}

impl std::error::Error for Failure {}

pub(crate) fn validation(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

pub(crate) fn assertion(msg: impl Into<String>) -> Failure {
    Failure::Assertion(msg.into())
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(format!("io error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Validation(format!("csv error: {e}"))
    }
}
