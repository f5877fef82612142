//! Config-driven experiment runner.

pub mod config;
pub mod error;
mod experiments;
pub mod golden;
pub mod report;

pub use config::{Config, Params};
pub use error::{CliError, Result};
pub use experiments::{find, run, Experiment, EXPERIMENTS};
pub use golden::verify_golden;
pub use report::{Check, Outcome, RunReport, Table};

/// Process exit codes.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VERDICT_FAIL: i32 = 2;

pub const THREADS_ENV: &str = "KAUSAL_THREADS";

/// Worker count: `KAUSAL_THREADS` wins over the flag; `None` keeps rayon's default.
pub fn thread_count(flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>> {
    let from_env = match env.map(str::trim).filter(|s| !s.is_empty()) {
        Some(v) => Some(v.parse::<usize>().map_err(|_| CliError::InvalidConfig(format!("{THREADS_ENV}={v:?} is not a count")))?),
        None => None,
    };
    let n = from_env.or(flag);
    if n == Some(0) {
        return Err(CliError::InvalidConfig("thread count must be at least 1".into()));
    }
    Ok(n)
}
