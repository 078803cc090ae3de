//! Batch driver for the tautrec pipeline: one job per invocation, with
//! validated configuration, a result cache and resumable derivations.

pub mod commands;
pub mod config;
pub mod error;
pub mod render;
pub mod store;

pub use commands::{execute, Outcome};
pub use config::{Command, DeltaSwitch, JobConfig, KappaSwitch};
pub use error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable naming the default cache directory.
pub const CACHE_ENV: &str = "TAUTREC_CACHE_DIR";

/// Runs `c` on a pool of `c.threads` threads (the global pool if unset).
pub fn run(c: &JobConfig) -> Result<Outcome> {
    match c.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Inconsistent(format!("thread pool: {e}")))?
            .install(|| execute(c)),
        None => execute(c),
    }
}
