//! Library side of the `selrisk` command: configuration, subcommands and the
//! pinned example reproductions.

pub mod commands;
pub mod config;
pub mod output;
pub mod repro;

use selrisk_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ACCEPTANCE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PATHOLOGY: i32 = 3;

/// Exit code for a failed run.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::WholePlane(_) => EXIT_PATHOLOGY,
        _ => EXIT_CONFIG,
    }
}

/// Sizes the global thread pool from `SELRISK_THREADS` if set.
pub fn init_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("SELRISK_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("SELRISK_THREADS=`{v}` is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))
}
