//! Command-line front end for `qfourier`.
//!
//! Subcommands: `transform`, `invert`, `collide`, `verify`, `delta`.
//! Exit codes: 0 success, 1 usage or configuration error, 2 partial
//! numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub use commands::{EXIT_OK, EXIT_PARTIAL, EXIT_USAGE};

/// Environment variable capping the worker-thread count.
pub const THREADS_VAR: &str = "QFT_THREADS";

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| format!("{THREADS_VAR} must be an integer >= 1 (got '{raw}')"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("cannot configure {n} threads: {e}"))
}

/// Parse `argv` (program name first), run the command, return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match config::merge_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    match commands::dispatch(&cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
