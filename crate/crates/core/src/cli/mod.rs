//! Configuration, argument parsing and file emission for the `sibi` binary.

mod args;
mod commands;
mod config;

pub use args::{Cli, Command};
pub use commands::{cmd_decay, cmd_endor, cmd_fit_spectrum, cmd_lattice, cmd_owp, cmd_sweep, run, OwpFile};
pub use config::{RunConfig, MAX_FIELD, MIN_SIDE, OUT_DIR_ENV};
