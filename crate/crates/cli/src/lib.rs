//! The `mmg` command-line tool as a library, so commands can be driven from
//! tests without spawning processes.

pub mod args;
mod commands;
mod error;
pub mod reports;

pub use commands::{
    cmd_compare_modes, cmd_eval, cmd_gen_data, cmd_train, cmd_tune, load_policy, resolve_hyperparams,
    run, train_objective,
};
pub use error::CliError;
