//! Library half of the `frontal-forge` command line tool: scene loading
//! and subcommand dispatch.

pub mod commands;
pub mod scene;

pub use commands::{dispatch, error_code, save_report, Cli, Command, Report, Status, UsageError};
pub use scene::{load_scene, parse_scene, resolve_germ, Scene};
