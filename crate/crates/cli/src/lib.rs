//! Configuration, presets and command execution behind the `rydberg` binary.

pub mod commands;
pub mod config;
pub mod presets;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
