//! Command implementations behind the `coinflow` binary: configuration
//! resolution, the simulate/exact/limits pipelines, and the validation
//! suite. Kept in a library so integration tests drive the same code
//! paths as the executable.

pub mod commands;
pub mod config;
pub mod validate;
