//! Command-line front end and experiment harness for `streamvote-core`.

pub mod cli;
pub mod experiment;

pub use cli::main_with_args;
