//! Library half of the `bandgap` command-line tool: experiment configuration
//! parsing/validation and the experiment runners that tie the core modules
//! together and emit CSV/JSON artifacts.
//!
//! The binary in `main.rs` is a thin argument-parsing wrapper around
//! [`config::parse_config`] and [`experiments::run`].

pub mod config;
pub mod experiments;
