//! Command-line front end: config schemas, subcommands and run manifests.

pub mod commands;
pub mod config;
pub mod manifest;

pub use manifest::RunManifest;
