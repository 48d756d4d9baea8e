//! Batch front end: manifests, input loaders, subcommand runners and presets.

pub mod inputs;
pub mod manifest;
pub mod run;
pub mod suite;

pub use manifest::{Command, Preset, RunManifest};
pub use run::{run, EXIT_BUDGET, EXIT_FAILED, EXIT_OK, EXIT_USAGE};
