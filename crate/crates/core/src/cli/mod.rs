//! Command-line layer: configuration, batch commands, CSV/manifest output
//! and the minimal SVG plotting backend.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;
