//! Artifact formats, run manifests, the experiment pipeline, SVG plots and
//! the `metamat` command line, on top of `metamat-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod pipeline;
pub mod plot;

pub use error::{PipelineError, Result};
pub use metamat_core as core;
