//! File formats, the experiment runner and the `sampler` command line on top
//! of `latentmc-core`.

pub mod check;
pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod model_io;
pub mod trace_io;

pub use error::{Error, Result};
