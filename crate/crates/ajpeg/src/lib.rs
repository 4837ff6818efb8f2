//! Adaptive JPEG-style codec: image files, metrics, the synthetic corpus,
//! benchmark and analysis drivers behind the `ajpeg` command line tool.
//!
//! The algorithms live in [`ajpeg_core`]; this crate adds IO and rayon
//! parallelism. `AJPEG_THREADS` caps the worker count.

pub mod analyze;
pub mod bench;
pub mod corpus;
pub mod error;
pub mod io;
pub mod metrics;
pub mod parallel;

pub use error::{AppError, Result};
