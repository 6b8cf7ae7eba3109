//! Chart-local computational toolkit for vielbein gravity: jet arithmetic,
//! signature-adapted linear algebra, frame and metric calculus, the reduction
//! map from frame data to metric data and its reconstruction inverse, with
//! residual verification of the vacuum field equations on both sides.
//!
//! Start with the runnable programs under `examples/`; each one demonstrates
//! a single capability end to end. The thin `palatini-routh` binary drives
//! the same library functions from the command line.

pub mod cli;
pub mod connections;
pub mod error;
pub mod etalinalg;
pub mod fixtures;
pub mod framebundle;
pub mod lagrangians;
pub mod numkit;
pub mod reconstruction;
pub mod reduction;

pub use error::{Error, Result};
