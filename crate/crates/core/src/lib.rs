//! Behavioral simulator and range encoder for universal FeFET content-addressable memory.
//!
//! - [`device`]: multilevel FeFET programming and drain current
//! - [`cell`]: two-FeFET analog/digital CAM cell
//! - [`array`]: match-line transient search and row writes
//! - [`encoder`]: integer ranges to ternary and multi-bit CAM tables
//! - [`cost`]: calibrated area and search-energy comparison
//! - [`config`]: the global calibration file

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod cell;
pub mod config;
pub mod cost;
pub mod device;
pub mod encoder;
pub mod error;

pub use error::{FecamError, Result};
