//! Phantoms, deterministic noise, the Euclidean-sinogram bridge and the
//! experiment runner behind the `tomo` binary.

// `!(x > 0.0)` style guards are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bridge;
pub mod error;
pub mod experiment;
pub mod noise;
pub mod phantom;
pub mod pgm;
pub mod seed;
pub mod selftest;

pub use error::{CliError, CliResult};
