//! Spectral tomography on flat tori.
//!
//! The periodic X-ray transform on `T^2` and the d-plane Radon transform on
//! `T^n` act diagonally on Fourier coefficients: the slice over a rational
//! subspace `A` keeps exactly the coefficients `f̂(k)` with `k ⊥ A`. This crate
//! builds on that identity:
//!
//! - [`lattice`]: primitive directions, canonical rational subspaces
//!   (saturated Hermite normal form), the sets `Ω_k` and direction covers.
//! - [`field`]: band-limited fields, sinograms, weights and every norm used
//!   on either side of the transform.
//! - [`xray`]: forward transforms as Fourier multipliers plus a spatial
//!   quadrature oracle.
//! - [`inversion`]: slice-integral reconstruction, adjoint/normal operators,
//!   filtered and normalized inversion and the filter-free summation formula.
//! - [`regularize`]: Tikhonov post-processing, parameter schedules and the
//!   convergence-rate bound.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the common `f64` instantiation.

// `!(x > 0.0)` style guards are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fft;
pub mod field;
pub mod inversion;
pub mod lattice;
pub mod regularize;
pub mod scalar;
pub mod xray;

pub use error::{Error, Result};
pub use field::{LpExponent, RawSinogram, TorusField, TorusSinogram, WeightKind, WeightRule};
pub use lattice::{FrequencyIndex, PrimitiveDirection, RationalSubspace, SubspaceFamily};
pub use scalar::Real;

pub type Complex<T> = num_complex::Complex<T>;

pub type TorusField64 = TorusField<f64>;
pub type TorusField32 = TorusField<f32>;
pub type TorusSinogram64 = TorusSinogram<f64>;
pub type TorusSinogram32 = TorusSinogram<f32>;
pub type RawSinogram64 = RawSinogram<f64>;
pub type WeightRule64 = WeightRule<f64>;
pub type WeightRule32 = WeightRule<f32>;
pub type Complex64 = num_complex::Complex<f64>;
