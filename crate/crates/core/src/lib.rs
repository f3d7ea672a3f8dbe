//! Numerical laboratory for spherical averages, spherical maximal functions
//! and convolution operators acting on fractal measures.
//!
//! The crate is organized bottom up: [`measures`] builds atomic measures,
//! [`spectral`] computes their Fourier transforms on uniform grids,
//! [`operators`] applies convolution kernels through the frequency domain,
//! [`norms`] extracts empirical operator-norm lower bounds, [`exponents`]
//! evaluates the closed-form exponent thresholds, [`counterexamples`] runs the
//! extremal constructions and [`wave3d`] solves the 3D wave equation with
//! measure data.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counterexamples;
pub mod error;
pub mod exponents;
pub mod fit;
pub mod measures;
pub mod norms;
pub mod operators;
pub mod special;
pub mod spectral;
pub mod suite;
pub mod wave3d;

pub use error::{Error, Result};
pub use fit::FitReport;
pub use measures::DiscreteMeasure;
