//! Synthesis of multifractional Brownian motion and related random wavelet
//! series from their Lemarié–Meyer expansions, with tools to measure
//! pointwise oscillations and locate slow, ordinary and rapid points.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coefficients;
pub mod error;
pub mod hurst;
pub mod numeric;
pub mod quadrature;
pub mod regularity;
pub mod simulate;
pub mod wavelet_kernel;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
