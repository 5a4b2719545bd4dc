//! The Lemarié–Meyer wavelet and its fractional kernel `Ψ(t, θ)`.

mod analytics;
mod kernel;
mod meyer;
mod table;

#[cfg(test)]
pub(crate) use analytics::trapezoid_line;
pub use analytics::{biorthogonality_gram, dual_moment, fast_decay_envelope, GramReport, WaveletIndex};
pub use kernel::{psi_dual, psi_frac, psi_frac_with, KernelRule, THETA_MAX, THETA_MIN};
pub use meyer::{meyer_amplitude, MeyerProfile, BAND_HI, BAND_KNOT, BAND_LO};
pub(crate) use table::interp_lagrange;
pub use table::{KernelTable, RowRef, Stencil, TableSpec, TABLE_FORMAT_VERSION};
