//! Pointwise oscillations of sample paths, classification against the
//! slow, ordinary and rapid moduli, coefficient recovery through the dual
//! kernel, and the self-similarity and uniform-modulus scans.

mod lass;
mod moduli;
mod oscillation;
mod recovery;

pub use lass::{lass_check, lass_points, LassReport, LassScale, MIN_LASS_PATHS};
pub use moduli::{
    lil_constant_quadrature, lil_integral, uniform_modulus_scan, UNIFORM_SCAN_MAX_STEP, UNIFORM_SCAN_REACH,
};
pub use oscillation::{
    classify_point, estimate_exponent, modulus_ratios, nearest_index, oscillation, probe_design, Classification,
    ClassifyOptions, ExponentFit, ModulusKind, OscillationReport, PointClass, MIN_ANNULUS_POINTS, MIN_CLASSIFY_SCALES,
};
pub use recovery::{recover_coefficient, recover_coefficient_approx, Recovery};
