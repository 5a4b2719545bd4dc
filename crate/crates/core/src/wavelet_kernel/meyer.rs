use std::f64::consts::PI;

/// Lower edge of the Meyer frequency band, 2π/3.
pub const BAND_LO: f64 = 2.0 * PI / 3.0;
/// Junction between the rising and falling halves, 4π/3, where the amplitude is 1.
pub const BAND_KNOT: f64 = 4.0 * PI / 3.0;
/// Upper edge of the band, 8π/3.
pub const BAND_HI: f64 = 8.0 * PI / 3.0;

/// Lemarié–Meyer profile with the quartic auxiliary polynomial
/// `ν(x) = x⁴(35 − 84x + 70x² − 20x³)`.
///
/// The Fourier transform of the mother wavelet is `ψ̂(ξ) = e^{iξ/2} b(ξ)`
/// with `b` real and even, which makes every kernel built from it real.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MeyerProfile;

impl MeyerProfile {
    pub const ID: &'static str = "meyer-quartic-v1";
    pub const POLYNOMIAL_DEGREE: u32 = 7;

    pub fn support(&self) -> (f64, f64) {
        (BAND_LO, BAND_HI)
    }

    /// Breakpoints of the positive band; `b` is a polynomial composition on each piece.
    pub fn breakpoints(&self) -> [f64; 3] {
        [BAND_LO, BAND_KNOT, BAND_HI]
    }

    pub fn amplitude(&self, xi: f64) -> f64 {
        meyer_amplitude(xi)
    }
}

fn nu(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x.powi(4) * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x * x * x)
    }
}

/// Real even amplitude `b(ξ) = |ψ̂(ξ)|` of the Meyer wavelet.
pub fn meyer_amplitude(xi: f64) -> f64 {
    let a = xi.abs();
    if a <= BAND_LO || a >= BAND_HI {
        0.0
    } else if a <= BAND_KNOT {
        (0.5 * PI * nu(3.0 * a / (2.0 * PI) - 1.0)).sin()
    } else {
        (0.5 * PI * nu(3.0 * a / (4.0 * PI) - 1.0)).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn partition(xi: f64) -> f64 {
        (-20..=20).map(|j| meyer_amplitude(2f64.powi(j) * xi).powi(2)).sum()
    }

    #[test]
    fn vanishes_near_zero_and_outside_band() {
        assert_eq!(meyer_amplitude(0.0), 0.0);
        assert_eq!(meyer_amplitude(BAND_LO), 0.0);
        assert_eq!(meyer_amplitude(9.0), 0.0);
        assert_eq!(meyer_amplitude(-0.5), 0.0);
    }

    #[test]
    fn peak_and_midband_values() {
        assert!((meyer_amplitude(BAND_KNOT) - 1.0).abs() < 1e-15);
        // At ξ = π the quartic profile sits at ν(1/2) = 1/2, so b = sin(π/4),
        // and the partner 2π carries the other half of the energy.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((meyer_amplitude(PI) - s).abs() < 1e-15);
        assert!((meyer_amplitude(2.0 * PI) - s).abs() < 1e-15);
        assert!((partition(PI) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn even_and_bounded() {
        for i in 0..500 {
            let xi = 0.02 * i as f64;
            let b = meyer_amplitude(xi);
            assert_eq!(b, meyer_amplitude(-xi));
            assert!((0.0..=1.0).contains(&b));
        }
    }

    #[test]
    fn partition_of_unity_on_grid() {
        for i in 0..200 {
            let xi = 0.1 + (50.0 - 0.1) * i as f64 / 199.0;
            assert!((partition(xi) - 1.0).abs() < 1e-10, "xi={xi}");
        }
    }
}
