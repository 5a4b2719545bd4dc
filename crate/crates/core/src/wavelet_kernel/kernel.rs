//! Direct evaluation of the fractional wavelet kernel
//! `Ψ(t, θ) = (1/2π) ∫ e^{itξ} ψ̂(ξ) |ξ|^{-θ-1/2} dξ`.
//!
//! With `ψ̂(ξ) = e^{iξ/2} b(ξ)` the integral collapses to the real form
//! `(1/π) ∫_{2π/3}^{8π/3} cos((t + 1/2) ξ) b(ξ) ξ^{-θ-1/2} dξ`.

use std::f64::consts::PI;

use super::meyer::{meyer_amplitude, BAND_HI, BAND_KNOT, BAND_LO};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_segments, AdaptiveOptions, GaussLegendre};

pub const THETA_MIN: f64 = -2.0;
pub const THETA_MAX: f64 = 1.0;

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if theta > THETA_MIN && theta < THETA_MAX {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("kernel exponent {theta} outside ({THETA_MIN}, {THETA_MAX})")))
    }
}

pub fn psi_frac(t: f64, theta: f64) -> Result<f64> {
    psi_frac_with(t, theta, &AdaptiveOptions::default())
}

pub fn psi_frac_with(t: f64, theta: f64, opts: &AdaptiveOptions) -> Result<f64> {
    check_theta(theta)?;
    let shift = t + 0.5;
    let power = -theta - 0.5;
    let e = integrate_segments(
        |xi| (shift * xi).cos() * meyer_amplitude(xi) * xi.powf(power),
        &[BAND_LO, BAND_KNOT, BAND_HI],
        opts,
    )?;
    Ok(e.value / PI)
}

/// Dual kernel `Ψ(t, −θ−1)` for `θ ∈ (0, 1)`.
pub fn psi_dual(t: f64, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!("dual exponent {theta} outside (0, 1)")));
    }
    psi_frac(t, -theta - 1.0)
}

/// Composite Gauss–Legendre rule on the Meyer band, sized so that
/// `Ψ(t, θ)` is accurate for every `|t + 1/2|` up to a chosen bound.
///
/// Once built, evaluating at a new `θ` only rescales the weights.
#[derive(Debug, Clone)]
pub struct KernelRule {
    nodes: Vec<f64>,
    base_weights: Vec<f64>,
    panels: usize,
    error_estimate: f64,
}

const RULE_ORDER: usize = 16;
const MAX_PANELS: usize = 1 << 14;

impl KernelRule {
    fn with_panels(panels: usize) -> Self {
        let rule = GaussLegendre::new(RULE_ORDER);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        // panels are split in proportion to segment length (1 : 2)
        let first = panels.div_ceil(3).max(1);
        let second = (panels - first.min(panels)).max(1);
        rule.composite(BAND_LO, BAND_KNOT, first, &mut nodes, &mut weights);
        rule.composite(BAND_KNOT, BAND_HI, second, &mut nodes, &mut weights);
        let base_weights = nodes.iter().zip(&weights).map(|(&xi, &w)| w * meyer_amplitude(xi) / PI).collect();
        Self { nodes, base_weights, panels, error_estimate: f64::NAN }
    }

    /// Doubles the panel count until two successive rules agree to `tol` at
    /// the probe shifts `±t_abs_max` and the extreme exponents.
    pub fn for_range(t_abs_max: f64, thetas: &[f64], tol: f64) -> Result<Self> {
        let (th_lo, th_hi) = thetas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        for &th in [th_lo, th_hi].iter() {
            check_theta(th)?;
        }
        let probes_t = [-t_abs_max - 0.5, t_abs_max, 0.5 * t_abs_max, 0.0];
        let mut coarse = Self::with_panels(6);
        let mut panels = 12;
        loop {
            let fine = Self::with_panels(panels);
            let mut diff: f64 = 0.0;
            for &th in [th_lo, th_hi].iter() {
                let wc = coarse.weights_for(th);
                let wf = fine.weights_for(th);
                for &t in probes_t.iter() {
                    diff = diff.max((coarse.eval_with(&wc, t) - fine.eval_with(&wf, t)).abs());
                }
            }
            if diff <= tol {
                let mut fine = fine;
                fine.error_estimate = diff;
                return Ok(fine);
            }
            if panels >= MAX_PANELS {
                return Err(Error::QuadratureNonConvergence {
                    tolerance: tol,
                    budget: panels * RULE_ORDER,
                    estimate: diff,
                });
            }
            coarse = fine;
            panels *= 2;
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn error_estimate(&self) -> f64 {
        self.error_estimate
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights of the rule for a fixed exponent, `w_i b(ξ_i) ξ_i^{-θ-1/2} / π`.
    pub fn weights_for(&self, theta: f64) -> Vec<f64> {
        let power = -theta - 0.5;
        self.nodes.iter().zip(&self.base_weights).map(|(&xi, &w)| w * xi.powf(power)).collect()
    }

    pub fn eval_with(&self, weights: &[f64], t: f64) -> f64 {
        let shift = t + 0.5;
        self.nodes.iter().zip(weights).map(|(&xi, &w)| w * (shift * xi).cos()).sum()
    }

    pub fn eval(&self, t: f64, theta: f64) -> f64 {
        self.eval_with(&self.weights_for(theta), t)
    }
}
