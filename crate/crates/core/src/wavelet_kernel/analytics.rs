//! Numerical checks of the kernel's analytic properties: decay envelope,
//! vanishing dual moment and biorthogonality of the primal/dual families.

use rayon::prelude::*;
use serde::Serialize;

use super::kernel::{check_theta, KernelRule};
use super::table::KernelTable;
use crate::error::{Error, Result};

/// Sampling step in t for envelope scans; Ψ is band-limited to |ξ| ≤ 8π/3,
/// so 1/16 resolves every oscillation.
const ENVELOPE_STEP: f64 = 1.0 / 16.0;
const FD_STEP: f64 = 1.0 / 256.0;

/// `sup (3 + |t|)^L |D_t^m Ψ(t, θ)|` over `θ ∈ thetas`, `t ∈ t_window`,
/// by direct quadrature on a sampling grid. The derivative (m = 1) is a
/// central difference with step 2⁻⁸.
pub fn fast_decay_envelope(order: u32, derivative: u8, thetas: (f64, f64), t_window: (f64, f64)) -> Result<f64> {
    if derivative > 1 {
        return Err(Error::InvalidParameter(format!("derivative order {derivative} not in {{0, 1}}")));
    }
    if thetas.0 > thetas.1 || t_window.0 > t_window.1 {
        return Err(Error::InvalidParameter("empty envelope window".into()));
    }
    check_theta(thetas.0)?;
    check_theta(thetas.1)?;
    let theta_samples: Vec<f64> = if thetas.0 == thetas.1 {
        vec![thetas.0]
    } else {
        (0..5).map(|i| thetas.0 + (thetas.1 - thetas.0) * i as f64 / 4.0).collect()
    };
    let t_abs = t_window.0.abs().max(t_window.1.abs()) + 1.0;
    let rule = KernelRule::for_range(t_abs, &theta_samples, 1e-12)?;
    let ts: Vec<f64> = if t_window.0 == t_window.1 {
        vec![t_window.0]
    } else {
        let n = ((t_window.1 - t_window.0) / ENVELOPE_STEP).ceil() as usize;
        (0..=n).map(|i| (t_window.0 + i as f64 * ENVELOPE_STEP).min(t_window.1)).collect()
    };
    let worst = theta_samples
        .par_iter()
        .map(|&th| {
            let w = rule.weights_for(th);
            ts.iter()
                .map(|&t| {
                    let v = if derivative == 0 {
                        rule.eval_with(&w, t)
                    } else {
                        (rule.eval_with(&w, t + FD_STEP) - rule.eval_with(&w, t - FD_STEP)) / (2.0 * FD_STEP)
                    };
                    (3.0 + t.abs()).powi(order as i32) * v.abs()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// `∫_{-T}^{T} Ψ(y, −θ−1) dy` by the trapezoid rule with step 1/4.
///
/// The dual kernel is band-limited to |ξ| ≤ 8π/3 < 2π·4, so the trapezoid
/// sum over the whole line has no aliasing error; only truncation remains.
pub fn dual_moment(theta: f64, half_width: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!("dual exponent {theta} outside (0, 1)")));
    }
    trapezoid_line(-theta - 1.0, half_width, 0)
}

/// `∫ Ψ(y, θ)^p dy` for p ∈ {0: plain integral, 1: squared}, trapezoid rule.
pub(crate) fn trapezoid_line(theta: f64, half_width: f64, squared: u8) -> Result<f64> {
    let h = 0.25;
    let rule = KernelRule::for_range(half_width + 1.0, &[theta], 1e-13)?;
    let w = rule.weights_for(theta);
    let n = (half_width / h).round() as i64;
    let vals: Vec<f64> = (-n..=n)
        .into_par_iter()
        .map(|i| {
            let v = rule.eval_with(&w, i as f64 * h);
            if squared == 1 {
                v * v
            } else {
                v
            }
        })
        .collect();
    Ok(h * crate::numeric::pairwise_sum(&vals))
}

/// Index of one function in a biorthogonality check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WaveletIndex {
    pub j: i32,
    pub k: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GramReport {
    pub theta: f64,
    pub indices: Vec<WaveletIndex>,
    /// Row-major, `entries[r * n + c] = ⟨primal_r, dual_c⟩`.
    pub entries: Vec<f64>,
    pub tail_estimate: f64,
    pub truncation_warning: bool,
}

impl GramReport {
    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.indices.len() + c]
    }

    pub fn max_deviation_from_identity(&self) -> f64 {
        let n = self.size();
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((self.entry(r, c) - target).abs());
            }
        }
        worst
    }
}

/// Inner products `⟨2^{j/2} Ψ(2^j · − k, θ), 2^{j'/2} Ψ(2^{j'} · − k', −θ−1)⟩`
/// for all `(j, k)`, `(j', k')` in the given ranges.
///
/// Each product is integrated by the trapezoid rule over
/// `|u − c| ≤ 64 · 2^{−min(j, j')}` (c the coarser function's centre) with a
/// step that keeps the product's band below the Nyquist limit and, when
/// possible, lands every argument on a table node.
pub fn biorthogonality_gram(
    table: &KernelTable,
    j_range: (i32, i32),
    k_range: (i64, i64),
    theta: f64,
    tolerance: f64,
) -> Result<GramReport> {
    if j_range.0 > j_range.1 || k_range.0 > k_range.1 {
        return Err(Error::InvalidParameter("empty index range".into()));
    }
    let dual_theta = -theta - 1.0;
    table.require_theta("primal exponent", theta, theta)?;
    table.require_theta("dual exponent", dual_theta, dual_theta)?;
    let primal = table.row(theta).expect("checked");
    let dual = table.row(dual_theta).expect("checked");

    let indices: Vec<WaveletIndex> =
        (j_range.0..=j_range.1).flat_map(|j| (k_range.0..=k_range.1).map(move |k| WaveletIndex { j, k })).collect();
    let n = indices.len();
    let band = super::meyer::BAND_HI;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).collect();
    let entries: Vec<f64> = pairs
        .par_iter()
        .map(|&(r, c)| {
            let a = indices[r];
            let b = indices[c];
            let jm = a.j.min(b.j);
            let scale_m = 2f64.powi(jm);
            let mut h = table.dt / scale_m;
            let nyquist = |h: f64| 2.0 * std::f64::consts::PI / h > band * (2f64.powi(a.j) + 2f64.powi(b.j));
            while !nyquist(h) {
                h *= 0.5;
            }
            let coarse = if a.j <= b.j { a } else { b };
            let center = coarse.k as f64 / 2f64.powi(coarse.j);
            let radius = 64.0 / scale_m;
            let steps = (radius / h).round() as i64;
            let (sa, sb) = (2f64.powi(a.j), 2f64.powi(b.j));
            let base = (center / h).round() * h;
            let mut acc = Vec::with_capacity((2 * steps + 1) as usize);
            for i in -steps..=steps {
                let u = base + i as f64 * h;
                let pa = table.eval_row(&primal, sa * u - a.k as f64);
                let pb = table.eval_row(&dual, sb * u - b.k as f64);
                if let (Some(x), Some(y)) = (pa, pb) {
                    acc.push(x * y);
                }
            }
            (sa * sb).sqrt() * h * crate::numeric::pairwise_sum(&acc)
        })
        .collect();

    // Tail beyond the window: both factors obey the L = 4 envelope, and at
    // distance 64 (in the coarse function's units) the product is bounded by
    // the envelopes times the integrable (3 + y)^{-8} tail.
    let envelope = table.decay_envelope(4, 0);
    let scale_factor = 2f64.powf(0.5 * (j_range.1 - j_range.0) as f64);
    let tail_estimate = scale_factor * envelope * envelope * 2.0 * (3.0f64 + 64.0).powi(-7) / 7.0;
    Ok(GramReport { theta, indices, entries, tail_estimate, truncation_warning: tail_estimate > tolerance })
}
