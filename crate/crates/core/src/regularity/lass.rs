use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::linear_fit;

/// Fewest Monte Carlo paths accepted.
pub const MIN_LASS_PATHS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassScale {
    pub rho: f64,
    /// `E[((X(t+ρs) − X(t))/ρ^{h})²]` for each `s` of the grid.
    pub variances: Vec<f64>,
    /// Slope of `log variance` against `log |s|`; NaN when degenerate.
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassReport {
    pub t: f64,
    pub h: f64,
    pub s_grid: Vec<f64>,
    pub n_paths: usize,
    pub scales: Vec<LassScale>,
    /// Exponent at the smallest `ρ` minus the exponent at the largest.
    pub drift: f64,
    /// Every variance vanished.
    pub degenerate: bool,
}

impl LassReport {
    /// Exponent at the smallest `ρ`.
    pub fn final_exponent(&self) -> f64 {
        self.scales.last().map_or(f64::NAN, |s| s.exponent)
    }
}

/// Sample locations needed for one path: `t` followed by `t + ρs` in
/// `ρ`-major order.
pub fn lass_points(t: f64, rhos: &[f64], s_grid: &[f64]) -> Vec<f64> {
    let mut pts = Vec::with_capacity(1 + rhos.len() * s_grid.len());
    pts.push(t);
    for &rho in rhos {
        pts.extend(s_grid.iter().map(|&s| t + rho * s));
    }
    pts
}

/// Local asymptotic self-similarity check at `t`.
///
/// `sample(i, points)` returns path `i` at `points` (laid out as by
/// [`lass_points`]); paths are drawn in parallel and reduced in index order.
/// `h` is `H(t)`, used only for the rescaling.
pub fn lass_check<S>(sample: S, t: f64, h: f64, rhos: &[f64], s_grid: &[f64], n_paths: usize) -> Result<LassReport>
where
    S: Fn(usize, &[f64]) -> Result<Vec<f64>> + Sync,
{
    if n_paths < MIN_LASS_PATHS {
        return Err(Error::InvalidParameter(format!("{n_paths} paths, need at least {MIN_LASS_PATHS}")));
    }
    if rhos.is_empty() || rhos.windows(2).any(|w| !(w[1] < w[0])) || rhos.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidParameter("ρ list must be positive and strictly decreasing".into()));
    }
    if s_grid.len() < 2 || s_grid.iter().any(|&s| s == 0.0 || !s.is_finite()) {
        return Err(Error::InvalidParameter("s grid needs at least two finite non-zero entries".into()));
    }
    let pts = lass_points(t, rhos, s_grid);
    let m = s_grid.len();
    let squares: Vec<Vec<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let x = sample(i, &pts)?;
            if x.len() != pts.len() {
                return Err(Error::InvalidParameter(format!(
                    "sampler returned {} values for {} points",
                    x.len(),
                    pts.len()
                )));
            }
            Ok(rhos
                .iter()
                .enumerate()
                .flat_map(|(r, &rho)| {
                    let norm = rho.powf(-h);
                    let x = &x;
                    (0..m).map(move |q| ((x[1 + r * m + q] - x[0]) * norm).powi(2))
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let log_s: Vec<f64> = s_grid.iter().map(|s| s.abs().ln()).collect();
    let scales: Vec<LassScale> = rhos
        .iter()
        .enumerate()
        .map(|(r, &rho)| {
            let variances: Vec<f64> =
                (0..m).map(|q| squares.iter().map(|v| v[r * m + q]).sum::<f64>() / n_paths as f64).collect();
            let exponent = if variances.iter().all(|&v| v > 0.0) {
                let y: Vec<f64> = variances.iter().map(|v| v.ln()).collect();
                linear_fit(&log_s, &y).map_or(f64::NAN, |(s, _)| s)
            } else {
                f64::NAN
            };
            LassScale { rho, variances, exponent }
        })
        .collect();
    let degenerate = scales.iter().all(|s| s.variances.iter().all(|&v| v == 0.0));
    let drift = scales[scales.len() - 1].exponent - scales[0].exponent;
    Ok(LassReport { t, h, s_grid: s_grid.to_vec(), n_paths, scales, drift, degenerate })
}
