use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hurst::HurstSpec;
use crate::quadrature::{integrate_adaptive, integrate_segments, AdaptiveOptions};
use crate::simulate::PathData;

/// Largest separation examined by the uniform-modulus scan.
pub const UNIFORM_SCAN_REACH: f64 = 1.0 / 16.0;

/// Coarsest grid step the scan accepts.
pub const UNIFORM_SCAN_MAX_STEP: f64 = 1.0 / 1024.0;

/// `max |X(s) − X(t)| / (|s−t|^{h_D} √log(1/|s−t|))` over grid pairs in `D`
/// at distance at most 1/16, with `h_D` the least grid value of `H` on `D`.
pub fn uniform_modulus_scan(path: &PathData, domain: (f64, f64), hurst: &HurstSpec) -> Result<f64> {
    let (lo, hi) = domain;
    let a = path.t.partition_point(|&s| s < lo);
    let b = path.t.partition_point(|&s| s <= hi);
    if !(lo < hi) || b - a < 2 || lo < path.t[0] || hi > path.t[path.t.len() - 1] {
        return Err(Error::InvalidParameter(format!("domain [{lo}, {hi}] is not inside the path grid")));
    }
    let ts = &path.t[a..b];
    let xs = &path.x[a..b];
    let step = ts.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if step > UNIFORM_SCAN_MAX_STEP * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("grid step {step:e} above 2^-10")));
    }
    let h = ts.iter().map(|&s| hurst.eval(s)).fold(f64::INFINITY, f64::min);
    let mut best: f64 = 0.0;
    for i in 0..ts.len() {
        for q in i + 1..ts.len() {
            let d = ts[q] - ts[i];
            if d > UNIFORM_SCAN_REACH * (1.0 + 1e-12) {
                break;
            }
            let r = (xs[q] - xs[i]).abs() / (d.powf(h) * (1.0 / d).ln().sqrt());
            best = best.max(r);
        }
    }
    Ok(best)
}

/// Upper limit of the oscillatory part; a multiple of π so the tail
/// expansion starts at a zero of `sin 2u`.
const LIL_CUTOFF: f64 = 512.0 * PI;

/// `∫₀^∞ sin²u / u^{1+2h} du`.
///
/// Near 0 the substitution `u = w^{1/(1−h)}` removes the `u^{1−2h}`
/// singularity; `[1, X]` is split at multiples of π; the remainder is
/// `X^{−2h}/(4h) − (1+2h)X^{−2−2h}/8` from two integrations by parts.
pub fn lil_integral(h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidParameter(format!("exponent {h} outside (0, 1)")));
    }
    let opts = AdaptiveOptions { abs_tol: 1e-12, ..AdaptiveOptions::default() };
    let p = 1.0 / (1.0 - h);
    let head = integrate_adaptive(
        |w: f64| {
            if w == 0.0 {
                return 0.0;
            }
            let u = w.powf(p);
            p * u.sin().powi(2) * w.powf(p - 1.0) / u.powf(1.0 + 2.0 * h)
        },
        0.0,
        1.0,
        &opts,
    )?;
    let mut breaks = vec![1.0];
    breaks.extend((1..=512).map(|i| i as f64 * PI));
    let body = integrate_segments(|u: f64| u.sin().powi(2) / u.powf(1.0 + 2.0 * h), &breaks, &opts)?;
    let x = LIL_CUTOFF;
    let tail = x.powf(-2.0 * h) / (4.0 * h) - (1.0 + 2.0 * h) * x.powf(-2.0 - 2.0 * h) / 8.0;
    Ok(head.value + body.value + tail)
}

/// `C(t) = √(∫_ℝ (1 − cos²(xt)) / |x|^{1+2h} dx) = √(2|t|^{2h} I(h))`.
pub fn lil_constant_quadrature(t: f64, h: f64) -> Result<f64> {
    let i = lil_integral(h)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 * t.abs().powf(2.0 * h) * i).sqrt())
}
