use serde::{Deserialize, Serialize};

use crate::coefficients::k_index;
use crate::error::{Error, Result};
use crate::hurst::HurstSpec;
use crate::simulate::PathData;
use crate::wavelet_kernel::KernelTable;

/// Decay order of the envelope bounding the part of the dual kernel that
/// falls outside the path.
const TAIL_ORDER: u32 = 4;

/// Half-width in kernel units of the window over which the exponent spread
/// is reported in approximate mode.
const SPREAD_RADIUS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    /// Estimate of `2^{−jθ} ε_{j,k}`.
    pub value: f64,
    pub j: i32,
    pub k: i64,
    pub theta: f64,
    /// `sup |B − B(k2^{−j})|` times the dual kernel mass outside the path.
    pub tail_estimate: f64,
    /// `|T_δ − T_{2δ}|/3` for the trapezoid sums at the path step and twice it.
    pub quadrature_error: f64,
    /// Set when the path was not synthesized at a single frozen exponent.
    pub approximate: bool,
    /// Approximate mode: `max |H(u) − H(t)|` where the dual kernel is
    /// concentrated; zero otherwise.
    pub theta_spread: f64,
}

/// `2^j ∫ B(u) Ψ(2^j u − k_j(t), −θ−1) du` from samples of `B(·, θ)`.
///
/// The table must hold the dual exponent `−θ−1`. The path's value nearest
/// `k 2^{−j}` is subtracted first; the dual kernel integrates constants to
/// zero, so this only shrinks the truncation error.
pub fn recover_coefficient(
    path: &PathData,
    table: &KernelTable,
    j: i32,
    t: f64,
    theta: f64,
    quad_tolerance: f64,
) -> Result<Recovery> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!("frozen exponent {theta} outside (0, 1)")));
    }
    if !(quad_tolerance > 0.0) {
        return Err(Error::InvalidParameter("quadrature tolerance must be positive".into()));
    }
    if path.t.len() < 3 {
        return Err(Error::InvalidParameter("recovery needs at least three samples".into()));
    }
    let dual = -theta - 1.0;
    let row = table.row(dual).ok_or(Error::TableCoverage {
        what: "dual exponent",
        lo: dual,
        hi: dual,
        table_lo: table.theta_range().0,
        table_hi: table.theta_range().1,
    })?;
    let k = k_index(t, j);
    let scale = (j as f64).exp2();
    let centre = k as f64 / scale;
    let c = super::oscillation::nearest_index(path, centre);
    let offset = path.x[c];

    let integrand: Vec<f64> = path
        .t
        .iter()
        .zip(&path.x)
        .map(|(&u, &x)| table.eval_row(&row, scale * u - k as f64).map_or(0.0, |psi| (x - offset) * psi))
        .collect();
    let fine = trapezoid(&path.t, &integrand, 1);
    let coarse = trapezoid(&path.t, &integrand, 2);

    // Mass of |Ψ(·, −θ−1)| where the path has no samples: tabulated nodes
    // beyond the path ends, then an envelope bound past the table.
    let (first, last) = (path.t[0], path.t[path.t.len() - 1]);
    let (y_lo, y_hi) = (scale * first - k as f64, scale * last - k as f64);
    let mut mass = 0.0;
    let mut env: f64 = 0.0;
    for i in 0..table.n_t {
        let y = table.t_node(i);
        let v = table.eval_row(&row, y).unwrap_or(0.0).abs();
        if y < y_lo || y > y_hi {
            mass += v * table.dt;
        }
        env = env.max((3.0 + y.abs()).powi(TAIL_ORDER as i32) * v);
    }
    let (t_lo, t_hi) = table.t_range();
    let beyond = |edge: f64| env * (3.0 + edge.abs()).powi(1 - TAIL_ORDER as i32) / (TAIL_ORDER - 1) as f64;
    mass += beyond(t_lo) + beyond(t_hi);
    let sup = path.x.iter().fold(0.0f64, |m, &x| m.max((x - offset).abs()));
    let tail = sup * mass;
    if tail > quad_tolerance {
        return Err(Error::WindowTooSmall { tail, tolerance: quad_tolerance });
    }
    Ok(Recovery {
        value: scale * fine,
        j,
        k,
        theta,
        tail_estimate: tail,
        quadrature_error: scale * (fine - coarse).abs() / 3.0,
        approximate: false,
        theta_spread: 0.0,
    })
}

/// Recovery from a path of `B_H` with `θ = H(t)`. The estimate carries the
/// error from the variation of `H` across the kernel's support, reported as
/// `theta_spread` and not bounded.
pub fn recover_coefficient_approx(
    path: &PathData,
    table: &KernelTable,
    hurst: &HurstSpec,
    j: i32,
    t: f64,
    quad_tolerance: f64,
) -> Result<Recovery> {
    let theta = hurst.eval(t);
    let mut r = recover_coefficient(path, table, j, t, theta, quad_tolerance)?;
    let scale = (j as f64).exp2();
    let lo = (r.k as f64 - SPREAD_RADIUS) / scale;
    let hi = (r.k as f64 + SPREAD_RADIUS) / scale;
    let (h_lo, h_hi) = hurst.range_on(lo, hi, 257);
    r.approximate = true;
    r.theta_spread = (h_hi - theta).max(theta - h_lo);
    Ok(r)
}

/// Trapezoid sum over every `stride`-th sample.
fn trapezoid(t: &[f64], f: &[f64], stride: usize) -> f64 {
    let idx: Vec<usize> = (0..t.len()).step_by(stride).collect();
    let terms: Vec<f64> = idx.windows(2).map(|w| 0.5 * (t[w[1]] - t[w[0]]) * (f[w[0]] + f[w[1]])).collect();
    crate::numeric::pairwise_sum(&terms)
}
