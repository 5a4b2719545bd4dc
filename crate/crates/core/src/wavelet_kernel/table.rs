use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{check_theta, psi_frac_with, KernelRule};
use super::meyer::MeyerProfile;
use crate::error::{Error, Result};
use crate::numeric::sha256_hex;
use crate::quadrature::AdaptiveOptions;

pub const TABLE_FORMAT_VERSION: u32 = 1;

/// What to tabulate. `thetas` may list primal and dual exponents together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub t_center: f64,
    pub t_half_width: f64,
    pub dt: f64,
    pub thetas: Vec<f64>,
    pub tolerance: f64,
}

impl TableSpec {
    pub const DEFAULT_HALF_WIDTH: f64 = 64.0;
    pub const DEFAULT_DT: f64 = 1.0 / 256.0;
    pub const DEFAULT_THETA_STEP: f64 = 1.0 / 64.0;
    pub const DEFAULT_TOLERANCE: f64 = 1e-6;

    /// Default layout for Hurst values in `[lo, hi]`: a 1/64 exponent grid
    /// covering the band, plus the reflected dual band when `with_dual`.
    pub fn for_hurst_range(lo: f64, hi: f64, with_dual: bool) -> Self {
        let mut thetas = theta_grid(lo, hi, Self::DEFAULT_THETA_STEP);
        if with_dual {
            let mut dual = theta_grid(-hi - 1.0, -lo - 1.0, Self::DEFAULT_THETA_STEP);
            dual.append(&mut thetas);
            thetas = dual;
        }
        Self::with_thetas(thetas)
    }

    pub fn with_thetas(thetas: Vec<f64>) -> Self {
        Self {
            t_center: 0.0,
            t_half_width: Self::DEFAULT_HALF_WIDTH,
            dt: Self::DEFAULT_DT,
            thetas,
            tolerance: Self::DEFAULT_TOLERANCE,
        }
    }
}

/// Multiples of `step` covering `[lo, hi]`, kept strictly inside (−2, 1).
fn theta_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let first = (lo / step).floor() as i64;
    let last = (hi / step).ceil() as i64;
    (first..=last).map(|i| i as f64 * step).filter(|&th| th > -2.0 && th < 1.0).collect()
}

/// Tabulated `Ψ(t, θ)` on a uniform t-grid and a sorted θ list.
///
/// Values are stored row-major, one row of t-samples per exponent. Lookups
/// use 4-point Lagrange interpolation in t and linear interpolation in θ;
/// both reproduce stored nodes exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelTable {
    pub format_version: u32,
    pub profile: String,
    pub t_min: f64,
    pub dt: f64,
    pub n_t: usize,
    pub thetas: Vec<f64>,
    pub interpolation: String,
    pub quadrature_nodes: usize,
    pub quadrature_error: f64,
    pub tolerance: f64,
    pub interpolation_error: f64,
    pub values: Vec<f64>,
}

/// Lagrange weights at one point of the t-grid; see [`KernelTable::stencil`].
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    start: i64,
    weights: [f64; 4],
    exact: bool,
}

/// Precomputed θ-interpolation weights for repeated lookups at one exponent.
#[derive(Debug, Clone, Copy)]
pub struct RowRef {
    lo: usize,
    hi: usize,
    w_hi: f64,
}

const CHUNK: usize = 256;

impl KernelTable {
    pub fn build(spec: &TableSpec) -> Result<Self> {
        if !(spec.dt > 0.0) || !(spec.t_half_width >= 0.0) {
            return Err(Error::InvalidParameter("table needs dt > 0 and a non-negative half width".into()));
        }
        if spec.thetas.is_empty() {
            return Err(Error::InvalidParameter("table needs at least one exponent".into()));
        }
        let mut thetas = spec.thetas.clone();
        thetas.sort_by(f64::total_cmp);
        thetas.dedup();
        for &th in &thetas {
            check_theta(th)?;
        }
        let steps = (2.0 * spec.t_half_width / spec.dt).round() as usize;
        let n_t = steps + 1;
        let t_min = spec.t_center - 0.5 * spec.dt * steps as f64;
        let t_abs_max = t_min.abs().max((t_min + spec.dt * steps as f64).abs());
        let quad_tol = (spec.tolerance / 10.0).min(1e-10);
        let rule = KernelRule::for_range(t_abs_max, &thetas, quad_tol)?;

        let weights: Vec<Vec<f64>> = thetas.iter().map(|&th| rule.weights_for(th)).collect();
        let chunks: Vec<Vec<Vec<f64>>> = (0..n_t.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                let len = CHUNK.min(n_t - start);
                tabulate_chunk(&rule, &weights, t_min + start as f64 * spec.dt, spec.dt, len)
            })
            .collect();
        let mut values = vec![0.0; thetas.len() * n_t];
        for (c, chunk) in chunks.into_iter().enumerate() {
            let start = c * CHUNK;
            for (r, row) in chunk.into_iter().enumerate() {
                values[r * n_t + start..r * n_t + start + row.len()].copy_from_slice(&row);
            }
        }

        let mut table = Self {
            format_version: TABLE_FORMAT_VERSION,
            profile: MeyerProfile::ID.to_string(),
            t_min,
            dt: spec.dt,
            n_t,
            thetas,
            interpolation: "lagrange4-t/linear-theta".to_string(),
            quadrature_nodes: rule.node_count(),
            quadrature_error: rule.error_estimate(),
            tolerance: spec.tolerance,
            interpolation_error: 0.0,
            values,
        };
        if let Some(bad) = table.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite kernel value {bad}")));
        }
        table.interpolation_error = table.probe_interpolation_error()?;
        if table.interpolation_error > 10.0 * spec.tolerance {
            return Err(Error::InterpolationTolerance {
                measured: table.interpolation_error,
                tolerance: spec.tolerance,
            });
        }
        Ok(table)
    }

    /// Max deviation between interpolated and directly integrated values at
    /// cell midpoints spread over the grid, for every tabulated exponent.
    fn probe_interpolation_error(&self) -> Result<f64> {
        if self.n_t < 2 {
            return Ok(0.0);
        }
        let cells = self.n_t - 1;
        let mut cell_ids: Vec<usize> = (0..16).map(|i| i * cells / 16).collect();
        let center = ((-self.t_min) / self.dt).floor().clamp(0.0, (cells - 1) as f64) as usize;
        cell_ids.extend([center, center.saturating_sub(1), (center + 1).min(cells - 1), cells - 1]);
        cell_ids.sort_unstable();
        cell_ids.dedup();
        let opts = AdaptiveOptions { abs_tol: 1e-12, ..Default::default() };
        let errs: Result<Vec<f64>> = self
            .thetas
            .par_iter()
            .map(|&th| {
                let row = self.row(th).expect("tabulated exponent");
                let mut worst: f64 = 0.0;
                for &c in &cell_ids {
                    let t = self.t_min + (c as f64 + 0.5) * self.dt;
                    let direct = psi_frac_with(t, th, &opts)?;
                    let interp = self.eval_row(&row, t).expect("inside table");
                    worst = worst.max((direct - interp).abs());
                }
                Ok(worst)
            })
            .collect();
        Ok(errs?.into_iter().fold(0.0, f64::max))
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.t_min, self.t_min + self.dt * (self.n_t - 1) as f64)
    }

    pub fn theta_range(&self) -> (f64, f64) {
        (self.thetas[0], *self.thetas.last().unwrap())
    }

    pub fn covers_theta(&self, lo: f64, hi: f64) -> bool {
        let (a, b) = self.theta_range();
        lo >= a && hi <= b
    }

    pub fn require_theta(&self, what: &'static str, lo: f64, hi: f64) -> Result<()> {
        if self.covers_theta(lo, hi) {
            Ok(())
        } else {
            let (table_lo, table_hi) = self.theta_range();
            Err(Error::TableCoverage { what, lo, hi, table_lo, table_hi })
        }
    }

    pub fn row_values(&self, index: usize) -> &[f64] {
        &self.values[index * self.n_t..(index + 1) * self.n_t]
    }

    pub fn t_node(&self, i: usize) -> f64 {
        self.t_min + self.dt * i as f64
    }

    pub fn row(&self, theta: f64) -> Option<RowRef> {
        let n = self.thetas.len();
        if !(theta >= self.thetas[0] && theta <= self.thetas[n - 1]) {
            return None;
        }
        let hi = self.thetas.partition_point(|&v| v < theta);
        if self.thetas[hi] == theta || hi == 0 {
            return Some(RowRef { lo: hi, hi, w_hi: 0.0 });
        }
        let lo = hi - 1;
        let w_hi = (theta - self.thetas[lo]) / (self.thetas[hi] - self.thetas[lo]);
        Some(RowRef { lo, hi, w_hi })
    }

    #[inline]
    pub fn eval_row(&self, row: &RowRef, t: f64) -> Option<f64> {
        let u = (t - self.t_min) / self.dt;
        if !(u >= 0.0 && u <= (self.n_t - 1) as f64) {
            return None;
        }
        let v_lo = interp_lagrange(self.row_values(row.lo), u);
        if row.w_hi == 0.0 {
            return Some(v_lo);
        }
        let v_hi = interp_lagrange(self.row_values(row.hi), u);
        Some(v_lo + row.w_hi * (v_hi - v_lo))
    }

    /// Nodes per unit of t when `1/dt` is an integer, so that integer
    /// shifts of the argument are whole node offsets.
    pub fn nodes_per_unit(&self) -> Option<usize> {
        let n = (1.0 / self.dt).round();
        (n >= 1.0 && n * self.dt == 1.0).then_some(n as usize)
    }

    /// Interpolation weights at `t`, reusable at `t − m` for integer `m`
    /// via [`KernelTable::eval_stencil`].
    pub fn stencil(&self, t: f64) -> Stencil {
        let u = (t - self.t_min) / self.dt;
        let i = u.floor();
        let f = u - i;
        if f == 0.0 {
            return Stencil { start: i as i64, weights: [1.0, 0.0, 0.0, 0.0], exact: true };
        }
        let x = u - (i - 1.0);
        let (x1, x2, x3) = (x - 1.0, x - 2.0, x - 3.0);
        Stencil {
            start: i as i64 - 1,
            weights: [-x1 * x2 * x3 / 6.0, x * x2 * x3 / 2.0, -x * x1 * x3 / 2.0, x * x1 * x2 / 6.0],
            exact: false,
        }
    }

    /// Value at the stencil's point moved by `offset` nodes; `None` when the
    /// stencil would leave the table.
    #[inline]
    pub fn eval_stencil(&self, row: &RowRef, stencil: &Stencil, offset: i64) -> Option<f64> {
        let start = stencil.start + offset;
        let span: usize = if stencil.exact { 1 } else { 4 };
        if start < 0 || start as usize + span > self.n_t {
            return None;
        }
        let start = start as usize;
        let apply = |r: usize| {
            let v = &self.row_values(r)[start..start + span];
            if stencil.exact {
                v[0]
            } else {
                let w = &stencil.weights;
                w[0] * v[0] + w[1] * v[1] + w[2] * v[2] + w[3] * v[3]
            }
        };
        let v_lo = apply(row.lo);
        if row.w_hi == 0.0 {
            return Some(v_lo);
        }
        Some(v_lo + row.w_hi * (apply(row.hi) - v_lo))
    }

    pub fn eval(&self, t: f64, theta: f64) -> Option<f64> {
        self.eval_row(&self.row(theta)?, t)
    }

    /// Central difference in t with the table step.
    pub fn deriv_t(&self, t: f64, theta: f64) -> Option<f64> {
        let row = self.row(theta)?;
        let h = self.dt;
        Some((self.eval_row(&row, t + h)? - self.eval_row(&row, t - h)?) / (2.0 * h))
    }

    /// Central difference in θ across neighbouring rows (one-sided at the ends).
    pub fn deriv_theta(&self, t: f64, theta: f64) -> Option<f64> {
        if self.thetas.len() < 2 {
            return None;
        }
        let i = self.thetas.partition_point(|&v| v < theta).min(self.thetas.len() - 1);
        let (a, b) = if i == 0 {
            (0, 1)
        } else if i + 1 >= self.thetas.len() {
            (i - 1, i)
        } else {
            (i - 1, i + 1)
        };
        let (ta, tb) = (self.thetas[a], self.thetas[b]);
        Some((self.eval(t, tb)? - self.eval(t, ta)?) / (tb - ta))
    }

    /// `sup (3 + |t|)^L |D_t^m Ψ(t, θ)|` over the stored nodes and rows.
    pub fn decay_envelope(&self, order: u32, derivative: u8) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.thetas.len() {
            let row = self.row_values(r);
            for i in 0..self.n_t {
                let v = match derivative {
                    0 => row[i],
                    _ => {
                        if i == 0 || i + 1 == self.n_t {
                            continue;
                        }
                        (row[i + 1] - row[i - 1]) / (2.0 * self.dt)
                    }
                };
                let t = self.t_node(i);
                worst = worst.max((3.0 + t.abs()).powi(order as i32) * v.abs());
            }
        }
        worst
    }

    /// `sup_x Σ_k |Ψ(x − k, θ)|` over x in [0, 1) for the given row, counting
    /// only integer shifts that stay inside the table. With `derivative = 1`
    /// the same for `D_t Ψ`.
    pub fn shift_sum(&self, theta: f64, derivative: u8) -> f64 {
        let Some(row) = self.row(theta) else { return f64::NAN };
        let (lo, hi) = self.t_range();
        let mut worst: f64 = 0.0;
        for s in 0..32 {
            let x = s as f64 / 32.0;
            let mut acc = 0.0;
            let k_lo = (x - hi).ceil() as i64;
            let k_hi = (x - lo).floor() as i64;
            for k in k_lo..=k_hi {
                let y = x - k as f64;
                let v = if derivative == 0 {
                    self.eval_row(&row, y)
                } else {
                    match (self.eval_row(&row, y + self.dt), self.eval_row(&row, y - self.dt)) {
                        (Some(a), Some(b)) => Some((a - b) / (2.0 * self.dt)),
                        _ => None,
                    }
                };
                acc += v.unwrap_or(0.0).abs();
            }
            worst = worst.max(acc);
        }
        worst
    }

    pub fn digest(&self) -> String {
        let mut bytes = Vec::with_capacity(self.values.len() * 8 + 64);
        for v in [self.t_min, self.dt, self.n_t as f64] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        for v in self.thetas.iter().chain(&self.values) {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        bytes.extend_from_slice(self.profile.as_bytes());
        sha256_hex(&bytes)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let table: Self = serde_json::from_str(text)?;
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<()> {
        if self.format_version != TABLE_FORMAT_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported kernel table version {} (expected {TABLE_FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.profile != MeyerProfile::ID {
            return Err(Error::InvalidParameter(format!("unknown wavelet profile {}", self.profile)));
        }
        if self.thetas.is_empty() || self.values.len() != self.thetas.len() * self.n_t || self.n_t == 0 {
            return Err(Error::InvalidParameter("kernel table shape does not match its header".into()));
        }
        if !self.thetas.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter("kernel table exponents must be strictly increasing".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("kernel table holds non-finite values".into()));
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// One block of consecutive t-nodes for every row. Cosines along the block
/// come from a rotation recurrence restarted exactly at the block start.
fn tabulate_chunk(rule: &KernelRule, weights: &[Vec<f64>], t0: f64, dt: f64, len: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; len]; weights.len()];
    let mut cosines = vec![0.0; len];
    for (i, &xi) in rule.nodes().iter().enumerate() {
        let phase = (t0 + 0.5) * xi;
        let (mut s, mut c) = phase.sin_cos();
        let (sd, cd) = (dt * xi).sin_cos();
        for slot in cosines.iter_mut() {
            *slot = c;
            let c_next = c * cd - s * sd;
            s = s * cd + c * sd;
            c = c_next;
        }
        for (r, w) in weights.iter().enumerate() {
            let wi = w[i];
            for (o, &cv) in out[r].iter_mut().zip(&cosines) {
                *o += wi * cv;
            }
        }
    }
    out
}

/// Lagrange interpolation on a uniform grid at fractional index `u`, with a
/// stencil of up to four nodes; exact at integer `u`.
#[inline]
pub(crate) fn interp_lagrange(row: &[f64], u: f64) -> f64 {
    let n = row.len();
    let i = u.floor() as usize;
    let f = u - i as f64;
    if f == 0.0 || n == 1 {
        return row[i.min(n - 1)];
    }
    let m = n.min(4);
    let start = i.saturating_sub(1).min(n - m);
    let x = u - start as f64;
    match m {
        4 => {
            let (x1, x2, x3) = (x - 1.0, x - 2.0, x - 3.0);
            let l0 = -x1 * x2 * x3 / 6.0;
            let l1 = x * x2 * x3 / 2.0;
            let l2 = -x * x1 * x3 / 2.0;
            let l3 = x * x1 * x2 / 6.0;
            l0 * row[start] + l1 * row[start + 1] + l2 * row[start + 2] + l3 * row[start + 3]
        }
        3 => {
            let (x1, x2) = (x - 1.0, x - 2.0);
            0.5 * x1 * x2 * row[start] - x * x2 * row[start + 1] + 0.5 * x * x1 * row[start + 2]
        }
        _ => row[start] + x * (row[start + 1] - row[start]),
    }
}
