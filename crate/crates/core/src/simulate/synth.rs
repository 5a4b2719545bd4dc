use rayon::prelude::*;

use super::path::{Grid, Model, Provenance, SamplePath, TruncationPolicy};
use super::wavelet::{TabulatedWavelet, TimeWavelet, MEYER_THETA};
use crate::coefficients::{k_index, CoefficientField};
use crate::error::{Error, Result};
use crate::hurst::HurstSpec;
use crate::numeric::pairwise_sum;
use crate::wavelet_kernel::{KernelTable, RowRef};

/// Multifractional Brownian motion: `Σ_j Σ_k 2^{−jH(t)} ε_{j,k} (Ψ(2^j t − k, H(t)) − Ψ(−k, H(t)))`.
pub fn synth_bh(
    field: &dyn CoefficientField,
    hurst: &HurstSpec,
    table: &KernelTable,
    policy: &TruncationPolicy,
    grid: &Grid,
) -> Result<SamplePath> {
    let theta = |t: f64| hurst.eval(t);
    let job = Job {
        field,
        theta: &theta,
        per_coefficient: false,
        kernel: Kernel::Table { table, fixed: None },
        kernel_digest: table.digest(),
        anchor: true,
        j_lo: policy.j_min,
        policy,
    };
    job.run(grid, Model::Bh, hurst.digest())
}

/// The field `B(·, θ)` at a frozen exponent.
pub fn synth_frozen(
    field: &dyn CoefficientField,
    theta: f64,
    table: &KernelTable,
    policy: &TruncationPolicy,
    grid: &Grid,
) -> Result<SamplePath> {
    let spec = HurstSpec::constant(theta)?;
    synth_bh(field, &spec, table, policy, grid)
}

/// `Σ_j Σ_k 2^{−jH(k2^{−j})} ε_{j,k} (Ψ(2^j t − k, H(k2^{−j})) − Ψ(−k, H(k2^{−j})))`.
pub fn synth_z(
    field: &dyn CoefficientField,
    hurst: &HurstSpec,
    table: &KernelTable,
    policy: &TruncationPolicy,
    grid: &Grid,
) -> Result<SamplePath> {
    let theta = |t: f64| hurst.eval(t);
    let job = Job {
        field,
        theta: &theta,
        per_coefficient: true,
        kernel: Kernel::Table { table, fixed: None },
        kernel_digest: table.digest(),
        anchor: true,
        j_lo: policy.j_min,
        policy,
    };
    job.run(grid, Model::Z, hurst.digest())
}

/// Random wavelet series `Σ_{j≥0} Σ_k ε_{j,k} 2^{−H(k2^{−j})j} ψ(2^j t − k)`.
pub fn synth_fh(
    field: &dyn CoefficientField,
    hurst: &HurstSpec,
    psi: &TimeWavelet,
    policy: &TruncationPolicy,
    grid: &Grid,
) -> Result<SamplePath> {
    let theta = |t: f64| hurst.eval(t);
    let job = Job {
        field,
        theta: &theta,
        per_coefficient: true,
        kernel: Kernel::for_wavelet(psi),
        kernel_digest: psi.digest(),
        anchor: false,
        j_lo: 0,
        policy,
    };
    let mut path = job.run(grid, Model::Fh, hurst.digest())?;
    if psi.is_compact() && (policy.window as f64) < psi.radius() {
        path.provenance.warnings.push(format!(
            "window {} narrower than wavelet support radius {}",
            policy.window,
            psi.radius()
        ));
    }
    Ok(path)
}

/// `1 − b > (1 − a)(1 − a/b)`, the condition under which `Z − B_H` is smoother than `B_H`.
pub fn check_condition25(a: f64, b: f64) -> Result<bool> {
    if !(a > 0.0 && a <= b && b < 1.0) {
        return Err(Error::InvalidParameter(format!("need 0 < a ≤ b < 1, got a={a}, b={b}")));
    }
    Ok(1.0 - b > (1.0 - a) * (1.0 - a / b))
}

enum Kernel<'a> {
    /// Kernel table; `fixed` pins one row regardless of the exponent.
    Table {
        table: &'a KernelTable,
        fixed: Option<RowRef>,
    },
    Tabulated(&'a TabulatedWavelet),
}

impl<'a> Kernel<'a> {
    fn for_wavelet(psi: &'a TimeWavelet) -> Self {
        match psi {
            TimeWavelet::Meyer(table) => Self::Table { table, fixed: table.row(MEYER_THETA) },
            TimeWavelet::Tabulated(w) => Self::Tabulated(w),
        }
    }

    fn row(&self, theta: f64) -> Option<RowRef> {
        match self {
            Self::Table { fixed: Some(r), .. } => Some(*r),
            Self::Table { table, fixed: None } => table.row(theta),
            Self::Tabulated(_) => None,
        }
    }

    /// Writes the kernel at `x0 − i`, `i = 0..count`, into `out` (`None` off-table).
    /// `rows[i]` gives the exponent row per term, or `row` for all.
    fn window(&self, x0: f64, count: usize, rows: Rows<'_>, out: &mut Vec<Option<f64>>) {
        out.clear();
        match self {
            Self::Table { table, .. } => {
                let per_unit = table.nodes_per_unit();
                let stencil = table.stencil(x0);
                for i in 0..count {
                    let row = rows.get(i).expect("table kernels carry a row");
                    let v = match per_unit {
                        Some(n) => table.eval_stencil(row, &stencil, -((i * n) as i64)),
                        None => table.eval_row(row, x0 - i as f64),
                    };
                    out.push(v);
                }
            }
            Self::Tabulated(w) => out.extend((0..count).map(|i| Some(w.eval(x0 - i as f64)))),
        }
    }
}

#[derive(Clone, Copy)]
enum Rows<'a> {
    Same(Option<&'a RowRef>),
    Each(&'a [Option<RowRef>]),
}

impl Rows<'_> {
    #[inline]
    fn get(&self, i: usize) -> Option<&RowRef> {
        match self {
            Self::Same(r) => *r,
            Self::Each(rs) => rs[i].as_ref(),
        }
    }
}

struct Job<'a> {
    field: &'a dyn CoefficientField,
    theta: &'a (dyn Fn(f64) -> f64 + Sync),
    /// Exponent taken at `k2^{−j}` instead of at `t`.
    per_coefficient: bool,
    kernel: Kernel<'a>,
    kernel_digest: String,
    /// Subtract the `Ψ(−k)` term so the path vanishes at 0.
    anchor: bool,
    j_lo: i32,
    policy: &'a TruncationPolicy,
}

/// Coefficients of one level over a contiguous run of `k`.
struct Segment {
    start: i64,
    /// `ε`, pre-weighted by `2^{−jθ_k}` when exponents are per coefficient.
    coef: Vec<f64>,
    theta: Vec<f64>,
    rows: Vec<Option<RowRef>>,
}

struct Level {
    j: i32,
    segments: Vec<Segment>,
}

impl Level {
    /// Segment holding the whole window starting at `lo`, and the offset of `lo`.
    fn locate(&self, lo: i64) -> (&Segment, usize) {
        let idx = self.segments.partition_point(|s| s.start <= lo) - 1;
        let seg = &self.segments[idx];
        (seg, (lo - seg.start) as usize)
    }
}

#[derive(Default)]
struct Scratch {
    kernel: Vec<Option<f64>>,
    terms: Vec<f64>,
}

impl Job<'_> {
    fn levels(&self) -> std::ops::RangeInclusive<i32> {
        self.j_lo..=self.policy.j_max
    }

    fn build_level(&self, j: i32, times: &[f64]) -> Level {
        let w = self.policy.window;
        let mut windows: Vec<(i64, i64)> = times
            .iter()
            .map(|&t| {
                let c = k_index(t, j);
                (c - w, c + w)
            })
            .collect();
        if self.anchor {
            windows.push((-w, w));
        }
        windows.sort_unstable();
        let mut merged: Vec<(i64, i64)> = Vec::new();
        for (a, b) in windows {
            match merged.last_mut() {
                Some(last) if a <= last.1 + 1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        let scale = (-(j as f64)).exp2();
        let segments = merged
            .into_iter()
            .map(|(a, b)| {
                let mut coef = vec![0.0; (b - a + 1) as usize];
                self.field.fill(j, a, &mut coef);
                let (mut theta, mut rows) = (Vec::new(), Vec::new());
                if self.per_coefficient {
                    theta = (a..=b).map(|k| (self.theta)(k as f64 * scale)).collect();
                    rows = theta.iter().map(|&th| self.kernel.row(th)).collect();
                    for (c, &th) in coef.iter_mut().zip(&theta) {
                        *c *= (-(j as f64) * th).exp2();
                    }
                }
                Segment { start: a, coef, theta, rows }
            })
            .collect();
        Level { j, segments }
    }

    /// `Σ_{k=lo}^{lo+2W} c_k K(x0 − (k − lo))` with the level's coefficients;
    /// `weight` multiplies each `ε` when exponents are per point.
    fn window_sum(
        &self,
        level: &Level,
        lo: i64,
        x0: f64,
        weight: f64,
        row: Option<&RowRef>,
        scratch: &mut Scratch,
    ) -> (f64, u64) {
        let count = 2 * self.policy.window as usize + 1;
        let (seg, off) = level.locate(lo);
        let rows = if self.per_coefficient { Rows::Each(&seg.rows[off..off + count]) } else { Rows::Same(row) };
        self.kernel.window(x0, count, rows, &mut scratch.kernel);
        scratch.terms.clear();
        let mut skipped = 0;
        for (i, v) in scratch.kernel.iter().enumerate() {
            let c = if self.per_coefficient { seg.coef[off + i] } else { weight * seg.coef[off + i] };
            match v {
                Some(v) => scratch.terms.push(c * v),
                None => skipped += 1,
            }
        }
        (pairwise_sum(&scratch.terms), skipped)
    }

    /// Anchor sums `Σ_k c_k Ψ(−k)` per level at a given point exponent.
    fn anchors(&self, levels: &[Level], point_theta: f64, scratch: &mut Scratch) -> Vec<(f64, u64)> {
        let row = self.kernel.row(point_theta);
        let w = self.policy.window;
        levels
            .iter()
            .map(|level| {
                let weight = (-(level.j as f64) * point_theta).exp2();
                self.window_sum(level, -w, w as f64, weight, row.as_ref(), scratch)
            })
            .collect()
    }

    fn eval_point(&self, levels: &[Level], t: f64, shared_anchor: Option<&[(f64, u64)]>) -> (f64, u64) {
        let w = self.policy.window;
        let mut scratch = Scratch::default();
        let point_theta = if self.per_coefficient { 0.0 } else { (self.theta)(t) };
        let point_row = if self.per_coefficient { None } else { self.kernel.row(point_theta) };
        let own_anchor;
        let anchor = match (self.anchor, shared_anchor) {
            (false, _) => None,
            (true, Some(a)) => Some(a),
            (true, None) => {
                own_anchor = self.anchors(levels, point_theta, &mut scratch);
                Some(&own_anchor[..])
            }
        };
        let mut skipped = 0u64;
        let mut per_level = Vec::with_capacity(levels.len());
        for (idx, level) in levels.iter().enumerate() {
            let j = level.j;
            let weight = (-(j as f64) * point_theta).exp2();
            let lo = k_index(t, j) - w;
            let x0 = (j as f64).exp2() * t - lo as f64;
            let (main, s) = self.window_sum(level, lo, x0, weight, point_row.as_ref(), &mut scratch);
            skipped += s;
            let value = match anchor {
                Some(a) => {
                    skipped += a[idx].1;
                    main - a[idx].0
                }
                None => main,
            };
            per_level.push(value);
        }
        (pairwise_sum(&per_level), skipped)
    }

    fn run(&self, grid: &Grid, model: Model, hurst_digest: String) -> Result<SamplePath> {
        self.policy.validate()?;
        let times = grid.to_vec();
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("grid contains non-finite times".into()));
        }
        let point_thetas: Vec<f64> =
            if self.per_coefficient { Vec::new() } else { times.iter().map(|&t| (self.theta)(t)).collect() };
        let levels: Vec<Level> =
            self.levels().collect::<Vec<_>>().into_par_iter().map(|j| self.build_level(j, &times)).collect();

        // exponent range actually queried
        let (th_lo, th_hi) = if self.per_coefficient {
            levels
                .iter()
                .flat_map(|l| l.segments.iter().flat_map(|s| s.theta.iter().copied()))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
        } else {
            point_thetas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
        };
        if let Kernel::Table { table, fixed: None } = self.kernel {
            table.require_theta("Hurst exponent range", th_lo, th_hi)?;
        }

        // The anchor does not depend on t when exponents are per coefficient
        // or identical at every point.
        let shared_anchor = (self.anchor && (self.per_coefficient || th_lo == th_hi))
            .then(|| self.anchors(&levels, if self.per_coefficient { 0.0 } else { th_lo }, &mut Scratch::default()));

        let results: Vec<(f64, u64)> =
            times.par_iter().map(|&t| self.eval_point(&levels, t, shared_anchor.as_deref())).collect();
        let values: Vec<f64> = results.iter().map(|r| r.0).collect();
        let skipped_terms = results.iter().map(|r| r.1).sum();
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("synthesis produced a non-finite value {bad}")));
        }

        let c1_estimate = levels
            .iter()
            .flat_map(|l| {
                l.segments.iter().flat_map(move |s| {
                    s.coef.iter().enumerate().map(move |(i, &c)| {
                        let k = s.start + i as i64;
                        let eps = if self.per_coefficient { c * (l.j as f64 * s.theta[i]).exp2() } else { c };
                        eps.abs() / (3.0 + l.j.unsigned_abs() as f64 + k.unsigned_abs() as f64).ln().sqrt()
                    })
                })
            })
            .fold(0.0, f64::max);
        let (span_lo, span_hi) = grid.span();
        let tail_bound = self.tail_bound(c1_estimate, th_lo, th_hi, span_lo.abs().max(span_hi.abs()));

        let mut warnings = Vec::new();
        if let Some(tol) = self.policy.tolerance {
            if tail_bound > tol {
                warnings.push(format!("tail bound {tail_bound:e} exceeds tolerance {tol:e}"));
            }
        }
        Ok(SamplePath {
            grid: grid.clone(),
            values,
            provenance: Provenance {
                model,
                field: self.field.describe(),
                hurst_digest,
                policy: *self.policy,
                kernel_digest: self.kernel_digest.clone(),
                tail_bound,
                c1_estimate,
                skipped_terms,
                warnings,
                library_version: crate::VERSION.to_string(),
            },
        })
    }

    /// Heuristic bound on everything the policy drops, with coefficients
    /// bounded by `C₁ √log(3 + |j| + |k|)`:
    /// levels above `j_max` through the shift sum `sup_x Σ_k |Ψ(x − k)|`,
    /// indices outside the window through the `L`-th order decay envelope,
    /// and levels below `j_min` through the mean-value bound
    /// `|Ψ(2^j t − k) − Ψ(−k)| ≤ 2^j |t| sup |∂_t Ψ|`.
    fn tail_bound(&self, c1: f64, th_lo: f64, th_hi: f64, t_abs: f64) -> f64 {
        let p = self.policy;
        let w = p.window as f64;
        let l = p.decay_order;
        let sides = if self.anchor { 2.0 } else { 1.0 };
        let (shift0, shift1, outside) = match self.kernel {
            Kernel::Table { table, fixed } => {
                let (a, b) = match fixed {
                    Some(_) => (MEYER_THETA, MEYER_THETA),
                    None => (th_lo, th_hi),
                };
                let envelope = table.decay_envelope(l, 0);
                (
                    table.shift_sum(a, 0).max(table.shift_sum(b, 0)),
                    table.shift_sum(a, 1).max(table.shift_sum(b, 1)),
                    2.0 * envelope * (2.0 + w).powi(1 - l as i32) / (l as f64 - 1.0),
                )
            }
            Kernel::Tabulated(psi) => {
                let (a, b) = psi.support();
                let outside = if a.abs().max(b.abs()) <= w {
                    0.0
                } else {
                    2.0 * psi.envelope(l) * (2.0 + w).powi(1 - l as i32) / (l as f64 - 1.0)
                };
                (psi.shift_sum(), 0.0, outside)
            }
        };
        let log_factor = |j: i32, reach: f64| (3.0 + j.unsigned_abs() as f64 + reach).ln().sqrt();
        let scale = |j: i32| if j >= 0 { (-(j as f64) * th_lo).exp2() } else { (-(j as f64) * th_hi).exp2() };

        let high: f64 = (p.j_max + 1..=p.j_max + 200)
            .map(|j| scale(j) * log_factor(j, (j as f64).exp2() * t_abs + w) * shift0)
            .sum();
        let window: f64 =
            self.levels().map(|j| scale(j) * log_factor(j, (j as f64).exp2() * t_abs + 2.0 * w) * outside).sum();
        let low: f64 = if self.anchor {
            (self.j_lo - 200..self.j_lo).map(|j| scale(j) * (j as f64).exp2() * t_abs * log_factor(j, w) * shift1).sum()
        } else {
            0.0
        };
        c1 * (sides * (high + window) + low)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{GaussianField, StubField};
    use crate::wavelet_kernel::TableSpec;
    use std::sync::OnceLock;

    fn table() -> &'static KernelTable {
        static T: OnceLock<KernelTable> = OnceLock::new();
        T.get_or_init(|| KernelTable::build(&TableSpec::with_thetas(vec![0.4, 0.5, 0.6])).unwrap())
    }

    fn small_policy() -> TruncationPolicy {
        TruncationPolicy { j_min: -3, j_max: 6, window: 16, ..TruncationPolicy::default() }
    }

    #[test]
    fn condition25_examples() {
        assert!(check_condition25(0.6, 0.7).unwrap());
        assert!(!check_condition25(0.2, 0.9).unwrap());
        for h in [0.1, 0.5, 0.9] {
            assert!(check_condition25(h, h).unwrap());
        }
        assert!(check_condition25(0.7, 0.6).is_err());
        assert!(check_condition25(0.0, 0.5).is_err());
    }

    #[test]
    fn zero_field_gives_zero_paths() {
        let grid = Grid::uniform(0.0, 1.0 / 16.0, 17).unwrap();
        let h = HurstSpec::constant(0.5).unwrap();
        let z = StubField::new();
        for p in [
            synth_bh(&z, &h, table(), &small_policy(), &grid).unwrap(),
            synth_z(&z, &h, table(), &small_policy(), &grid).unwrap(),
        ] {
            assert!(p.values.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn constant_exponent_z_equals_bh_bitwise() {
        let grid = Grid::uniform(0.0, 1.0 / 32.0, 33).unwrap();
        let h = HurstSpec::constant(0.5).unwrap();
        let f = GaussianField::new(3);
        let a = synth_bh(&f, &h, table(), &small_policy(), &grid).unwrap();
        let b = synth_z(&f, &h, table(), &small_policy(), &grid).unwrap();
        let c = synth_frozen(&f, 0.5, table(), &small_policy(), &grid).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.values, c.values);
    }

    #[test]
    fn anchored_at_zero() {
        let grid = Grid::points(vec![0.0, 0.5]).unwrap();
        let h = HurstSpec::sinusoidal(0.4, 0.6).unwrap();
        let f = GaussianField::new(8);
        let p = synth_bh(&f, &h, table(), &small_policy(), &grid).unwrap();
        assert!(p.values[0].abs() < 1e-12);
        assert!(p.values[1].abs() > 0.0);
    }

    #[test]
    fn table_coverage_is_enforced() {
        let grid = Grid::uniform(0.0, 0.1, 3).unwrap();
        let h = HurstSpec::constant(0.8).unwrap();
        let err = synth_bh(&GaussianField::new(1), &h, table(), &small_policy(), &grid).unwrap_err();
        assert!(matches!(err, Error::TableCoverage { .. }), "{err}");
    }

    #[test]
    fn thread_count_does_not_change_values() {
        let grid = Grid::uniform(0.0, 1.0 / 64.0, 65).unwrap();
        let h = HurstSpec::sinusoidal(0.4, 0.6).unwrap();
        let f = GaussianField::new(12);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = one.install(|| synth_z(&f, &h, table(), &small_policy(), &grid).unwrap());
        let b = synth_z(&f, &h, table(), &small_policy(), &grid).unwrap();
        assert_eq!(a, b);
    }
}
