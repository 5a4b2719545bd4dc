//! Gauss–Legendre rules: fixed composite panels and an adaptive bisection driver.

use crate::error::{Error, Result};

/// An n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Maps the rule onto `panels` equal sub-intervals of [a, b], appending
    /// absolute nodes and weights.
    pub fn composite(&self, a: f64, b: f64, panels: usize, nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
        let width = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + width * p as f64;
            let half = 0.5 * width;
            let mid = lo + half;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                nodes.push(mid + half * x);
                weights.push(w * half);
            }
        }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub max_evals: usize,
    pub order: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, max_evals: 2_000_000, order: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

/// Adaptive composite Gauss–Legendre. A panel is accepted when the rule on
/// the whole panel and on its two halves agree to the panel's share of the
/// tolerance (proportional to its width).
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: &AdaptiveOptions) -> Result<Estimate> {
    let rule = GaussLegendre::new(opts.order);
    integrate_adaptive_with(&rule, &mut f, a, b, opts)
}

pub(crate) fn integrate_adaptive_with<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    f: &mut F,
    a: f64,
    b: f64,
    opts: &AdaptiveOptions,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0, evals: 0 });
    }
    let total = (b - a).abs();
    let n = rule.len();
    let mut evals = n;
    let whole = rule.integrate(&mut *f, a, b);
    let mut stack = vec![(a, b, whole)];
    let mut value = 0.0;
    let mut error = 0.0;
    // Panels narrower than this are accepted regardless; protects against
    // endless bisection of integrable endpoint singularities.
    let min_width = total * 1e-14;
    while let Some((lo, hi, whole)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(&mut *f, lo, mid);
        let right = rule.integrate(&mut *f, mid, hi);
        evals += 2 * n;
        let refined = left + right;
        let err = (refined - whole).abs();
        let share = opts.abs_tol * (hi - lo).abs() / total;
        if err <= share || (hi - lo).abs() <= min_width {
            value += refined;
            error += err;
        } else {
            if evals > opts.max_evals {
                return Err(Error::QuadratureNonConvergence {
                    tolerance: opts.abs_tol,
                    budget: opts.max_evals,
                    estimate: error + err,
                });
            }
            stack.push((lo, mid, left));
            stack.push((mid, hi, right));
        }
    }
    Ok(Estimate { value, error, evals })
}

/// Integral over a union of consecutive segments given by breakpoints.
pub fn integrate_segments<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    opts: &AdaptiveOptions,
) -> Result<Estimate> {
    let rule = GaussLegendre::new(opts.order);
    let mut out = Estimate { value: 0.0, error: 0.0, evals: 0 };
    let segments = breakpoints.len().saturating_sub(1).max(1) as f64;
    let per = AdaptiveOptions { abs_tol: opts.abs_tol / segments, ..*opts };
    for w in breakpoints.windows(2) {
        let e = integrate_adaptive_with(&rule, &mut f, w[0], w[1], &per)?;
        out.value += e.value;
        out.error += e.error;
        out.evals += e.evals;
    }
    Ok(out)
}
