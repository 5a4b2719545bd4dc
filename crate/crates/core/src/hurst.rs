//! Hurst functions `H: ℝ → [a, b]` and empirical checks of the regularity
//! conditions imposed on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{linear_fit, sha256_hex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
pub enum HurstFamily {
    Constant {
        h: f64,
    },
    /// `slope · t + intercept`, clipped to the band.
    AffineClipped {
        slope: f64,
        intercept: f64,
    },
    /// `(a + b)/2 + (b − a)/2 · sin(2π·frequency·t + phase)`.
    Sinusoidal {
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `a + min(b − a, c / log(e + 1/|t − t0|)^power)`; equals `a` at `t0`.
    LogModulus {
        t0: f64,
        c: f64,
        #[serde(default = "one")]
        power: f64,
    },
    /// `a + |t − t0|^exponent`, a cusp of prescribed Hölder exponent.
    PowerCusp {
        t0: f64,
        exponent: f64,
    },
    /// Piecewise-linear through `(t, H)` knots, constant beyond the ends.
    UserTable {
        knots: Vec<(f64, f64)>,
    },
}

fn one() -> f64 {
    1.0
}

/// Optional regularity metadata declared alongside a Hurst function, as
/// `(t, value)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeclaredRegularity {
    #[serde(default)]
    pub gamma: Vec<(f64, f64)>,
    #[serde(default)]
    pub c_t: Vec<(f64, f64)>,
    #[serde(default)]
    pub r_t: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstSpec {
    pub a: f64,
    pub b: f64,
    #[serde(flatten)]
    pub family: HurstFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularity: Option<DeclaredRegularity>,
}

impl HurstSpec {
    pub fn new(a: f64, b: f64, family: HurstFamily) -> Result<Self> {
        let spec = Self { a, b, family, regularity: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn constant(h: f64) -> Result<Self> {
        Self::new(h, h, HurstFamily::Constant { h })
    }

    pub fn sinusoidal(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, HurstFamily::Sinusoidal { frequency: 1.0, phase: 0.0 })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b < 1.0 && self.a <= self.b) {
            return Err(Error::InvalidParameter(format!(
                "Hurst band [{}, {}] must satisfy 0 < a <= b < 1",
                self.a, self.b
            )));
        }
        match &self.family {
            HurstFamily::UserTable { knots } => {
                if knots.is_empty() || !knots.windows(2).all(|w| w[0].0 < w[1].0) {
                    return Err(Error::InvalidParameter(
                        "user-table knots must be non-empty with strictly increasing t".into(),
                    ));
                }
            }
            HurstFamily::LogModulus { power, .. } if !(*power > 0.0) => {
                return Err(Error::InvalidParameter("log-modulus power must be positive".into()));
            }
            HurstFamily::PowerCusp { exponent, .. } if !(*exponent > 0.0) => {
                return Err(Error::InvalidParameter("cusp exponent must be positive".into()));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn digest(&self) -> String {
        sha256_hex(serde_json::to_string(self).unwrap_or_default().as_bytes())
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.family, HurstFamily::Constant { .. }) || self.a == self.b
    }

    fn raw(&self, t: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        match &self.family {
            HurstFamily::Constant { h } => *h,
            HurstFamily::AffineClipped { slope, intercept } => slope * t + intercept,
            HurstFamily::Sinusoidal { frequency, phase } => {
                0.5 * (a + b) + 0.5 * (b - a) * (2.0 * std::f64::consts::PI * frequency * t + phase).sin()
            }
            HurstFamily::LogModulus { t0, c, power } => {
                let d = (t - t0).abs();
                if d == 0.0 {
                    a
                } else {
                    let l = (std::f64::consts::E + 1.0 / d).ln();
                    a + (b - a).min(c / l.powf(*power))
                }
            }
            HurstFamily::PowerCusp { t0, exponent } => a + (t - t0).abs().powf(*exponent),
            HurstFamily::UserTable { knots } => {
                let i = knots.partition_point(|k| k.0 <= t);
                if i == 0 {
                    knots[0].1
                } else if i == knots.len() {
                    knots[i - 1].1
                } else {
                    let (t0, h0) = knots[i - 1];
                    let (t1, h1) = knots[i];
                    h0 + (h1 - h0) * (t - t0) / (t1 - t0)
                }
            }
        }
    }

    /// `H(t)`, clipped to `[a, b]`.
    pub fn eval(&self, t: f64) -> f64 {
        self.raw(t).clamp(self.a, self.b)
    }

    /// Smallest and largest value of `H` over a grid of `[lo, hi]`.
    pub fn range_on(&self, lo: f64, hi: f64, samples: usize) -> (f64, f64) {
        let n = samples.max(2);
        (0..n)
            .map(|i| self.eval(lo + (hi - lo) * i as f64 / (n - 1) as f64))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)))
    }
}

pub const DEFAULT_SLACK: f64 = 0.05;
pub const DEFAULT_PROBE_RADIUS: f64 = 1.0 / 16.0;
/// Radii 2⁻⁴ … 2⁻²⁰.
pub const DEFAULT_PROBES: usize = 17;
/// Finer-half / coarser-half ratio above which the log-modulus quantity is
/// considered to be growing.
pub const STABILIZATION_FACTOR: f64 = 1.25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub t: f64,
    pub h_t: f64,
    pub holds: bool,
    /// Fitted pointwise Hölder exponent of `H` at `t`; `+∞` when every probed
    /// increment vanishes.
    pub gamma: f64,
    pub c_t: f64,
}

fn probe_radii(probe_radius: f64, n_probes: usize) -> Result<Vec<f64>> {
    if n_probes < 16 {
        return Err(Error::InvalidParameter(format!("need at least 16 probes, got {n_probes}")));
    }
    if !(probe_radius > 0.0) {
        return Err(Error::InvalidParameter("probe radius must be positive".into()));
    }
    Ok((0..n_probes).map(|i| probe_radius * 0.5f64.powi(i as i32)).collect())
}

/// Largest two-sided increment `max(|H(t+r) − H(t)|, |H(t−r) − H(t)|)` per radius.
fn increments(spec: &HurstSpec, t: f64, radii: &[f64]) -> Vec<f64> {
    let h = spec.eval(t);
    radii.iter().map(|&r| (spec.eval(t + r) - h).abs().max((spec.eval(t - r) - h).abs())).collect()
}

/// Log-log regression of the increments against the radius.
fn fit_holder(radii: &[f64], incs: &[f64]) -> (f64, f64) {
    let (x, y): (Vec<f64>, Vec<f64>) =
        radii.iter().zip(incs).filter(|(_, &d)| d > 0.0).map(|(&r, &d)| (r.ln(), d.ln())).unzip();
    match linear_fit(&x, &y) {
        Some((gamma, _)) => {
            let c = radii.iter().zip(incs).map(|(&r, &d)| d / r.powf(gamma)).fold(0.0, f64::max);
            (gamma, c)
        }
        None => (f64::INFINITY, 0.0),
    }
}

fn check_holder(
    spec: &HurstSpec,
    t: f64,
    probe_radius: f64,
    n_probes: usize,
    slack: f64,
    strict: bool,
) -> Result<ConditionReport> {
    let radii = probe_radii(probe_radius, n_probes)?;
    let incs = increments(spec, t, &radii);
    let (gamma, c_t) = fit_holder(&radii, &incs);
    let h_t = spec.eval(t);
    let holds = if strict { gamma > h_t + slack } else { gamma >= h_t - slack };
    Ok(ConditionReport { t, h_t, holds, gamma, c_t })
}

/// Pointwise Hölder regularity of `H` at `t` with some `γ ≥ H(t)`, up to `slack`.
pub fn check_condition1(
    spec: &HurstSpec,
    t: f64,
    probe_radius: f64,
    n_probes: usize,
    slack: f64,
) -> Result<ConditionReport> {
    check_holder(spec, t, probe_radius, n_probes, slack, false)
}

/// As [`check_condition1`] with the strict requirement `γ > H(t) + slack`.
pub fn check_condition2(
    spec: &HurstSpec,
    t: f64,
    probe_radius: f64,
    n_probes: usize,
    slack: f64,
) -> Result<ConditionReport> {
    check_holder(spec, t, probe_radius, n_probes, slack, true)
}

/// `|H(s) − H(t)| · log(1/|s − t|)` stays bounded: its maximum over the finer
/// half of the probes may not exceed [`STABILIZATION_FACTOR`] times its
/// maximum over the coarser half.
pub fn check_condition3(spec: &HurstSpec, t: f64, probe_radius: f64, n_probes: usize) -> Result<ConditionReport> {
    let radii = probe_radii(probe_radius, n_probes)?;
    let incs = increments(spec, t, &radii);
    let weighted: Vec<f64> = radii.iter().zip(&incs).map(|(&r, &d)| d * (1.0 / r).ln()).collect();
    let half = weighted.len() / 2;
    let coarse = weighted[..half].iter().cloned().fold(0.0, f64::max);
    let fine = weighted[half..].iter().cloned().fold(0.0, f64::max);
    let c_t = coarse.max(fine);
    let holds = fine <= STABILIZATION_FACTOR * coarse + 1e-12;
    let (gamma, _) = fit_holder(&radii, &incs);
    Ok(ConditionReport { t, h_t: spec.eval(t), holds, gamma, c_t })
}
