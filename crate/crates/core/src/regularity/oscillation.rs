use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{band_factor, linear_fit};
use crate::simulate::PathData;

/// Fewest grid points an annulus must hold before its oscillation is trusted.
pub const MIN_ANNULUS_POINTS: usize = 8;

/// Relative slack on the annulus edges, absorbing rounding in grid times.
const EDGE_SLACK: f64 = 1e-9;

/// Index of the grid point nearest to `t`.
pub fn nearest_index(path: &PathData, t: f64) -> usize {
    let i = path.t.partition_point(|&s| s < t);
    if i == 0 {
        0
    } else if i == path.t.len() || (t - path.t[i - 1]) <= (path.t[i] - t) {
        i - 1
    } else {
        i
    }
}

/// `max |X(s) − X(t)|` over grid points with `2^{−n} ≤ |s − t| ≤ 2^{−n+1}`.
/// `t` is snapped to the nearest grid point.
pub fn oscillation(path: &PathData, t: f64, n: u32) -> Result<f64> {
    let c = nearest_index(path, t);
    annulus_oscillation(path, c, n)
}

fn annulus_oscillation(path: &PathData, c: usize, n: u32) -> Result<f64> {
    let tc = path.t[c];
    let xc = path.x[c];
    let lo = (-(n as f64)).exp2() * (1.0 - EDGE_SLACK);
    let hi = (1.0 - n as f64).exp2() * (1.0 + EDGE_SLACK);
    let ts = &path.t;
    let mut found = 0;
    let mut best: f64 = 0.0;
    // right side: tc + lo ≤ s ≤ tc + hi
    let a = ts.partition_point(|&s| s - tc < lo);
    let b = ts.partition_point(|&s| s - tc <= hi);
    // left side: tc − hi ≤ s ≤ tc − lo
    let c0 = ts.partition_point(|&s| tc - s > hi);
    let c1 = ts.partition_point(|&s| tc - s >= lo);
    for i in (a..b).chain(c0..c1) {
        found += 1;
        best = best.max((path.x[i] - xc).abs());
    }
    if found < MIN_ANNULUS_POINTS {
        return Err(Error::InsufficientResolution { n, found, needed: MIN_ANNULUS_POINTS });
    }
    Ok(best)
}

/// Scale index below which `log(n log 2)` is under 1 and the
/// submultiplicative surrogates replace the pure moduli.
const COARSE_SCALE_LIMIT: f64 = std::f64::consts::E;

/// The three moduli of continuity, as factors over `r^h` at `r = 2^{−n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulusKind {
    Slow,
    Ordinary,
    Rapid,
}

impl ModulusKind {
    /// `1`, `√log log(1/r)` or `√log(1/r)` at `r = 2^{−n}`; at coarse scales
    /// `√(1 + log(3 + log 1/r))` and `√(1 + log 1/r)`.
    pub fn log_factor(self, n: u32) -> f64 {
        let l = n as f64 * LN_2;
        let coarse = l < COARSE_SCALE_LIMIT;
        match self {
            Self::Slow => 1.0,
            Self::Ordinary if coarse => (1.0 + (3.0 + l).ln()).sqrt(),
            Self::Ordinary => l.ln().sqrt(),
            Self::Rapid if coarse => (1.0 + l).sqrt(),
            Self::Rapid => l.sqrt(),
        }
    }

    /// The modulus `σ(r)` at `r = 2^{−n}` for exponent `h`.
    pub fn modulus(self, h: f64, n: u32) -> f64 {
        (-(n as f64) * h).exp2() * self.log_factor(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointClass {
    Slow,
    Ordinary,
    Rapid,
    Undetermined,
}

impl PointClass {
    pub fn name(self) -> &'static str {
        match self {
            Self::Slow => "slow",
            Self::Ordinary => "ordinary",
            Self::Rapid => "rapid",
            Self::Undetermined => "undetermined",
        }
    }
}

/// Dyadic oscillations at one point and their ratios to the three moduli.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    /// Requested point.
    pub t: f64,
    /// Grid point actually used.
    pub t_grid: f64,
    pub h: f64,
    pub n_min: u32,
    pub n_max: u32,
    pub osc: Vec<f64>,
    pub ratio_slow: Vec<f64>,
    pub ratio_ordinary: Vec<f64>,
    pub ratio_rapid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<PointClass>,
}

impl OscillationReport {
    pub fn scales(&self) -> impl Iterator<Item = u32> {
        self.n_min..=self.n_max
    }

    pub fn ratios(&self, kind: ModulusKind) -> &[f64] {
        match kind {
            ModulusKind::Slow => &self.ratio_slow,
            ModulusKind::Ordinary => &self.ratio_ordinary,
            ModulusKind::Rapid => &self.ratio_rapid,
        }
    }

    /// `(n, osc, slow, ordinary, rapid)` rows.
    pub fn to_csv(&self) -> String {
        use crate::numeric::fmt17;
        let mut out = String::from("n,osc,ratio_slow,ratio_ord,ratio_rapid\n");
        for (i, n) in self.scales().enumerate() {
            out.push_str(&format!(
                "{n},{},{},{},{}\n",
                fmt17(self.osc[i]),
                fmt17(self.ratio_slow[i]),
                fmt17(self.ratio_ordinary[i]),
                fmt17(self.ratio_rapid[i])
            ));
        }
        out
    }
}

pub fn modulus_ratios(path: &PathData, t: f64, h: f64, n_range: (u32, u32)) -> Result<OscillationReport> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidParameter(format!("exponent {h} outside (0, 1)")));
    }
    let (n_min, n_max) = n_range;
    if n_min == 0 || n_min > n_max || n_max > 60 {
        return Err(Error::InvalidParameter(format!(
            "scale range [{n_min}, {n_max}] must satisfy 1 ≤ n_min ≤ n_max ≤ 60"
        )));
    }
    let c = nearest_index(path, t);
    let osc = (n_min..=n_max).map(|n| annulus_oscillation(path, c, n)).collect::<Result<Vec<_>>>()?;
    let ratio = |kind: ModulusKind| -> Vec<f64> {
        osc.iter().zip(n_min..=n_max).map(|(o, n)| o / kind.modulus(h, n)).collect()
    };
    Ok(OscillationReport {
        t,
        t_grid: path.t[c],
        h,
        n_min,
        n_max,
        ratio_slow: ratio(ModulusKind::Slow),
        ratio_ordinary: ratio(ModulusKind::Ordinary),
        ratio_rapid: ratio(ModulusKind::Rapid),
        osc,
        tag: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Number of finest scales examined.
    pub growth_window: usize,
    pub band_factor: f64,
    /// Minimum `|slope|` of `log ratio` against `log √n` counted as growth or decay.
    pub slope_threshold: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { growth_window: 8, band_factor: 3.0, slope_threshold: 0.3 }
    }
}

/// Classifier verdict with the statistics it was based on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub tag: PointClass,
    pub slow_slope: f64,
    pub rapid_slope: f64,
    pub slow_band: f64,
    pub ordinary_band: f64,
    pub rapid_band: f64,
}

/// Minimum number of scales a report needs to be classified.
pub const MIN_CLASSIFY_SCALES: usize = 6;

fn log_slope(ns: &[f64], values: &[f64]) -> f64 {
    if values.iter().any(|&v| !(v > 0.0)) {
        return f64::NAN;
    }
    let x: Vec<f64> = ns.iter().map(|n| 0.5 * n.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    linear_fit(&x, &y).map_or(f64::NAN, |(s, _)| s)
}

pub fn classify_point(report: &OscillationReport, opts: &ClassifyOptions) -> Classification {
    let len = report.osc.len();
    let w = opts.growth_window.min(len);
    let from = len - w;
    let ns: Vec<f64> = report.scales().skip(from).map(f64::from).collect();
    let tail = |v: &[f64]| v[from..].to_vec();
    let (slow, ord, rapid) = (tail(&report.ratio_slow), tail(&report.ratio_ordinary), tail(&report.ratio_rapid));
    let mut c = Classification {
        tag: PointClass::Undetermined,
        slow_slope: log_slope(&ns, &slow),
        rapid_slope: log_slope(&ns, &rapid),
        slow_band: band_factor(&slow),
        ordinary_band: band_factor(&ord),
        rapid_band: band_factor(&rapid),
    };
    if w < MIN_CLASSIFY_SCALES {
        return c;
    }
    if slow.iter().all(|&v| v == 0.0) {
        c.tag = PointClass::Slow;
        return c;
    }
    let thr = opts.slope_threshold;
    let banded = |b: f64| b <= opts.band_factor;
    c.tag = if c.slow_slope > thr {
        if c.rapid_slope.abs() <= thr && banded(c.rapid_band) {
            PointClass::Rapid
        } else if c.rapid_slope < -thr && banded(c.ordinary_band) {
            PointClass::Ordinary
        } else {
            PointClass::Undetermined
        }
    } else if c.slow_slope <= thr && banded(c.slow_band) {
        PointClass::Slow
    } else {
        PointClass::Undetermined
    };
    c
}

/// Sparse sample locations resolving every annulus at `t` for `n` in
/// `n_range`: `per_side` evenly spaced points on each side of each annulus.
pub fn probe_design(t: f64, n_range: (u32, u32), per_side: usize) -> Vec<f64> {
    let per_side = per_side.max(2);
    let mut pts = vec![t];
    for n in n_range.0..=n_range.1 {
        let r0 = (-(n as f64)).exp2();
        for i in 0..per_side {
            let r = r0 * (1.0 + i as f64 / (per_side - 1) as f64);
            pts.push(t - r);
            pts.push(t + r);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Slope fit of `log₂ osc(n)` against `n`, averaged over paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub t: f64,
    /// Estimated pointwise exponent, minus the fitted slope.
    pub exponent: f64,
    pub intercept: f64,
    pub paths: usize,
}

pub fn estimate_exponent(paths: &[PathData], t: f64, n_range: (u32, u32)) -> Result<ExponentFit> {
    if paths.is_empty() {
        return Err(Error::InvalidParameter("no paths to fit".into()));
    }
    let (n_min, n_max) = n_range;
    if n_min == 0 || n_max < n_min + 1 {
        return Err(Error::InvalidParameter(format!("scale range [{n_min}, {n_max}] needs two scales")));
    }
    let mut mean = vec![0.0; (n_max - n_min + 1) as usize];
    for p in paths {
        let c = nearest_index(p, t);
        for (slot, n) in mean.iter_mut().zip(n_min..=n_max) {
            let o = annulus_oscillation(p, c, n)?;
            if !(o > 0.0) {
                return Err(Error::InvalidParameter(format!("zero oscillation at scale {n}; exponent undefined")));
            }
            *slot += o.log2() / paths.len() as f64;
        }
    }
    let ns: Vec<f64> = (n_min..=n_max).map(f64::from).collect();
    let (slope, intercept) = linear_fit(&ns, &mean).expect("at least two distinct scales");
    Ok(ExponentFit { t, exponent: -slope, intercept, paths: paths.len() })
}
