use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::fmt17;

/// Where a path is sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Grid {
    Uniform { t0: f64, dt: f64, n: usize },
    Points { t: Vec<f64> },
}

impl Grid {
    pub fn uniform(t0: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite() && t0.is_finite()) || n == 0 {
            return Err(Error::InvalidParameter(format!("grid ({t0}, {dt}, {n}) needs finite t0, dt > 0, n ≥ 1")));
        }
        Ok(Self::Uniform { t0, dt, n })
    }

    pub fn points(t: Vec<f64>) -> Result<Self> {
        if t.is_empty() || t.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("point grid must be non-empty and finite".into()));
        }
        Ok(Self::Points { t })
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Uniform { n, .. } => *n,
            Self::Points { t } => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn at(&self, i: usize) -> f64 {
        match self {
            Self::Uniform { t0, dt, .. } => t0 + dt * i as f64,
            Self::Points { t } => t[i],
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.at(i)).collect()
    }

    /// `(min, max)` of the sample locations.
    pub fn span(&self) -> (f64, f64) {
        match self {
            Self::Uniform { t0, dt, n } => (*t0, t0 + dt * (*n - 1) as f64),
            Self::Points { t } => t.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v))),
        }
    }
}

/// Which of the series is summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Multifractional Brownian motion, `θ = H(t)`.
    Bh,
    /// Random wavelet series with level-local exponents.
    Fh,
    /// Per-coefficient exponent version of the MBM series.
    Z,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Self::Bh => "bh",
            Self::Fh => "fh",
            Self::Z => "z",
        }
    }
}

/// Which terms of the double series are kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Coarsest level; levels `j_min..0` form the smooth part.
    pub j_min: i32,
    pub j_max: i32,
    /// Half-width of the k-window around `k_j(t)` (and around 0 for the anchor term).
    pub window: i64,
    /// Decay order used when bounding the discarded terms.
    pub decay_order: u32,
    /// Warn when the tail bound exceeds this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { j_min: -8, j_max: 14, window: 64, decay_order: 4, tolerance: None }
    }
}

impl TruncationPolicy {
    pub fn new(j_min: i32, j_max: i32, window: i64) -> Result<Self> {
        let p = Self { j_min, j_max, window, ..Self::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.j_min > 0 || self.j_max < 0 {
            return Err(Error::InvalidParameter(format!(
                "policy levels [{}, {}] must satisfy j_min ≤ 0 ≤ j_max",
                self.j_min, self.j_max
            )));
        }
        if self.j_max > 52 || self.j_min < -60 {
            return Err(Error::InvalidParameter("policy levels outside [-60, 52]".into()));
        }
        if self.window < 4 {
            return Err(Error::InvalidParameter(format!("window half-width {} below 4", self.window)));
        }
        if self.decay_order < 2 {
            return Err(Error::InvalidParameter("decay order must be at least 2".into()));
        }
        Ok(())
    }
}

/// How a path was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: Model,
    /// Coefficient field description (seed for Gaussian fields).
    pub field: String,
    pub hurst_digest: String,
    pub policy: TruncationPolicy,
    /// Digest of the kernel table or time-domain wavelet.
    pub kernel_digest: String,
    /// Heuristic bound on the discarded terms, uniform over the grid.
    pub tail_bound: f64,
    /// Empirical `max |ε|/√log(3+|j|+|k|)` over the coefficients used.
    pub c1_estimate: f64,
    /// Terms skipped because the kernel argument left the table.
    pub skipped_terms: u64,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub library_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.to_vec()
    }

    /// `t,value` rows with a header, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(48 * self.values.len() + 8);
        out.push_str("t,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&fmt17(self.grid.at(i)));
            out.push(',');
            out.push_str(&fmt17(*v));
            out.push('\n');
        }
        out
    }
}

/// Times and values of a path read from `t,value` CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct PathData {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
}

impl PathData {
    pub fn new(t: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        if t.len() != x.len() || t.is_empty() {
            return Err(Error::InvalidParameter("path needs equally many times and values".into()));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("path times must be strictly increasing".into()));
        }
        Ok(Self { t, x })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let t = grid.to_vec();
        let x = t.iter().map(|&s| f(s)).collect();
        Self::new(t, x)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut t = Vec::new();
        let mut x = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (line_no == 0 && line.starts_with(|c: char| c.is_ascii_alphabetic())) {
                continue;
            }
            let mut cols = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("bad CSV row {}: {line:?}", line_no + 1)))
            };
            t.push(parse(cols.next())?);
            x.push(parse(cols.next())?);
        }
        Self::new(t, x)
    }
}

impl From<&SamplePath> for PathData {
    fn from(p: &SamplePath) -> Self {
        Self { t: p.times(), x: p.values.clone() }
    }
}
