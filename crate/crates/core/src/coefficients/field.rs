use std::collections::HashMap;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Source of the wavelet coefficients `ε_{j,k}`.
///
/// Implementations must be pure: the same `(j, k)` always yields the same value.
pub trait CoefficientField: Sync {
    fn eps(&self, j: i32, k: i64) -> f64;

    /// Fills `out[i] = ε_{j, k_start + i}`.
    fn fill(&self, j: i32, k_start: i64, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.eps(j, k_start + i as i64);
        }
    }

    /// `ε_{j, k_j(t)}` for `j = 0..=j_max` along the dyadic expansion of `t`,
    /// including levels whose index no longer fits in 64 bits.
    fn column(&self, point: &DyadicPoint, j_max: u32) -> Vec<f64> {
        (0..=j_max)
            .map(|j| match point.k(j) {
                Some(k) => self.eps(j as i32, k),
                None => 0.0,
            })
            .collect()
    }

    /// Short identifier recorded in provenance.
    fn describe(&self) -> String;
}

impl<F: CoefficientField + ?Sized> CoefficientField for &F {
    fn eps(&self, j: i32, k: i64) -> f64 {
        (**self).eps(j, k)
    }
    fn fill(&self, j: i32, k_start: i64, out: &mut [f64]) {
        (**self).fill(j, k_start, out)
    }
    fn column(&self, point: &DyadicPoint, j_max: u32) -> Vec<f64> {
        (**self).column(point, j_max)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// Deterministic i.i.d. N(0, 1) field keyed by a 64-bit seed.
///
/// Each `(j, k)` maps to a fixed position of a ChaCha8 keystream (stream `j`,
/// word offset derived from `k`), so queries are stateless and any subset of
/// indices can be generated independently. Indices deeper than 62 levels
/// along a dyadic expansion are keyed by a SHA-256 chain over the extra bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussianField {
    seed: u64,
}

const DEEP_LEVEL: u32 = 62;

impl GaussianField {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn rng_at(&self, j: i32, k: i64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(zigzag(j as i64));
        let offset = (k as i128 + (1i128 << 63)) as u128;
        rng.set_word_pos(offset * 2);
        rng
    }

    fn deep_root(&self, k: i64) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"mbmlab-deep");
        h.update(self.seed.to_le_bytes());
        h.update(k.to_le_bytes());
        h.finalize().into()
    }
}

fn deep_step(state: &[u8; 32], bit: bool) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(state);
    h.update([bit as u8]);
    h.finalize().into()
}

fn deep_value(state: &[u8; 32]) -> f64 {
    let mut word = [0u8; 8];
    word.copy_from_slice(&state[..8]);
    inverse_normal(unit_open(u64::from_le_bytes(word)))
}

fn zigzag(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

/// Uniform in the open interval (0, 1) from the top 53 bits.
fn unit_open(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

impl CoefficientField for GaussianField {
    fn eps(&self, j: i32, k: i64) -> f64 {
        let mut rng = self.rng_at(j, k);
        inverse_normal(unit_open(rng.next_u64()))
    }

    fn fill(&self, j: i32, k_start: i64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        let mut rng = self.rng_at(j, k_start);
        for o in out.iter_mut() {
            *o = inverse_normal(unit_open(rng.next_u64()));
        }
    }

    fn column(&self, point: &DyadicPoint, j_max: u32) -> Vec<f64> {
        let mut out = Vec::with_capacity(j_max as usize + 1);
        let mut state = None;
        for j in 0..=j_max {
            if j <= DEEP_LEVEL {
                out.push(self.eps(j as i32, point.k(j).expect("fits below the deep level")));
            } else {
                let next = match state {
                    None => {
                        let root = self.deep_root(point.k(DEEP_LEVEL).expect("fits"));
                        deep_step(&root, point.bit(j - 1))
                    }
                    Some(s) => deep_step(&s, point.bit(j - 1)),
                };
                out.push(deep_value(&next));
                state = Some(next);
            }
        }
        out
    }

    fn describe(&self) -> String {
        format!("gaussian:chacha8:{}", self.seed)
    }
}

/// Sparse field for tests and diagnostics: listed entries, zeros elsewhere.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StubField {
    entries: HashMap<(i32, i64), f64>,
}

impl StubField {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, j: i32, k: i64, value: f64) -> &mut Self {
        self.entries.insert((j, k), value);
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { entries: self.entries.iter().map(|(&key, &v)| (key, factor * v)).collect() }
    }

    /// Parses `{"j,k": value, ...}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: HashMap<String, f64> = serde_json::from_str(text)?;
        let mut out = Self::new();
        for (key, value) in raw {
            let (j, k) = key
                .split_once(',')
                .and_then(|(j, k)| Some((j.trim().parse::<i32>().ok()?, k.trim().parse::<i64>().ok()?)))
                .ok_or_else(|| Error::InvalidParameter(format!("stub field key {key:?} is not \"j,k\"")))?;
            out.set(j, k, value);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut keys: Vec<_> = self.entries.keys().copied().collect();
        keys.sort_unstable();
        let map: serde_json::Map<String, serde_json::Value> = keys
            .into_iter()
            .map(|(j, k)| (format!("{j},{k}"), serde_json::Value::from(self.entries[&(j, k)])))
            .collect();
        Ok(serde_json::to_string(&map)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl CoefficientField for StubField {
    fn eps(&self, j: i32, k: i64) -> f64 {
        self.entries.get(&(j, k)).copied().unwrap_or(0.0)
    }

    fn describe(&self) -> String {
        let json = self.to_json().unwrap_or_default();
        format!("stub:{}", crate::numeric::sha256_hex(json.as_bytes()))
    }
}

/// Field defined by a closure; handy for constructed examples.
pub struct FnField<F>(pub F);

impl<F: Fn(i32, i64) -> f64 + Sync> CoefficientField for FnField<F> {
    fn eps(&self, j: i32, k: i64) -> f64 {
        (self.0)(j, k)
    }

    fn describe(&self) -> String {
        "closure".to_string()
    }
}

/// A point of [0, 1) given by its binary digits, so that `k_j(t)` is
/// available at arbitrary depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicPoint {
    /// Digits after the binary point, most significant first, 64 per word.
    words: Vec<u64>,
}

impl DyadicPoint {
    /// Exact expansion of a double in [0, 1); digits past its mantissa are zero.
    pub fn from_f64(t: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("dyadic point {t} outside [0, 1)")));
        }
        let scaled = t * 2f64.powi(64);
        Ok(Self { words: vec![scaled as u64] })
    }

    /// Uniformly random digits, `bits` of them (rounded up to whole words).
    pub fn random<R: RngCore>(rng: &mut R, bits: u32) -> Self {
        let n = (bits as usize).div_ceil(64).max(1);
        Self { words: (0..n).map(|_| rng.next_u64()).collect() }
    }

    /// `i`-th binary digit after the point (0-based); zero past the stored digits.
    pub fn bit(&self, i: u32) -> bool {
        let w = (i / 64) as usize;
        match self.words.get(w) {
            Some(word) => (word >> (63 - (i % 64))) & 1 == 1,
            None => false,
        }
    }

    /// `k_j(t)` when it fits in an `i64` (`j ≤ 62`).
    pub fn k(&self, j: u32) -> Option<i64> {
        if j > DEEP_LEVEL {
            return None;
        }
        if j == 0 {
            return Some(0);
        }
        Some((self.words[0] >> (64 - j)) as i64)
    }

    pub fn to_f64(&self) -> f64 {
        self.words[0] as f64 / 2f64.powi(64)
    }
}

/// Inverse of the standard normal CDF (Wichura's AS 241, PPND16), accurate to
/// about 1e-16 relative on the open unit interval.
#[allow(clippy::excessive_precision)]
pub fn inverse_normal(p: f64) -> f64 {
    const SPLIT1: f64 = 0.425;
    const SPLIT2: f64 = 5.0;
    const CONST1: f64 = 0.180625;
    const CONST2: f64 = 1.6;
    let q = p - 0.5;
    if q.abs() <= SPLIT1 {
        let r = CONST1 - q * q;
        return q
            * (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r
                + 45921.953931549871457)
                * r
                + 13731.693765509461125)
                * r
                + 1971.5909503065514427)
                * r
                + 133.14166789178437745)
                * r
                + 3.387132872796366608)
            / (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r
                + 21213.794301586595867)
                * r
                + 5394.1960214247511077)
                * r
                + 687.1870074920579083)
                * r
                + 42.313330701600911252)
                * r
                + 1.0);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= SPLIT2 {
        let r = r - CONST2;
        (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r
            + 1.27045825245236838258)
            * r
            + 3.64784832476320460504)
            * r
            + 5.7694972214606914055)
            * r
            + 4.6303378461565452959)
            * r
            + 1.42343711074968357734)
            / (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r
                + 0.14810397642748007459)
                * r
                + 0.68976733498510000455)
                * r
                + 1.6763848301838038494)
                * r
                + 2.05319162663775882187)
                * r
                + 1.0)
    } else {
        let r = r - SPLIT2;
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r
            + 0.026532189526576123093)
            * r
            + 0.29656057182850489123)
            * r
            + 1.7848265399172913358)
            * r
            + 5.4637849111641143699)
            * r
            + 6.6579046435011037772)
            / (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r
                + 7.868691311456132591e-4)
                * r
                + 0.0148753612908506148525)
                * r
                + 0.13692988092273580531)
                * r
                + 0.59983220655588793769)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}
