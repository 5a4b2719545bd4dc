use serde::{Deserialize, Serialize};

use super::field::CoefficientField;
use crate::error::{Error, Result};

/// Index of the level-`j` dyadic interval containing `t`.
pub fn k_index(t: f64, j: i32) -> i64 {
    (t * 2f64.powi(j)).floor() as i64
}

/// Shell parameter suggested for a Hurst lower bound `a`: the smallest
/// integer `m` with `1/m < a` that also leaves a margin, `⌈2/a⌉`.
pub fn default_shell_parameter(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter(format!("lower Hurst bound {a} outside (0, 1)")));
    }
    Ok((2.0 / a).ceil())
}

/// Distances above this are clamped; no scan ever reaches them.
const DISTANCE_CAP: f64 = (1u64 << 62) as f64;

fn floor_pow2(x: f64) -> i64 {
    let v = x.exp2();
    if v >= DISTANCE_CAP {
        DISTANCE_CAP as i64
    } else {
        v.floor() as i64
    }
}

/// `Λ^l_{j,m}(t)`: the ring of indices at dyadic distance `l` from `k_j(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellSpec {
    pub m: f64,
    pub j: i32,
    pub center: i64,
    pub l: u32,
}

impl ShellSpec {
    pub fn new(t: f64, j: i32, m: f64, l: u32) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter(format!("shell parameter m={m} must be positive")));
        }
        Ok(Self { m, j, center: k_index(t, j), l })
    }

    /// Range of `|k − center|` covered, inclusive; `None` when the ring is empty.
    pub fn distance_range(&self) -> Option<(i64, i64)> {
        if self.l == 0 {
            return Some((0, 1));
        }
        let lo = floor_pow2(self.m * (self.l - 1) as f64) + 1;
        let hi = floor_pow2(self.m * self.l as f64);
        (lo <= hi).then_some((lo, hi))
    }

    /// The shell as at most two disjoint inclusive intervals, left one first.
    pub fn intervals(&self) -> Vec<(i64, i64)> {
        match self.distance_range() {
            None => Vec::new(),
            Some((0, hi)) => vec![(self.center - hi, self.center + hi)],
            Some((lo, hi)) => vec![(self.center - hi, self.center - lo), (self.center + lo, self.center + hi)],
        }
    }

    pub fn contains(&self, k: i64) -> bool {
        self.intervals().iter().any(|&(a, b)| a <= k && k <= b)
    }

    pub fn len(&self) -> u64 {
        self.intervals().iter().map(|&(a, b)| (b - a + 1) as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn lambda_shell(t: f64, j: i32, m: f64, l: u32) -> Result<Vec<(i64, i64)>> {
    Ok(ShellSpec::new(t, j, m, l)?.intervals())
}

/// Default shell cutoff for a scan to level `j_max`.
///
/// Nominally `⌈(j_max + 10)/m⌉`. It is lowered to the first `l` at which
/// `2^l` exceeds the Gaussian extreme level `√(2 ln(2·2^{ml}·(j_max+1)·10⁶))`:
/// past it, a shell entry lifts `μ` above 1 with probability below 10⁻⁶, so
/// scanning exponentially larger rings buys nothing.
pub fn default_l_max(m: f64, j_max: u32) -> u32 {
    let nominal = ((j_max as f64 + 10.0) / m).ceil() as u32;
    let mut l = 1u32;
    while l < nominal {
        let count = 2.0 * (m * l as f64).exp2() * (j_max as f64 + 1.0) * 1e6;
        if (l as f64).exp2() >= (2.0 * count.ln()).sqrt() {
            break;
        }
        l += 1;
    }
    l.min(nominal)
}

/// `max_{0≤l≤l_max, k∈Λ^l_{j,m}} |ε_{j,k}|·2^{−l}` around `center` at level `j`.
pub fn level_mu(field: &dyn CoefficientField, j: i32, center: i64, m: f64, l_max: u32) -> f64 {
    let mut best: f64 = 0.0;
    let mut buf = Vec::new();
    for l in 0..=l_max {
        let shell = ShellSpec { m, j, center, l };
        let weight = (-(l as f64)).exp2();
        for (a, b) in shell.intervals() {
            buf.resize((b - a + 1) as usize, 0.0);
            field.fill(j, a, &mut buf);
            let peak = buf.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            best = best.max(peak * weight);
        }
    }
    best
}

/// Smallest `μ` with `|ε_{j,k}| ≤ 2^l μ` on every scanned shell,
/// `0 ≤ j ≤ j_max`, `0 ≤ l ≤ l_max`.
pub fn slow_mu(field: &dyn CoefficientField, t: f64, m: f64, j_max: u32, l_max: u32) -> Result<f64> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidParameter(format!("shell parameter m={m} must be positive")));
    }
    Ok((0..=j_max as i32).map(|j| level_mu(field, j, k_index(t, j), m, l_max)).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{FnField, GaussianField, StubField};
    use proptest::prelude::*;

    #[test]
    fn k_index_examples() {
        assert_eq!(k_index(0.0, 5), 0);
        assert_eq!(k_index(0.75, 2), 3);
        assert_eq!(k_index(1.0 / 3.0, 4), 5);
        assert_eq!(k_index(-0.1, 0), -1);
    }

    #[test]
    fn shell_examples() {
        assert_eq!(lambda_shell(0.5, 3, 2.0, 0).unwrap(), vec![(3, 5)]);
        assert_eq!(lambda_shell(0.5, 3, 2.0, 1).unwrap(), vec![(0, 2), (6, 8)]);
        assert_eq!(lambda_shell(0.5, 3, 2.0, 2).unwrap(), vec![(-12, -1), (9, 20)]);
        assert!(lambda_shell(0.5, 3, 0.0, 1).is_err());
    }

    #[test]
    fn small_m_leaves_empty_rings() {
        // m = 0.5: 2^0 < |d| ≤ 2^0.5 has no integer solution
        let s = ShellSpec::new(0.5, 3, 0.5, 1).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn shells_partition_windows() {
        for &t in &[0.1, 0.5, 0.9] {
            for j in 0..=8 {
                for &m in &[1.0, 2.0, 4.0] {
                    let center = k_index(t, j);
                    let radius = 2f64.powf(8.0 * m) as i64;
                    // clipped intervals, sorted, must tile [center - radius, center + radius]
                    let mut pieces: Vec<(i64, i64)> = (0..=8)
                        .flat_map(|l| lambda_shell(t, j, m, l).unwrap())
                        .map(|(a, b)| (a.max(center - radius), b.min(center + radius)))
                        .filter(|(a, b)| a <= b)
                        .collect();
                    pieces.sort_unstable();
                    let mut next = center - radius;
                    for (a, b) in pieces {
                        assert_eq!(a, next, "gap or overlap: t={t} j={j} m={m}");
                        next = b + 1;
                    }
                    assert_eq!(next, center + radius + 1, "t={t} j={j} m={m}");
                }
            }
        }
    }

    #[test]
    fn slow_mu_examples() {
        let zero = StubField::new();
        assert_eq!(slow_mu(&zero, 0.3, 2.0, 6, 3).unwrap(), 0.0);
        let mut one = StubField::new();
        one.set(0, k_index(0.3, 0), 2.0);
        assert_eq!(slow_mu(&one, 0.3, 2.0, 6, 3).unwrap(), 2.0);
        // ε = 2^l exactly on shell l
        let t = 0.3;
        let m = 2.0;
        let ring = FnField(move |j: i32, k: i64| {
            let d = (k - k_index(t, j)).abs();
            (0..=20u32)
                .find(|&l| ShellSpec { m, j, center: 0, l }.contains(d))
                .map(|l| (l as f64).exp2())
                .unwrap_or(0.0)
        });
        assert_eq!(slow_mu(&ring, t, m, 5, 4).unwrap(), 1.0);
    }

    #[test]
    fn default_l_max_is_capped() {
        assert_eq!(default_l_max(2.0, 14), 3);
        assert!(default_l_max(2.0, 14) <= 12);
        assert_eq!(default_l_max(100.0, 0), 1);
    }

    proptest! {
        #[test]
        fn slow_mu_monotone(seed in 0u64..1000, t in 0.0f64..1.0, j in 0u32..6, l in 0u32..3) {
            let f = GaussianField::new(seed);
            let base = slow_mu(&f, t, 2.0, j, l).unwrap();
            prop_assert!(slow_mu(&f, t, 2.0, j + 1, l).unwrap() >= base);
            prop_assert!(slow_mu(&f, t, 2.0, j, l + 1).unwrap() >= base);
        }
    }
}
