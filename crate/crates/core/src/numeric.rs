//! Small numeric helpers shared across modules.

use sha2::{Digest, Sha256};

/// Least-squares line through `(x, y)`; returns `(slope, intercept)`.
/// `None` when fewer than two points or all `x` coincide.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = x[..n].iter().sum::<f64>() / nf;
    let my = y[..n].iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        sxx += dx * dx;
        sxy += dx * (y[i] - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Smallest factor `f >= 1` such that every value lies in `[median/f, median*f]`.
/// Infinite when the median is zero or a value is non-positive while others are not.
pub fn band_factor(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let med = median(values);
    if values.iter().all(|&v| v == 0.0) {
        return 1.0;
    }
    if med <= 0.0 {
        return f64::INFINITY;
    }
    values.iter().map(|&v| if v <= 0.0 { f64::INFINITY } else { (v / med).max(med / v) }).fold(1.0, f64::max)
}

/// Pairwise (tree) summation; the result depends only on the slice order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Fixed 17-significant-digit rendering used for every CSV value.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (s, i) = linear_fit(&x, &y).unwrap();
        assert!((s - 2.5).abs() < 1e-14 && (i + 1.0).abs() < 1e-14);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 2.0]).is_none());
    }

    #[test]
    fn band_factor_of_constant_is_one() {
        assert_eq!(band_factor(&[2.0, 2.0, 2.0]), 1.0);
        assert!((band_factor(&[1.0, 2.0, 4.0]) - 2.0).abs() < 1e-15);
        assert_eq!(band_factor(&[0.0, 0.0]), 1.0);
    }

    #[test]
    fn pairwise_matches_naive_on_exact_values() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
    }

    #[test]
    fn fmt17_round_trips() {
        let v = 0.1 + 0.2;
        assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
    }
}
