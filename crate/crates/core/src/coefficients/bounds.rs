use rayon::prelude::*;

use super::field::{CoefficientField, DyadicPoint};
use crate::error::{Error, Result};

/// `2^{−3/2}√π`: the almost-sure lower bound for `limsup_j |ε_{j,k_j(t)}|`
/// holding for every `t` simultaneously.
pub const LEMMA_THRESHOLD: f64 = 0.626_657_068_657_750_2;

/// `max |ε_{j,k}| / √log(3 + |j| + |k|)` over the window.
pub fn bound_constant_c1(field: &dyn CoefficientField, j_window: (i32, i32), k_window: (i64, i64)) -> Result<f64> {
    if j_window.0 > j_window.1 || k_window.0 > k_window.1 {
        return Err(Error::InvalidParameter("empty coefficient window".into()));
    }
    let width = (k_window.1 - k_window.0 + 1) as usize;
    let per_level: Vec<f64> = (j_window.0..=j_window.1)
        .into_par_iter()
        .map(|j| {
            let mut buf = vec![0.0; width];
            field.fill(j, k_window.0, &mut buf);
            buf.iter()
                .enumerate()
                .map(|(i, e)| {
                    let k = k_window.0 + i as i64;
                    e.abs() / (3.0 + j.unsigned_abs() as f64 + k.unsigned_abs() as f64).ln().sqrt()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(per_level.into_iter().fold(0.0, f64::max))
}

/// Fraction of `points` whose column maximum `max_{0≤j≤j_max} |ε_{j,k_j(t)}|`
/// reaches [`LEMMA_THRESHOLD`].
pub fn lower_bound_hit_rate(field: &dyn CoefficientField, points: &[DyadicPoint], j_max: u32) -> Result<f64> {
    if j_max < 256 {
        return Err(Error::InvalidParameter(format!("hit-rate depth {j_max} below 256")));
    }
    if points.is_empty() {
        return Err(Error::InvalidParameter("no sample points".into()));
    }
    let hits = points.par_iter().filter(|p| field.column(p, j_max).iter().any(|e| e.abs() >= LEMMA_THRESHOLD)).count();
    Ok(hits as f64 / points.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{GaussianField, StubField};
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    #[test]
    fn threshold_value() {
        let exact = 2f64.powf(-1.5) * std::f64::consts::PI.sqrt();
        assert!((LEMMA_THRESHOLD - exact).abs() < 1e-15);
    }

    #[test]
    fn c1_singleton_and_zero() {
        let f = GaussianField::new(5);
        let v = bound_constant_c1(&f, (0, 0), (0, 0)).unwrap();
        assert_eq!(v, f.eps(0, 0).abs() / 3f64.ln().sqrt());
        assert_eq!(bound_constant_c1(&StubField::new(), (0, 4), (-10, 10)).unwrap(), 0.0);
        assert!(bound_constant_c1(&f, (1, 0), (0, 0)).is_err());
    }

    #[test]
    fn hit_rate_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pts: Vec<_> = (0..20).map(|_| DyadicPoint::random(&mut rng, 512)).collect();
        assert_eq!(lower_bound_hit_rate(&StubField::new(), &pts, 300).unwrap(), 0.0);
        assert_eq!(lower_bound_hit_rate(&GaussianField::new(1), &pts, 300).unwrap(), 1.0);
        assert!(lower_bound_hit_rate(&GaussianField::new(1), &pts, 10).is_err());
    }
}
