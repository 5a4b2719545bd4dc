use std::sync::OnceLock;

use mbmlab::coefficients::{FnField, GaussianField, StubField};
use mbmlab::hurst::HurstSpec;
use mbmlab::regularity::{estimate_exponent, probe_design};
use mbmlab::simulate::{synth_bh, synth_fh, synth_z, Grid, PathData, TimeWavelet, TruncationPolicy};
use mbmlab::wavelet_kernel::{KernelTable, TableSpec};
use proptest::prelude::*;

fn table() -> &'static KernelTable {
    static T: OnceLock<KernelTable> = OnceLock::new();
    T.get_or_init(|| KernelTable::build(&TableSpec::for_hurst_range(0.3, 0.7, false)).unwrap())
}

fn coarse_grid() -> Grid {
    Grid::uniform(0.0, 1.0 / 64.0, 65).unwrap()
}

#[test]
fn zero_field_gives_zero_paths() {
    let h = HurstSpec::sinusoidal(0.3, 0.7).unwrap();
    let zero = StubField::new();
    let policy = TruncationPolicy::new(-4, 8, 16).unwrap();
    let g = coarse_grid();
    let psi = TimeWavelet::meyer_from(table()).or_else(|_| TimeWavelet::meyer()).unwrap();
    assert!(synth_bh(&zero, &h, table(), &policy, &g).unwrap().values.iter().all(|&v| v == 0.0));
    assert!(synth_z(&zero, &h, table(), &policy, &g).unwrap().values.iter().all(|&v| v == 0.0));
    assert!(synth_fh(&zero, &h, &psi, &policy, &g).unwrap().values.iter().all(|&v| v == 0.0));
}

#[test]
fn raising_the_finest_level_converges() {
    let h = HurstSpec::constant(0.5).unwrap();
    let f = GaussianField::new(3);
    let g = coarse_grid();
    let path = |j_max: i32| synth_bh(&f, &h, table(), &TruncationPolicy::new(-8, j_max, 64).unwrap(), &g).unwrap();
    let reference = path(16);
    let gap = |p: &mbmlab::simulate::SamplePath| {
        p.values.iter().zip(&reference.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let gaps: Vec<f64> = [6, 9, 12].iter().map(|&j| gap(&path(j))).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    // increments at level j scale like 2^{-j/2}
    assert!(gaps[2] < 0.1, "{gaps:?}");
    let tails: Vec<f64> = [6, 9, 12].iter().map(|&j| path(j).provenance.tail_bound).collect();
    assert!(tails[0] > tails[1] && tails[1] > tails[2], "{tails:?}");
}

#[test]
fn widening_the_window_converges() {
    let h = HurstSpec::constant(0.4).unwrap();
    let f = GaussianField::new(5);
    let g = coarse_grid();
    let path = |w: i64| synth_bh(&f, &h, table(), &TruncationPolicy::new(-8, 8, w).unwrap(), &g).unwrap().values;
    let wide = path(60);
    let diff = |w: i64| path(w).iter().zip(&wide).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff(8) > diff(32), "{} vs {}", diff(8), diff(32));
    assert!(diff(32) < 1e-3);
}

#[test]
fn difference_of_z_and_mbm_is_smoother_than_b() {
    let (a, b) = (0.6, 0.7);
    let h = HurstSpec::sinusoidal(a, b).unwrap();
    let table = KernelTable::build(&TableSpec::for_hurst_range(a, b, false)).unwrap();
    let policy = TruncationPolicy { j_max: 16, ..TruncationPolicy::default() };
    let probes = [0.1875, 0.5625, 0.8125];
    let mut pts: Vec<f64> = probes.iter().flat_map(|&t| probe_design(t, (5, 12), 16)).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let grid = Grid::points(pts).unwrap();
    let paths: Vec<PathData> = (0..8u64)
        .map(|s| {
            let f = GaussianField::new(s);
            let z = synth_z(&f, &h, &table, &policy, &grid).unwrap();
            let bh = synth_bh(&f, &h, &table, &policy, &grid).unwrap();
            PathData::new(grid.to_vec(), z.values.iter().zip(&bh.values).map(|(x, y)| x - y).collect()).unwrap()
        })
        .collect();
    for &t in &probes {
        let fit = estimate_exponent(&paths, t, (5, 12)).unwrap();
        assert!(fit.exponent > b, "t={t}: exponent {}", fit.exponent);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn synthesis_is_linear_in_the_field(s1 in 0u64..1000, s2 in 0u64..1000, c in -3.0f64..3.0) {
        let h = HurstSpec::sinusoidal(0.3, 0.7).unwrap();
        let policy = TruncationPolicy::new(-3, 6, 12).unwrap();
        let g = Grid::uniform(0.1, 0.05, 16).unwrap();
        let (f1, f2) = (GaussianField::new(s1), GaussianField::new(s2));
        let combo = FnField(|j: i32, k: i64| c * f1.eps(j, k) + f2.eps(j, k));
        use mbmlab::coefficients::CoefficientField;
        let a = synth_z(&f1, &h, table(), &policy, &g).unwrap().values;
        let b = synth_z(&f2, &h, table(), &policy, &g).unwrap().values;
        let m = synth_z(&combo, &h, table(), &policy, &g).unwrap().values;
        for i in 0..a.len() {
            let want = c * a[i] + b[i];
            prop_assert!((m[i] - want).abs() <= 1e-12 * (1.0 + want.abs()), "{} vs {}", m[i], want);
        }
    }
}
