//! Desk-scale acceptance suite. Every criterion writes one PASS/FAIL line to
//! stderr, bypassing the test harness's output capture, then asserts.

use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use mbmlab::coefficients::{
    bound_constant_c1, default_shell_parameter, find_rapid_candidates, find_slow_candidates, k_index,
    lower_bound_hit_rate, DyadicPoint, GaussianField, RapidSearch, SlowSearch, StubField, LEMMA_THRESHOLD,
};
use mbmlab::hurst::HurstSpec;
use mbmlab::numeric::{linear_fit, median};
use mbmlab::regularity::{
    classify_point, estimate_exponent, lass_check, modulus_ratios, probe_design, recover_coefficient, ClassifyOptions,
    PointClass,
};
use mbmlab::simulate::{
    check_condition25, synth_bh, synth_fh, synth_frozen, synth_z, Grid, PathData, TimeWavelet, TruncationPolicy,
};
use mbmlab::wavelet_kernel::{biorthogonality_gram, dual_moment, meyer_amplitude, psi_frac, KernelTable, TableSpec};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

type Profile = Box<dyn Fn(f64) -> f64>;

fn report(id: u32, name: &str, pass: bool, detail: &str, started: Instant) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("[acceptance {id:>2}] {verdict} {name}: {detail} ({:.1}s)\n", started.elapsed().as_secs_f64());
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn table_for(thetas: &[f64]) -> KernelTable {
    KernelTable::build(&TableSpec::with_thetas(thetas.to_vec())).unwrap()
}

fn probes() -> Vec<f64> {
    (0..8).map(|i| (i as f64 + 0.5) / 8.0).collect()
}

#[test]
fn criterion_01_fbm_reduction() {
    let started = Instant::now();
    let table = table_for(&[0.3, 0.5, 0.7]);
    let grid = Grid::uniform(0.0, 1.0 / 1024.0, 1025).unwrap();
    let policy = TruncationPolicy::default();
    let lags = [1usize, 2, 4, 8, 16, 32, 64];
    let mut pass = true;
    let mut detail = Vec::new();
    for &h in &[0.3, 0.5, 0.7] {
        let spec = HurstSpec::constant(h).unwrap();
        let mut acc = vec![0.0; lags.len()];
        let paths = 512;
        for seed in 0..paths {
            let p = synth_bh(&GaussianField::new(seed), &spec, &table, &policy, &grid).unwrap();
            for (slot, &l) in acc.iter_mut().zip(&lags) {
                let n = p.values.len() - l;
                let v: f64 = (0..n).map(|a| (p.values[a + l] - p.values[a]).powi(2)).sum::<f64>() / n as f64;
                *slot += v / paths as f64;
            }
        }
        let x: Vec<f64> = lags.iter().map(|&l| (l as f64 / 1024.0).ln()).collect();
        let y: Vec<f64> = acc.iter().map(|v| v.ln()).collect();
        let slope = linear_fit(&x, &y).unwrap().0;
        pass &= (slope - 2.0 * h).abs() <= 0.1;
        detail.push(format!("h={h}: slope {slope:.3} (target {:.1})", 2.0 * h));
    }
    report(1, "FBM reduction", pass, &detail.join(", "), started);
}

#[test]
fn criterion_02_kernel_analytics() {
    let started = Instant::now();
    let partition = (0..400)
        .map(|i| {
            let xi = 0.05 + 60.0 * i as f64 / 399.0;
            let s: f64 = (-30..=30).map(|j| meyer_amplitude(2f64.powi(j) * xi).powi(2)).sum();
            (s - 1.0).abs()
        })
        .fold(0.0, f64::max);
    let mut symmetry: f64 = 0.0;
    for &theta in &[-1.6, -0.5, 0.3, 0.7] {
        for &t in &[-7.3, -2.0, -0.25, 0.0, 0.9, 4.5] {
            symmetry = symmetry.max((psi_frac(t, theta).unwrap() - psi_frac(-1.0 - t, theta).unwrap()).abs());
        }
    }
    let moment = [0.3, 0.5, 0.7].iter().map(|&th| dual_moment(th, 256.0).unwrap().abs()).fold(0.0, f64::max);
    let theta = 0.5;
    let gram_table = table_for(&[-theta - 1.0, theta]);
    let gram = biorthogonality_gram(&gram_table, (-2, 2), (-4, 4), theta, 1e-6).unwrap();
    let dev = gram.max_deviation_from_identity();
    let pass = partition < 1e-10 && symmetry < 1e-9 && moment < 1e-6 && dev < 1e-3;
    let detail = format!(
        "partition {partition:.1e}, symmetry {symmetry:.1e}, dual moment {moment:.1e}, Gram deviation {dev:.1e} ({}x{})",
        gram.size(),
        gram.size()
    );
    report(2, "kernel analytics", pass, &detail, started);
}

#[test]
fn criterion_03_coefficient_recovery() {
    let started = Instant::now();
    let t = 0.3;
    let grid = Grid::uniform(-16.0, 1.0 / 256.0, 32 * 256 + 1).unwrap();
    let policy = TruncationPolicy::new(-2, 6, 64).unwrap();
    let mut field = StubField::new();
    let known = [(2, 1.2), (3, -0.8), (4, 1.5)];
    for &(j, v) in &known {
        let k = k_index(t, j);
        field.set(j, k, v);
        field.set(j, k + 2, 0.6);
        field.set(j, k - 1, -0.9);
    }
    field.set(0, 0, 0.7);
    field.set(5, 3, -1.3);
    field.set(-1, 0, 0.5);
    let mut worst: f64 = 0.0;
    for &theta in &[0.4, 0.6] {
        let table = table_for(&[-theta - 1.0, theta]);
        let path = PathData::from(&synth_frozen(&field, theta, &table, &policy, &grid).unwrap());
        for &(j, v) in &known {
            let r = recover_coefficient(&path, &table, j, t, theta, 1e-2).unwrap();
            let want = (-(j as f64) * theta).exp2() * v;
            worst = worst.max((r.value / want - 1.0).abs());
        }
    }
    report(
        3,
        "coefficient recovery",
        worst < 0.05,
        &format!("worst relative error {worst:.2e} over j∈{{2,3,4}}, θ∈{{0.4,0.6}}"),
        started,
    );
}

#[test]
fn criterion_04_lemma_constant() {
    let started = Instant::now();
    let mut rates = Vec::new();
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let pts: Vec<DyadicPoint> = (0..100).map(|_| DyadicPoint::random(&mut rng, 4160)).collect();
        rates.push(lower_bound_hit_rate(&GaussianField::new(seed), &pts, 4096).unwrap());
    }
    let pass = rates.iter().all(|&r| r >= 0.99);
    report(4, "hit-rate lower bound", pass, &format!("threshold {LEMMA_THRESHOLD:.6}, rates {rates:?}"), started);
}

#[test]
fn criterion_05_envelope_saturation() {
    let started = Instant::now();
    let growth: Vec<f64> = (0..10u64)
        .map(|seed| {
            let f = GaussianField::new(seed);
            let small = bound_constant_c1(&f, (0, 10), (-(1 << 7), (1 << 7) - 1)).unwrap();
            let large = bound_constant_c1(&f, (0, 10), (-(1 << 11), (1 << 11) - 1)).unwrap();
            large / small
        })
        .collect();
    let med = median(&growth);
    report(
        5,
        "coefficient envelope saturation",
        med < 1.25,
        &format!("median growth 2^8→2^12 window: {med:.3}"),
        started,
    );
}

#[test]
fn criterion_06_slow_rapid_separation() {
    let started = Instant::now();
    let h = 0.5;
    let table = table_for(&[h]);
    let spec = HurstSpec::constant(h).unwrap();
    let policy = TruncationPolicy { j_max: 18, ..TruncationPolicy::default() };
    let m = default_shell_parameter(h).unwrap();
    let opts = ClassifyOptions::default();
    let interval = (0.125, 0.875);
    let mut pass = true;
    let mut detail = Vec::new();
    for seed in 0..3u64 {
        let f = GaussianField::new(seed);
        let slow = find_slow_candidates(&f, &SlowSearch::new(interval, m, 14, 32)).unwrap();
        let rapid = find_rapid_candidates(&f, &RapidSearch::new(interval, 14, 32)).unwrap();
        let classify = |t: f64| {
            let pts = Grid::points(probe_design(t, (4, 14), 64)).unwrap();
            let path = PathData::from(&synth_bh(&f, &spec, &table, &policy, &pts).unwrap());
            classify_point(&modulus_ratios(&path, t, h, (4, 14)).unwrap(), &opts)
        };
        let cs = classify(slow.best().unwrap().t);
        let cr = classify(rapid.best().unwrap().t);
        let ok = cs.slow_band < cr.slow_band && cr.rapid_band <= opts.band_factor && cr.slow_slope > 0.0;
        pass &= ok;
        detail.push(format!(
            "seed {seed}: slow band {:.2} vs {:.2}, rapid band {:.2}, slope {:.2}",
            cs.slow_band, cr.slow_band, cr.rapid_band, cr.slow_slope
        ));
    }
    report(6, "slow/rapid separation", pass, &detail.join("; "), started);
}

#[test]
fn criterion_07_classifier_oracles() {
    let started = Instant::now();
    let t = 0.3;
    let pts = probe_design(t, (4, 16), 8);
    let mut correct = 0;
    for &h in &[0.3, 0.5, 0.7] {
        let families: [(PointClass, Profile); 3] = [
            (PointClass::Slow, Box::new(move |r: f64| r.powf(h))),
            (PointClass::Rapid, Box::new(move |r: f64| r.powf(h) * (1.0 / r).ln().sqrt())),
            (PointClass::Ordinary, Box::new(move |r: f64| r.powf(h) * (1.0 / r).ln().ln().sqrt())),
        ];
        for (want, f) in families {
            let xs = pts.iter().map(|&s| if s == t { 0.0 } else { f((s - t).abs()) }).collect();
            let path = PathData::new(pts.clone(), xs).unwrap();
            let rep = modulus_ratios(&path, t, h, (4, 16)).unwrap();
            if classify_point(&rep, &ClassifyOptions::default()).tag == want {
                correct += 1;
            }
        }
    }
    report(7, "classifier oracle suite", correct == 9, &format!("{correct}/9 correct"), started);
}

#[test]
fn criterion_08_z_condition_table() {
    let started = Instant::now();
    let table = [
        (0.6, 0.7, true),
        (0.2, 0.9, false),
        (0.5, 0.5, true),
        (0.5, 0.8, true),
        (0.3, 0.7, false),
        (0.7, 0.9, true),
        (0.1, 0.2, true),
        (0.4, 0.6, true),
        (0.2, 0.3, true),
        (0.8, 0.95, true),
        (0.3, 0.9, false),
        (0.6, 0.99, false),
    ];
    let matches = table.iter().filter(|&&(a, b, want)| check_condition25(a, b).unwrap() == want).count();
    report(
        8,
        "Z-condition truth table",
        matches == table.len(),
        &format!("{matches}/{} entries match", table.len()),
        started,
    );
}

#[test]
fn criterion_09_exponent_tracking() {
    let started = Instant::now();
    let (a, b) = (0.5, 0.8);
    let spec = HurstSpec::sinusoidal(a, b).unwrap();
    let table = KernelTable::build(&TableSpec::for_hurst_range(a, b, false)).unwrap();
    let psi = TimeWavelet::meyer().unwrap();
    let policy = TruncationPolicy { j_max: 16, ..TruncationPolicy::default() };
    let n_range = (5, 12);
    let mut pts: Vec<f64> = probes().iter().flat_map(|&t| probe_design(t, n_range, 16)).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let grid = Grid::points(pts).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for model in ["f_H", "Z"] {
        let paths: Vec<PathData> = (0..32u64)
            .map(|s| {
                let f = GaussianField::new(s);
                let p = match model {
                    "f_H" => synth_fh(&f, &spec, &psi, &policy, &grid),
                    _ => synth_z(&f, &spec, &table, &policy, &grid),
                };
                PathData::from(&p.unwrap())
            })
            .collect();
        let worst = probes()
            .iter()
            .map(|&t| (estimate_exponent(&paths, t, n_range).unwrap().exponent - spec.eval(t)).abs())
            .fold(0.0, f64::max);
        pass &= worst <= 0.1;
        detail.push(format!("{model}: worst |Ĥ−H| {worst:.3}"));
    }
    report(9, "exponent tracking", pass, &detail.join(", "), started);
}

#[test]
fn criterion_10_lass_drift() {
    let started = Instant::now();
    let spec = HurstSpec::sinusoidal(0.3, 0.7).unwrap();
    let table = KernelTable::build(&TableSpec::for_hurst_range(0.3, 0.7, false)).unwrap();
    let policy = TruncationPolicy::default();
    let t = 0.25;
    let rhos: Vec<f64> = (2..=6).map(|i| (-(i as f64)).exp2()).collect();
    let s_grid = [-1.0, -0.5, -0.25, -0.125, 0.125, 0.25, 0.5, 1.0];
    let r = lass_check(
        |i, pts| {
            let g = Grid::points(pts.to_vec())?;
            Ok(synth_bh(&GaussianField::new(i as u64), &spec, &table, &policy, &g)?.values)
        },
        t,
        spec.eval(t),
        &rhos,
        &s_grid,
        256,
    )
    .unwrap();
    let target = 2.0 * spec.eval(t);
    let last = r.final_exponent();
    let path: Vec<String> = r.scales.iter().map(|s| format!("{:.3}", s.exponent)).collect();
    report(
        10,
        "LASS drift",
        (last - target).abs() <= 0.15,
        &format!("exponents for ρ=2^-2..2^-6: {} (target {target:.2})", path.join(" ")),
        started,
    );
}

fn determinism_run() -> Vec<u8> {
    static TABLE: OnceLock<KernelTable> = OnceLock::new();
    let table = TABLE.get_or_init(|| KernelTable::build(&TableSpec::for_hurst_range(0.3, 0.7, false)).unwrap());
    let spec = HurstSpec::sinusoidal(0.3, 0.7).unwrap();
    let f = GaussianField::new(77);
    let grid = Grid::uniform(0.0, 1.0 / 1024.0, 1025).unwrap();
    let policy = TruncationPolicy::default();
    let mut out = Vec::new();
    let bh = synth_bh(&f, &spec, table, &policy, &grid).unwrap();
    out.extend(bh.to_csv().into_bytes());
    out.extend(serde_json::to_vec(&bh.provenance).unwrap());
    out.extend(synth_z(&f, &spec, table, &policy, &grid).unwrap().to_csv().into_bytes());
    let slow = find_slow_candidates(&f, &SlowSearch::new((0.0, 1.0), 4.0, 10, 16)).unwrap();
    let rapid = find_rapid_candidates(&f, &RapidSearch::new((0.0, 1.0), 12, 16)).unwrap();
    out.extend(serde_json::to_vec(&slow).unwrap());
    out.extend(serde_json::to_vec(&rapid).unwrap());
    let data = PathData::from(&bh);
    let rep = modulus_ratios(&data, 0.5, spec.eval(0.5), (2, 7)).unwrap();
    out.extend(rep.to_csv().into_bytes());
    out
}

#[test]
fn criterion_11_determinism() {
    let started = Instant::now();
    let avail = std::thread::available_parallelism().map_or(1, |n| n.get());
    let runs: Vec<(usize, Vec<u8>)> = [1, 4, avail]
        .iter()
        .map(|&n| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
            (n, pool.install(determinism_run))
        })
        .collect();
    let identical = runs.windows(2).all(|w| w[0].1 == w[1].1);
    let sizes: Vec<String> = runs.iter().map(|(n, b)| format!("{n} workers: {} bytes", b.len())).collect();
    report(11, "determinism across worker counts", identical, &sizes.join(", "), started);
}
