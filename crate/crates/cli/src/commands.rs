use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mbmlab::coefficients::{
    find_rapid_candidates, find_slow_candidates, CoefficientField, GaussianField, RapidObjective, RapidSearch,
    SlowSearch, StubField,
};
use mbmlab::hurst::{check_condition1, check_condition2, check_condition3, HurstSpec};
use mbmlab::numeric::{fmt17, sha256_hex};
use mbmlab::regularity::{classify_point, lass_check, modulus_ratios, ClassifyOptions, OscillationReport};
use mbmlab::simulate::{
    check_condition25, synth_bh, synth_fh, synth_z, Grid, PathData, SamplePath, TabulatedWavelet, TimeWavelet,
    TruncationPolicy,
};
use mbmlab::wavelet_kernel::{KernelTable, TableSpec};
use rayon::prelude::*;
use serde_json::json;

use crate::args::*;
use crate::plot::ratio_svg;
use crate::record::Outcome;

/// Directory holding kernel tables reused across runs.
pub const TABLE_DIR_VAR: &str = "MBMLAB_TABLE_DIR";

const MEYER_THETA: f64 = -0.5;

pub fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::KernelTable(a) => kernel_table(a),
        Command::ValidateHurst(a) => validate_hurst(a),
        Command::Simulate(a) => simulate(a),
        Command::FindPoints(a) => find_points(a),
        Command::Analyze(a) => analyze(a),
        Command::Lass(a) => lass(a),
        Command::CheckZCondition(a) => check_z(a),
        Command::Reproduce(_) => unreachable!("reproduce is dispatched separately"),
    }
}

/// Rewrites input paths as absolute paths so a recorded config runs from anywhere.
pub fn absolutize(command: &mut Command) {
    let fix = |p: &mut PathBuf| {
        if let Ok(abs) = fs::canonicalize(&*p) {
            *p = abs;
        }
    };
    let fix_opt = |p: &mut Option<PathBuf>| {
        if let Some(p) = p {
            fix(p);
        }
    };
    match command {
        Command::KernelTable(a) => fix_opt(&mut a.input),
        Command::ValidateHurst(a) => fix(&mut a.spec),
        Command::Simulate(a) => {
            fix(&mut a.hurst);
            fix_opt(&mut a.stub_field);
            fix_opt(&mut a.table);
            fix_opt(&mut a.wavelet);
        }
        Command::FindPoints(a) => fix_opt(&mut a.stub_field),
        Command::Analyze(a) => {
            fix(&mut a.path);
            fix_opt(&mut a.hurst);
        }
        Command::Lass(a) => {
            fix(&mut a.hurst);
            fix_opt(&mut a.table);
        }
        Command::CheckZCondition(_) => {}
        Command::Reproduce(a) => fix(&mut a.config),
    }
}

fn kernel_table(args: &KernelTableArgs) -> Result<Outcome> {
    let mut out = Outcome::default();
    let table = match &args.input {
        Some(path) => {
            let text = String::from_utf8(out.input_file(path)?).context("kernel table is not UTF-8")?;
            KernelTable::from_json(&text).with_context(|| format!("loading {}", path.display()))?
        }
        None => {
            let mut spec = match (&args.hurst_range, &args.thetas) {
                (Some(Pair(lo, hi)), _) => TableSpec::for_hurst_range(*lo, *hi, args.dual),
                (None, Some(thetas)) => TableSpec::with_thetas(thetas.clone()),
                (None, None) => unreachable!("clap requires a source"),
            };
            spec.dt = args.dt;
            spec.t_half_width = args.half_width;
            spec.tolerance = args.tolerance;
            let table = obtain_table(&spec)?;
            out.output("kernel_table.json", table.to_json()?);
            table
        }
    };
    let (t_lo, t_hi) = table.t_range();
    let (th_lo, th_hi) = table.theta_range();
    let summary = json!({
        "digest": table.digest(),
        "profile": table.profile,
        "t_range": [t_lo, t_hi],
        "dt": table.dt,
        "n_t": table.n_t,
        "theta_range": [th_lo, th_hi],
        "n_theta": table.thetas.len(),
        "tolerance": table.tolerance,
        "interpolation_error": table.interpolation_error,
        "quadrature_error": table.quadrature_error,
    });
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    out.output("kernel_table_summary.json", text.clone());
    out.stdout = text;
    Ok(out)
}

fn validate_hurst(args: &ValidateHurstArgs) -> Result<Outcome> {
    let mut out = Outcome::default();
    let spec = read_hurst(&mut out, &args.spec)?;
    let mut csv = String::from("t,cond1,cond2,cond3,gamma,c_t\n");
    for &t in &args.points {
        let c1 = check_condition1(&spec, t, args.probe_radius, args.probes, args.slack)?;
        let c2 = check_condition2(&spec, t, args.probe_radius, args.probes, args.slack)?;
        let c3 = check_condition3(&spec, t, args.probe_radius, args.probes)?;
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt17(t),
            c1.holds,
            c2.holds,
            c3.holds,
            fmt17(c1.gamma),
            fmt17(c1.c_t)
        ));
    }
    out.output("validate_hurst.csv", csv.clone());
    out.stdout = csv;
    Ok(out)
}

fn simulate(args: &SimulateArgs) -> Result<Outcome> {
    let mut out = Outcome::default();
    let hurst = read_hurst(&mut out, &args.hurst)?;
    let field = read_field(&mut out, args.stub_field.as_deref(), args.seed)?;
    let grid = Grid::uniform(args.grid.t0, args.grid.dt, args.grid.n)?;
    let policy = policy(args.policy)?;
    let path = match args.model {
        ModelArg::Bh | ModelArg::Z => {
            let table = model_table(&mut out, &hurst, args.table.as_deref())?;
            if args.model == ModelArg::Bh {
                synth_bh(field.as_ref(), &hurst, &table, &policy, &grid)?
            } else {
                synth_z(field.as_ref(), &hurst, &table, &policy, &grid)?
            }
        }
        ModelArg::Fh => {
            let psi = match (&args.wavelet, &args.table) {
                (Some(path), _) => {
                    let text = String::from_utf8(out.input_file(path)?).context("wavelet file is not UTF-8")?;
                    TimeWavelet::Tabulated(TabulatedWavelet::from_json(&text)?)
                }
                (None, Some(path)) => TimeWavelet::meyer_from(&load_table(&mut out, path)?)?,
                (None, None) => TimeWavelet::meyer_from(&obtain_table(&TableSpec::with_thetas(vec![MEYER_THETA]))?)?,
            };
            synth_fh(field.as_ref(), &hurst, &psi, &policy, &grid)?
        }
    };
    emit_path(&mut out, &path)?;
    Ok(out)
}

fn emit_path(out: &mut Outcome, path: &SamplePath) -> Result<()> {
    out.output("path.csv", path.to_csv());
    out.output("path.json", serde_json::to_string_pretty(&path.provenance)? + "\n");
    let p = &path.provenance;
    out.stdout = format!(
        "{} samples of {} written; tail bound {:.3e}, skipped terms {}\n",
        path.len(),
        p.model.name(),
        p.tail_bound,
        p.skipped_terms
    );
    for w in &p.warnings {
        out.stdout.push_str(&format!("warning: {w}\n"));
    }
    Ok(())
}

fn find_points(args: &FindPointsArgs) -> Result<Outcome> {
    let mut out = Outcome::default();
    let field = read_field(&mut out, args.stub_field.as_deref(), args.seed)?;
    let interval = (args.interval.0, args.interval.1);
    let report = match args.mode {
        SearchMode::Slow => {
            find_slow_candidates(field.as_ref(), &SlowSearch::new(interval, args.m, args.jmax, args.beam))?
        }
        SearchMode::Rapid => {
            let mut params = RapidSearch::new(interval, args.jmax, args.beam);
            if let Some(j) = args.j_from {
                params.j_from = j;
            }
            params.objective = match args.objective {
                ObjectiveArg::Peak => RapidObjective::Peak,
                ObjectiveArg::Sustained => RapidObjective::Sustained,
            };
            find_rapid_candidates(field.as_ref(), &params)?
        }
    };
    let mut csv = String::from("rank,t,mu_or_score,j_max\n");
    for (i, c) in report.candidates.iter().enumerate() {
        csv.push_str(&format!("{},{},{},{}\n", i + 1, fmt17(c.t), fmt17(c.score), report.j_max));
    }
    out.output("points.csv", csv.clone());
    out.output("search.json", serde_json::to_string_pretty(&report)? + "\n");
    out.stdout = csv;
    Ok(out)
}

fn analyze(args: &AnalyzeArgs) -> Result<Outcome> {
    let mut out = Outcome::default();
    let text = String::from_utf8(out.input_file(&args.path)?).context("path file is not UTF-8")?;
    let path = PathData::from_csv(&text)?;
    let hurst = match &args.hurst {
        Some(p) => Some(read_hurst(&mut out, p)?),
        None => None,
    };
    let exponent = |t: f64| hurst.as_ref().map_or_else(|| args.h.expect("clap requires --hurst or --h"), |s| s.eval(t));
    if args.nmin >= args.nmax {
        bail!("--nmin {} must be below --nmax {}", args.nmin, args.nmax);
    }
    let options = ClassifyOptions {
        growth_window: args.growth_window,
        band_factor: args.band_factor,
        slope_threshold: args.slope_threshold,
    };
    let reports: Vec<OscillationReport> = args
        .points
        .par_iter()
        .map(|&t| modulus_ratios(&path, t, exponent(t), (args.nmin, args.nmax)).with_context(|| format!("point t={t}")))
        .collect::<Result<_>>()?;

    let mut summary = Vec::with_capacity(reports.len());
    let mut tagged = Vec::with_capacity(reports.len());
    for (i, report) in reports.into_iter().enumerate() {
        let class = classify_point(&report, &options);
        let file = format!("point_{i:03}.csv");
        out.output(file.clone(), report.to_csv());
        summary.push(json!({
            "index": i,
            "t": report.t,
            "t_grid": report.t_grid,
            "h": report.h,
            "tag": class.tag.name(),
            "classification": class,
            "csv": file,
        }));
        out.stdout.push_str(&format!("{} {}\n", fmt17(report.t), class.tag.name()));
        let mut report = report;
        report.tag = Some(class.tag);
        tagged.push(report);
    }
    let doc = json!({
        "path_samples": path.t.len(),
        "n_range": [args.nmin, args.nmax],
        "options": options,
        "points": summary,
    });
    out.output("analyze_summary.json", serde_json::to_string_pretty(&doc)? + "\n");
    if args.plot {
        out.output("analyze.svg", ratio_svg(&tagged));
    }
    Ok(out)
}

fn lass(args: &LassArgs) -> Result<Outcome> {
    let mut out = Outcome::default();
    let hurst = read_hurst(&mut out, &args.hurst)?;
    let policy = policy(args.policy)?;
    let table = match args.model {
        ModelArg::Bh | ModelArg::Z => model_table(&mut out, &hurst, args.table.as_deref())?,
        ModelArg::Fh => bail!("lass supports the bh and z models"),
    };
    let model = args.model;
    let sample = |i: usize, pts: &[f64]| {
        let field = GaussianField::new(args.seed.wrapping_add(i as u64));
        let grid = Grid::points(pts.to_vec())?;
        let path = if model == ModelArg::Bh {
            synth_bh(&field, &hurst, &table, &policy, &grid)?
        } else {
            synth_z(&field, &hurst, &table, &policy, &grid)?
        };
        Ok(path.values)
    };
    let report = lass_check(sample, args.t, hurst.eval(args.t), &args.rhos, &args.s, args.paths)?;
    let mut csv = String::from("rho,s,variance\n");
    for scale in &report.scales {
        for (s, v) in report.s_grid.iter().zip(&scale.variances) {
            csv.push_str(&format!("{},{},{}\n", fmt17(scale.rho), fmt17(*s), fmt17(*v)));
        }
    }
    out.output("lass.csv", csv);
    out.output("lass.json", serde_json::to_string_pretty(&report)? + "\n");
    out.stdout = report.scales.iter().map(|s| format!("rho={} exponent={:.4}\n", fmt17(s.rho), s.exponent)).collect();
    Ok(out)
}

fn check_z(args: &CheckZArgs) -> Result<Outcome> {
    let holds = check_condition25(args.a, args.b)?;
    let mut out = Outcome::default();
    out.output(
        "z_condition.json",
        serde_json::to_string_pretty(&json!({"a": args.a, "b": args.b, "holds": holds}))? + "\n",
    );
    out.stdout = format!("{holds}\n");
    Ok(out)
}

fn read_hurst(out: &mut Outcome, path: &Path) -> Result<HurstSpec> {
    let text = String::from_utf8(out.input_file(path)?).context("Hurst spec is not UTF-8")?;
    HurstSpec::from_json(&text).with_context(|| format!("Hurst spec {}", path.display()))
}

fn read_field(out: &mut Outcome, stub: Option<&Path>, seed: u64) -> Result<Box<dyn CoefficientField>> {
    Ok(match stub {
        Some(path) => {
            let text = String::from_utf8(out.input_file(path)?).context("stub field is not UTF-8")?;
            Box::new(StubField::from_json(&text).with_context(|| format!("stub field {}", path.display()))?)
        }
        None => Box::new(GaussianField::new(seed)),
    })
}

fn policy(p: PolicyArg) -> Result<TruncationPolicy> {
    Ok(TruncationPolicy::new(p.j_min, p.j_max, p.window)?)
}

fn load_table(out: &mut Outcome, path: &Path) -> Result<KernelTable> {
    let text = String::from_utf8(out.input_file(path)?).context("kernel table is not UTF-8")?;
    KernelTable::from_json(&text).with_context(|| format!("kernel table {}", path.display()))
}

/// The explicit table when given, else the default layout for the band.
fn model_table(out: &mut Outcome, hurst: &HurstSpec, explicit: Option<&Path>) -> Result<KernelTable> {
    let table = match explicit {
        Some(path) => load_table(out, path)?,
        None => obtain_table(&TableSpec::for_hurst_range(hurst.a, hurst.b, false))?,
    };
    out.inputs.insert("kernel-table".into(), table.digest());
    Ok(table)
}

/// Builds the table, going through the cache directory when one is set.
pub fn obtain_table(spec: &TableSpec) -> Result<KernelTable> {
    let Some(dir) = std::env::var_os(TABLE_DIR_VAR).filter(|d| !d.is_empty()) else {
        return Ok(KernelTable::build(spec)?);
    };
    let dir = PathBuf::from(dir);
    let key = sha256_hex(serde_json::to_string(spec)?.as_bytes());
    let file = dir.join(format!("kernel-{}.json", &key[..16]));
    if let Ok(table) = KernelTable::read(&file) {
        return Ok(table);
    }
    let table = KernelTable::build(spec)?;
    fs::create_dir_all(&dir).with_context(|| format!("creating table cache {}", dir.display()))?;
    let partial = file.with_extension(format!("{}.part", std::process::id()));
    table.write(&partial)?;
    fs::rename(&partial, &file).with_context(|| format!("storing {}", file.display()))?;
    Ok(table)
}
