use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const CONSTANT_H: &str = r#"{"family":"constant","a":0.5,"b":0.5,"params":{"h":0.5}}"#;
const SINE_H: &str = r#"{"family":"sinusoidal","a":0.3,"b":0.7,"params":{}}"#;

fn mbmlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbmlab"))
        .args(args)
        .current_dir(dir)
        .env_remove("MBMLAB_TABLE_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("h.json"), CONSTANT_H).unwrap();
    fs::write(dir.path().join("sine.json"), SINE_H).unwrap();
    dir
}

fn simulate(dir: &Path, out: &str, seed: &str, extra: &[&str]) -> Output {
    let mut args = vec![
        "simulate",
        "--model",
        "bh",
        "--hurst",
        "h.json",
        "--seed",
        seed,
        "--grid",
        "0,0.0078125,129",
        "--policy",
        "-3,8,16",
        "--out",
        out,
    ];
    args.extend_from_slice(extra);
    mbmlab(dir, &args)
}

#[test]
fn no_arguments_prints_usage_and_exits_2() {
    let dir = workspace();
    let o = mbmlab(dir.path(), &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn usage_errors_name_the_flag() {
    let dir = workspace();
    let o = mbmlab(dir.path(), &["simulate", "--model", "bh", "--hurst", "h.json", "--grid", "0,0.1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--grid"), "{}", stderr(&o));
    let o = mbmlab(dir.path(), &["check-z-condition", "--a", "0.6"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--b"), "{}", stderr(&o));
}

#[test]
fn check_z_condition_prints_verdict() {
    let dir = workspace();
    let o = mbmlab(dir.path(), &["check-z-condition", "--a", "0.6", "--b", "0.7", "--out", "z"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "true");
    assert!(dir.path().join("z/run.json").exists());
    let o = mbmlab(dir.path(), &["check-z-condition", "--a", "0.3", "--b", "0.7", "--out", "z2"]);
    assert_eq!(stdout(&o).trim(), "false");
    let o = mbmlab(dir.path(), &["check-z-condition", "--a", "0.8", "--b", "0.7", "--out", "z3"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn uncovered_hurst_range_is_a_domain_error() {
    let dir = workspace();
    let o = mbmlab(dir.path(), &["kernel-table", "--thetas", "0.5", "--out", "kt"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = mbmlab(
        dir.path(),
        &[
            "simulate",
            "--model",
            "bh",
            "--hurst",
            "sine.json",
            "--grid",
            "0,0.01,10",
            "--table",
            "kt/kernel_table.json",
            "--out",
            "bad",
        ],
    );
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("requested [") && err.contains("table covers [0.5, 0.5]"), "{err}");
}

#[test]
fn reproduce_after_run_succeeds_and_regenerates() {
    let dir = workspace();
    assert_eq!(code(&simulate(dir.path(), "run", "3", &[])), 0);
    let run = dir.path().join("run/run.json");
    let o = mbmlab(dir.path(), &["reproduce", run.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let csv = dir.path().join("run/path.csv");
    let before = fs::read(&csv).unwrap();
    fs::remove_file(&csv).unwrap();
    fs::remove_file(dir.path().join("run/path.json")).unwrap();
    let o = mbmlab(dir.path(), &["reproduce", run.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read(&csv).unwrap(), before);
}

#[test]
fn reproduce_with_edited_seed_reports_mismatch() {
    let dir = workspace();
    assert_eq!(code(&simulate(dir.path(), "run", "3", &[])), 0);
    let run = dir.path().join("run/run.json");
    let text = fs::read_to_string(&run).unwrap();
    assert!(text.contains("\"seed\": 3"));
    fs::write(&run, text.replace("\"seed\": 3", "\"seed\": 4")).unwrap();
    let o = mbmlab(dir.path(), &["reproduce", run.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("digest mismatch: path.csv"), "{}", stderr(&o));
}

#[test]
fn reproduce_detects_changed_inputs() {
    let dir = workspace();
    assert_eq!(code(&simulate(dir.path(), "run", "3", &[])), 0);
    fs::write(dir.path().join("h.json"), CONSTANT_H.replace("0.5", "0.50")).unwrap();
    let o = mbmlab(dir.path(), &["reproduce", "run/run.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("input changed"), "{}", stderr(&o));
}

#[test]
fn outputs_do_not_depend_on_directory_or_workers() {
    let a = workspace();
    let b = workspace();
    assert_eq!(code(&simulate(a.path(), "x", "9", &["--workers", "1"])), 0);
    assert_eq!(code(&simulate(b.path(), "y", "9", &["--workers", "3"])), 0);
    let read = |d: &TempDir, sub: &str| fs::read(d.path().join(sub).join("path.csv")).unwrap();
    assert_eq!(read(&a, "x"), read(&b, "y"));
}

#[test]
fn every_command_round_trips_through_reproduce() {
    let dir = workspace();
    let d = dir.path();
    fs::write(d.join("stub.json"), r#"{"8,77": 50.0, "3,2": -1.0}"#).unwrap();
    assert_eq!(code(&simulate(d, "sim", "1", &[])), 0);
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("kt", vec!["kernel-table", "--thetas", "-1.5,0.5", "--half-width", "4"]),
        ("vh", vec!["validate-hurst", "--spec", "sine.json", "--points", "0.1,-0.25"]),
        ("fh", vec!["simulate", "--model", "fh", "--hurst", "sine.json", "--grid", "0,0.05,21", "--policy", "-2,6,8"]),
        ("zz", vec!["simulate", "--model", "z", "--hurst", "sine.json", "--grid", "0,0.05,21", "--policy", "-2,6,8"]),
        ("fp", vec!["find-points", "--mode", "rapid", "--stub-field", "stub.json", "--jmax", "10", "--beam", "4"]),
        ("fs", vec!["find-points", "--mode", "slow", "--seed", "2", "--jmax", "8", "--beam", "4"]),
        (
            "an",
            vec!["analyze", "--path", "sim/path.csv", "--points", "0.5", "--h", "0.5", "--nmin", "2", "--nmax", "4"],
        ),
        ("la", vec!["lass", "--hurst", "h.json", "--t", "0.5", "--policy", "-2,6,8", "--rhos", "0.25,0.125"]),
        ("cz", vec!["check-z-condition", "--a", "0.6", "--b", "0.7"]),
    ];
    for (out, mut args) in runs {
        args.extend_from_slice(&["--out", out]);
        let o = mbmlab(d, &args);
        assert_eq!(code(&o), 0, "{out}: {}", stderr(&o));
        let run = d.join(out).join("run.json");
        let o = mbmlab(d, &["reproduce", run.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "reproduce {out}: {}", stderr(&o));
    }
}

#[test]
fn rapid_search_finds_a_planted_coefficient() {
    let dir = workspace();
    fs::write(dir.path().join("stub.json"), r#"{"8,77": 50.0}"#).unwrap();
    let o = mbmlab(
        dir.path(),
        &["find-points", "--mode", "rapid", "--stub-field", "stub.json", "--jmax", "10", "--beam", "4", "--out", "fp"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("rank,t,mu_or_score,j_max"));
    let best: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(best[0], "1");
    let t: f64 = best[1].parse().unwrap();
    assert!((77.0 / 256.0..78.0 / 256.0).contains(&t), "{t}");
    assert_eq!(best[3], "10");
}

#[test]
fn validate_hurst_report_columns() {
    let dir = workspace();
    let o = mbmlab(dir.path(), &["validate-hurst", "--spec", "sine.json", "--points", "0.2,0.7", "--out", "vh"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("vh/validate_hurst.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "t,cond1,cond2,cond3,gamma,c_t");
    assert_eq!(rows.len(), 3);
    // a smooth H has fitted exponent near 1 and satisfies all three conditions
    for row in &rows[1..] {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(&cols[1..4], &["true", "true", "true"]);
        let gamma: f64 = cols[4].parse().unwrap();
        assert!((gamma - 1.0).abs() < 0.1, "{gamma}");
    }
}

#[test]
fn analyze_classifies_a_power_path_and_plots() {
    let dir = workspace();
    // |s − 1/2|^{1/2} sampled at 2^{-12}: a slow point at 1/2
    let mut csv = String::from("t,value\n");
    for i in 0..=4096 {
        let s = i as f64 / 4096.0;
        csv.push_str(&format!("{s:e},{:e}\n", (s - 0.5).abs().sqrt()));
    }
    fs::write(dir.path().join("p.csv"), csv).unwrap();
    let o = mbmlab(
        dir.path(),
        &[
            "analyze", "--path", "p.csv", "--points", "0.5", "--h", "0.5", "--nmin", "2", "--nmax", "9", "--plot",
            "--out", "an",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("slow"), "{}", stdout(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("an/analyze_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["points"][0]["tag"], "slow");
    let point = fs::read_to_string(dir.path().join("an/point_000.csv")).unwrap();
    assert!(point.starts_with("n,osc,ratio_slow,ratio_ord,ratio_rapid\n"));
    assert_eq!(point.lines().count(), 1 + 8);
    let svg = fs::read_to_string(dir.path().join("an/analyze.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<polyline").count(), 3);
}

#[test]
fn table_cache_directory_is_used() {
    let dir = workspace();
    let cache: PathBuf = dir.path().join("cache");
    let run = |out: &str| {
        Command::new(env!("CARGO_BIN_EXE_mbmlab"))
            .args(["kernel-table", "--thetas", "0.5", "--half-width", "4", "--out", out])
            .current_dir(dir.path())
            .env("MBMLAB_TABLE_DIR", &cache)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("a")), 0);
    let cached: Vec<_> = fs::read_dir(&cache).unwrap().collect();
    assert_eq!(cached.len(), 1);
    assert_eq!(code(&run("b")), 0);
    assert_eq!(
        fs::read(dir.path().join("a/kernel_table.json")).unwrap(),
        fs::read(dir.path().join("b/kernel_table.json")).unwrap()
    );
}
