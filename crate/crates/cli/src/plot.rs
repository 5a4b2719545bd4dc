use std::fmt::Write;

use mbmlab::regularity::{ModulusKind, OscillationReport};

const WIDTH: f64 = 560.0;
const PANEL: f64 = 180.0;
const MARGIN: f64 = 48.0;

const SERIES: [(ModulusKind, &str, &str); 3] = [
    (ModulusKind::Slow, "slow", "#1f77b4"),
    (ModulusKind::Ordinary, "ordinary", "#2ca02c"),
    (ModulusKind::Rapid, "rapid", "#d62728"),
];

/// One panel per point: `log2` of the three ratio sequences against `n`.
pub fn ratio_svg(reports: &[OscillationReport]) -> String {
    let height = MARGIN + PANEL * reports.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, (_, label, colour)) in SERIES.iter().enumerate() {
        let x = MARGIN + 110.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{x}" y1="16" x2="{}" y2="16" stroke="{colour}" stroke-width="2"/>"#, x + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="20">{label}</text>"#, x + 26.0);
    }
    for (p, report) in reports.iter().enumerate() {
        panel(&mut s, report, MARGIN + PANEL * p as f64);
    }
    s.push_str("</svg>\n");
    s
}

fn panel(s: &mut String, report: &OscillationReport, top: f64) {
    let (left, right) = (MARGIN, WIDTH - 16.0);
    let (upper, lower) = (top + 16.0, top + PANEL - 28.0);
    let ns: Vec<f64> = report.scales().map(f64::from).collect();
    let series: Vec<Vec<f64>> =
        SERIES.iter().map(|(kind, _, _)| report.ratios(*kind).iter().map(|r| r.log2()).collect()).collect();
    let finite = series.iter().flatten().copied().filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo >= hi {
        (lo, hi) = if lo.is_finite() { (lo - 1.0, lo + 1.0) } else { (-1.0, 1.0) };
    }
    let (n0, n1) = (ns[0], ns[ns.len() - 1].max(ns[0] + 1.0));
    let x = |n: f64| left + (n - n0) / (n1 - n0) * (right - left);
    let y = |v: f64| lower - (v - lo) / (hi - lo) * (lower - upper);

    let _ = writeln!(
        s,
        r##"<rect x="{left}" y="{upper}" width="{}" height="{}" fill="none" stroke="#999"/>"##,
        right - left,
        lower - upper
    );
    let tag = report.tag.map_or("unclassified", |t| t.name());
    let _ =
        writeln!(s, r#"<text x="{left}" y="{}">t = {:.6}, H = {:.3}: {tag}</text>"#, upper - 4.0, report.t, report.h);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{hi:.2}</text>"#, left - 4.0, upper + 10.0);
    let _ = writeln!(s, r#"<text x="{}" y="{lower}" text-anchor="end">{lo:.2}</text>"#, left - 4.0);
    for &n in &ns {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{n}</text>"#, x(n), lower + 14.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">n (log2 ratio)</text>"#,
        (left + right) / 2.0,
        lower + 26.0
    );
    for ((_, _, colour), values) in SERIES.iter().zip(&series) {
        let pts: Vec<String> = ns
            .iter()
            .zip(values)
            .filter(|(_, v)| v.is_finite())
            .map(|(&n, &v)| format!("{:.2},{:.2}", x(n), y(v)))
            .collect();
        let _ =
            writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
    }
}
