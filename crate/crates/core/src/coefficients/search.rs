use rayon::prelude::*;
use serde::Serialize;

use super::field::CoefficientField;
use super::shells::{default_l_max, k_index, level_mu};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    /// Midpoint of the selected level-`j_max` dyadic interval.
    pub t: f64,
    pub k: i64,
    pub score: f64,
}

/// Ranked candidates plus what the beam discarded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub candidates: Vec<Candidate>,
    pub j_max: u32,
    pub beam_width: usize,
    /// Bound on the exhaustive optimum over all leaves in the interval: a
    /// lower bound for slow searches, an upper bound for sustained rapid
    /// searches. Peak scores admit no such bound.
    pub certified_bound: Option<f64>,
    /// Gap between the best candidate and `certified_bound`.
    pub slack: Option<f64>,
}

impl SearchReport {
    pub fn best(&self) -> Option<&Candidate> {
        self.candidates.first()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlowSearch {
    pub interval: (f64, f64),
    pub m: f64,
    pub j_max: u32,
    pub l_max: u32,
    pub beam_width: usize,
}

impl SlowSearch {
    pub fn new(interval: (f64, f64), m: f64, j_max: u32, beam_width: usize) -> Self {
        Self { interval, m, j_max, l_max: default_l_max(m, j_max), beam_width }
    }
}

/// How a rapid candidate is scored along its dyadic column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RapidObjective {
    /// `max_{j_from ≤ j ≤ j_max} |ε_{j,k_j(t)}|/√j`.
    #[default]
    Peak,
    /// `min_{j_from ≤ j ≤ j_max} |ε_{j,k_j(t)}|/√j`: every level large at once.
    Sustained,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RapidSearch {
    pub interval: (f64, f64),
    pub j_max: u32,
    pub j_from: u32,
    pub beam_width: usize,
    /// Levels of exhaustive lookahead used to rank beam members.
    pub lookahead: u32,
    pub objective: RapidObjective,
}

impl RapidSearch {
    /// Scores levels from `⌈j_max/2⌉` on: coarse levels are shared by
    /// every point of the interval and would only produce ties.
    pub fn new(interval: (f64, f64), j_max: u32, beam_width: usize) -> Self {
        let j_from = j_max.div_ceil(2).max(1);
        Self { interval, j_max, j_from, beam_width, lookahead: 4, objective: RapidObjective::Peak }
    }
}

fn check_common(interval: (f64, f64), j_max: u32, beam_width: usize) -> Result<()> {
    let (a, b) = interval;
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::InvalidParameter(format!("search interval ({a}, {b}) not inside [0, 1]")));
    }
    if beam_width == 0 {
        return Err(Error::InvalidParameter("beam width must be at least 1".into()));
    }
    if j_max > 62 {
        return Err(Error::InvalidParameter(format!("search depth {j_max} exceeds 62")));
    }
    Ok(())
}

#[derive(Clone, Copy)]
struct Node {
    k: i64,
    score: f64,
    /// Ranking key: the best partial score among descendants a few levels down.
    key: f64,
}

/// Generic dyadic beam search starting from every interval at level `j0`.
/// `level_score(j, k)` is the contribution of level `j` (NaN for none) and
/// `combine` folds it into the running score. With `bounding`, a node's
/// partial score bounds all its descendants in the losing direction, which
/// makes the pruned scores a certificate. Lower scores win when `minimize`.
/// Nodes are ranked by the best descendant `lookahead` levels down.
#[allow(clippy::too_many_arguments)]
fn beam<S, C>(
    interval: (f64, f64),
    j0: u32,
    j_max: u32,
    beam_width: usize,
    lookahead: u32,
    minimize: bool,
    bounding: bool,
    level_score: S,
    combine: C,
) -> SearchReport
where
    S: Fn(u32, i64) -> f64 + Sync,
    C: Fn(f64, f64) -> f64 + Sync,
{
    let (a, b) = interval;
    let pick = |x: f64, y: f64| if minimize { x.min(y) } else { x.max(y) };
    let better = |x: &Node, y: &Node| {
        let ord = if minimize { x.key.total_cmp(&y.key) } else { y.key.total_cmp(&x.key) };
        ord.then(x.k.cmp(&y.k))
    };
    // Best partial score among descendants of (j, k) at level min(j + lookahead, j_max).
    fn ahead<S: Fn(u32, i64) -> f64, C: Fn(f64, f64) -> f64, P: Fn(f64, f64) -> f64>(
        j: u32,
        k: i64,
        score: f64,
        stop: u32,
        level_score: &S,
        combine: &C,
        pick: &P,
        intersects: &dyn Fn(u32, i64) -> bool,
    ) -> f64 {
        if j >= stop {
            return score;
        }
        [2 * k, 2 * k + 1]
            .into_iter()
            .filter(|&c| intersects(j + 1, c))
            .map(|c| {
                ahead(j + 1, c, combine(score, level_score(j + 1, c)), stop, level_score, combine, pick, intersects)
            })
            .fold(f64::NAN, pick)
    }
    let intersects = |j: u32, k: i64| {
        let w = (-(j as f64)).exp2();
        let lo = k as f64 * w;
        lo <= b && lo + w > a
    };
    let keyed = |j: u32, k: i64, score: f64| {
        let key = ahead(j, k, score, (j + lookahead).min(j_max), &level_score, &combine, &pick, &intersects);
        Node { k, score, key }
    };
    let worst_init = if minimize { f64::INFINITY } else { f64::NEG_INFINITY };
    let mut pruned_bound = worst_init;
    let first = k_index(a, j0 as i32).max(0);
    let last = k_index(b, j0 as i32).min((1i64 << j0) - 1);
    let mut beam: Vec<Node> = (first..=last)
        .filter(|&k| intersects(j0, k))
        .map(|k| {
            let score = (0..=j0).fold(f64::NAN, |acc, j| combine(acc, level_score(j, k >> (j0 - j))));
            keyed(j0, k, score)
        })
        .collect();
    let mut prune = |nodes: &mut Vec<Node>| {
        nodes.sort_by(better);
        for dropped in nodes.iter().skip(beam_width) {
            pruned_bound = if minimize { pruned_bound.min(dropped.score) } else { pruned_bound.max(dropped.score) };
        }
        nodes.truncate(beam_width);
    };
    prune(&mut beam);
    for j in j0 + 1..=j_max {
        beam = beam
            .par_iter()
            .flat_map_iter(|n| [2 * n.k, 2 * n.k + 1].into_iter().map(move |k| (n.score, k)))
            .filter(|&(_, k)| intersects(j, k))
            .map(|(parent, k)| keyed(j, k, combine(parent, level_score(j, k))))
            .collect();
        prune(&mut beam);
    }
    let scale = (-(j_max as f64)).exp2();
    let candidates: Vec<Candidate> =
        beam.iter().map(|n| Candidate { t: (n.k as f64 + 0.5) * scale, k: n.k, score: n.score }).collect();
    let best = candidates.first().map(|c| c.score).unwrap_or(0.0);
    let (certified_bound, slack) = if bounding {
        let bound = if minimize { pruned_bound.min(best) } else { pruned_bound.max(best) };
        (Some(bound), Some((best - bound).abs()))
    } else {
        (None, None)
    };
    SearchReport { candidates, j_max, beam_width, certified_bound, slack }
}

/// Beam search for points with a small slow-point constant `μ`.
///
/// Each level's shell maximum depends only on `k_j(t)`, so the partial
/// maximum over levels `0..=j` is exact for every point of a level-`j`
/// interval and never decreases further down. Candidates are returned in
/// ascending `μ`.
pub fn find_slow_candidates(field: &dyn CoefficientField, params: &SlowSearch) -> Result<SearchReport> {
    check_common(params.interval, params.j_max, params.beam_width)?;
    if !(params.m > 0.0 && params.m.is_finite()) {
        return Err(Error::InvalidParameter(format!("shell parameter m={} must be positive", params.m)));
    }
    let (m, l_max) = (params.m, params.l_max);
    Ok(beam(
        params.interval,
        0,
        params.j_max,
        params.beam_width,
        0,
        true,
        true,
        |j, k| level_mu(field, j as i32, k, m, l_max),
        f64::max,
    ))
}

/// Beam search for points whose column coefficients are large relative to `√j`.
/// Candidates are returned in descending score.
pub fn find_rapid_candidates(field: &dyn CoefficientField, params: &RapidSearch) -> Result<SearchReport> {
    check_common(params.interval, params.j_max, params.beam_width)?;
    if params.j_from == 0 || params.j_from > params.j_max {
        return Err(Error::InvalidParameter(format!(
            "rapid score levels [{}, {}] must satisfy 1 ≤ j_from ≤ j_max",
            params.j_from, params.j_max
        )));
    }
    let j_from = params.j_from;
    let level = |j: u32, k: i64| {
        if j < j_from {
            f64::NAN
        } else {
            field.eps(j as i32, k).abs() / (j as f64).sqrt()
        }
    };
    // The beam starts where scoring starts; f64::max/min ignore the NaN of
    // unscored levels.
    let j0 = j_from - 1;
    let (iv, jm, bw) = (params.interval, params.j_max, params.beam_width);
    let report = match params.objective {
        RapidObjective::Peak => beam(iv, j0, jm, bw, params.lookahead, false, false, level, f64::max),
        RapidObjective::Sustained => beam(iv, j0, jm, bw, params.lookahead, false, true, level, f64::min),
    };
    Ok(report)
}

/// `score(t)` for a single point, matching the rapid search.
pub fn rapid_score(field: &dyn CoefficientField, t: f64, j_from: u32, j_max: u32, objective: RapidObjective) -> f64 {
    let vals = (j_from.max(1)..=j_max).map(|j| field.eps(j as i32, k_index(t, j as i32)).abs() / (j as f64).sqrt());
    match objective {
        RapidObjective::Peak => vals.fold(0.0, f64::max),
        RapidObjective::Sustained => vals.fold(f64::INFINITY, f64::min),
    }
}
