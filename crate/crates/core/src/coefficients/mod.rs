//! The Gaussian coefficient field `ε_{j,k}`, dyadic indexing, Λ-shells and
//! searches for slow and rapid candidate points.

mod bounds;
mod field;
mod search;
mod shells;

pub use bounds::{bound_constant_c1, lower_bound_hit_rate, LEMMA_THRESHOLD};
pub use field::{inverse_normal, CoefficientField, DyadicPoint, FnField, GaussianField, StubField};
pub use search::{
    find_rapid_candidates, find_slow_candidates, rapid_score, Candidate, RapidObjective, RapidSearch, SearchReport,
    SlowSearch,
};
pub use shells::{default_l_max, default_shell_parameter, k_index, lambda_shell, level_mu, slow_mu, ShellSpec};
