use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "quadrature did not reach tolerance {tolerance:e} within {budget} evaluations (estimated error {estimate:e})"
    )]
    QuadratureNonConvergence { tolerance: f64, budget: usize, estimate: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("kernel table does not cover {what}: requested [{lo}, {hi}], table covers [{table_lo}, {table_hi}]")]
    TableCoverage { what: &'static str, lo: f64, hi: f64, table_lo: f64, table_hi: f64 },

    #[error("kernel table interpolation error {measured:e} exceeds 10x tolerance {tolerance:e}")]
    InterpolationTolerance { measured: f64, tolerance: f64 },

    #[error("insufficient resolution at scale n={n}: {found} grid points in annulus, need at least {needed}")]
    InsufficientResolution { n: u32, found: usize, needed: usize },

    #[error("integration window too small: tail estimate {tail:e} exceeds tolerance {tolerance:e}")]
    WindowTooSmall { tail: f64, tolerance: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
