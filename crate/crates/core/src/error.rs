use thiserror::Error;

/// Errors raised by the geometry, quadrature and flow routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate chart point: EG - F^2 = {0:e}")]
    DegenerateChart(f64),

    #[error("quadratic form is not positive definite (A = {a:e}, B = {b:e}, C = {c:e})")]
    NotPositiveDefinite { a: f64, b: f64, c: f64 },

    #[error("projection did not converge (gradient residual {residual:e})")]
    ProjectionFailed { residual: f64 },

    #[error("target coincides with a source point")]
    Coincident,

    #[error("order-{0} rule needs boundary derivatives")]
    MissingDerivatives(u8),

    #[error("unsupported kernel term r = {r}, m = {m}")]
    UnsupportedKernel { r: u32, m: u32 },

    #[error("binomial factor requested for n = {0} > 3")]
    UnsupportedBinomial(u32),

    #[error("target lies inside the osculating sphere (1 - 2dH + d^2K = {0:e})")]
    InsideOsculating(f64),

    #[error("GMRES stagnated after {iterations} iterations at relative residual {residual:e}")]
    GmresStagnation {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("scene file: {0}")]
    Scene(#[from] toml::de::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
