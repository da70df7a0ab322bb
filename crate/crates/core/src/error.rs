use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample abscissae must be strictly increasing (row {row})")]
    NonMonotone { row: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("negative sample {value} at x = {x}")]
    NegativeSample { x: f64, value: f64 },

    #[error("Neumann series did not converge: {terms} terms, last term max-norm {last_term_max:e} > tol {tol:e}")]
    NoConvergence {
        terms: usize,
        last_term_max: f64,
        tol: f64,
    },

    #[error("point (x = {x}, t = {t}) lies outside the kernel triangle (eta_max = {eta_max})")]
    OutOfDomain { x: f64, t: f64, eta_max: f64 },

    #[error("difference step too coarse: {0}")]
    StepTooCoarse(String),

    #[error("boundary control is not in the response-operator domain (C^2 with f(0) = f'(0) = 0)")]
    NonSmoothControl,

    #[error("Im k = {im_k} is not above the convergence threshold {threshold}")]
    Region { im_k: f64, threshold: f64 },

    #[error("truncation tail bound {tail_bound:e} exceeds tolerance {tol:e}")]
    Truncation { tail_bound: f64, tol: f64 },

    #[error("solution growth {ratio:e} between renormalisations exceeds 1e12; start point too far out")]
    BlowUp { ratio: f64 },

    #[error("finite-difference wave solver became unstable (max |u| = {max_u:e})")]
    Unstable { max_u: f64 },

    #[error("L1 norm is infinite; use the windowed bound")]
    InfiniteNorm,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
