use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid too small: {needed} x-nodes required per segment, {available} available")]
    GridTooSmall { needed: usize, available: usize },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("non-finite value at node ({i}, {j})")]
    NonFinite { i: usize, j: usize },

    #[error("expected a real-valued field, max |Im| = {max_imag:e}")]
    NotReal { max_imag: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("wavefunction support does not cover the required range [{need_lo}, {need_hi}]")]
    SupportCoverage { need_lo: f64, need_hi: f64 },

    #[error("wavefunction kind {0} has no grid Wigner function")]
    Distributional(&'static str),

    #[error("logarithm evaluation set is empty or too small ({coverage:.3} of nodes)")]
    EmptyEvaluationSet { coverage: f64 },

    #[error("profile p*N(p) is not positive at p = {p}")]
    NonPositiveProfile { p: f64 },

    #[error("scan tie between a = {a1} and a = {a2}")]
    ScanTie { a1: f64, a2: f64 },

    #[error("non-monotone sequence between alpha = {alpha_lo} and alpha = {alpha_hi}: {quantity}")]
    NonMonotone {
        alpha_lo: f64,
        alpha_hi: f64,
        quantity: &'static str,
    },

    #[error("integration overflow in the forbidden region; reduce x_far")]
    Overflow,

    #[error("asymptotic fit residual {residual:e} exceeds {threshold:e}")]
    FitResidual { residual: f64, threshold: f64 },

    #[error("io: {0}")]
    Io(String),

    #[error("format: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
