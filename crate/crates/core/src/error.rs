use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: ({dt_a}, {len_a}) vs ({dt_b}, {len_b})")]
    GridMismatch {
        dt_a: f64,
        len_a: usize,
        dt_b: f64,
        len_b: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("expression not proper (s^{0} present) - normalize first")]
    NotProper(i32),

    #[error("unbound signal `{0}`")]
    UnboundSignal(String),

    #[error("free constant term with no signal factors and no integration")]
    FreeConstant,

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("singular regressor (smallest singular value {smallest_sv:e})")]
    Singular { smallest_sv: f64 },

    #[error("monomial coherence failure: residual {residual:e} exceeds {threshold:e}")]
    Coherence { residual: f64, threshold: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
