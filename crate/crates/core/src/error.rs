use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("phase change {phase_deg} deg outside model domain [{lo}, {hi}]")]
    OutOfDomain { phase_deg: f64, lo: f64, hi: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("too few samples: {0}")]
    TooFewSamples(String),

    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),

    #[error("invalid response model: {0}")]
    InvalidModel(String),

    #[error("beam {beam} infeasible: best achievable real part {best_re} < required {required}")]
    Infeasible { beam: usize, best_re: f64, required: f64 },

    #[error("instance too large for exhaustive search: {0}")]
    InstanceTooLarge(String),

    #[error("empty angle grid")]
    EmptyGrid,

    #[error("pattern grids differ")]
    GridMismatch,

    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
