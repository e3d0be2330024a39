use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// The differencing ladder for a Fisher-information estimate did not settle.
    #[error("qfi ladder did not converge: relative spread {spread:.3e} exceeds {tolerance:.1e} (ladder {ladder:?})")]
    LadderNotConverged {
        spread: f64,
        tolerance: f64,
        /// `(step, estimate)` pairs.
        ladder: Vec<(f64, f64)>,
    },

    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    #[error("calibration failure: {0}")]
    CalibrationFailure(String),

    #[error("regime violation: {0}")]
    RegimeViolation(String),

    #[error("undefined bound: {0}")]
    UndefinedBound(String),

    #[error("truncation too small: tail mass {tail_mass:.3e} at j_max = {j_max}, increase j_max")]
    TruncationTooSmall { tail_mass: f64, j_max: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::Io(_) | Error::InvalidArgument(_) => 2,
            Error::RegimeViolation(_) => 4,
            Error::NumericFailure(_)
            | Error::LadderNotConverged { .. }
            | Error::ConvergenceFailure(_)
            | Error::CalibrationFailure(_)
            | Error::UndefinedBound(_)
            | Error::TruncationTooSmall { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
