use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty sample")]
    EmptySample,

    #[error("Gaussian tail: alpha = 2 has no power-law tail constant")]
    GaussianTail,

    #[error("interval endpoint {0} is not on the grid")]
    OffGrid(f64),

    #[error("empty interval")]
    EmptyInterval,

    #[error("grid with {0} cells is not dyadic")]
    NonDyadic(usize),

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {intervals} intervals")]
    Quadrature {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("degenerate design: {0}")]
    Degenerate(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}

impl Error {
    /// Stable machine-readable name of the error class.
    pub fn code(&self) -> &'static str {
        match self {
            Self::InvalidParameter(_) => "invalid_parameter",
            Self::EmptySample => "empty_sample",
            Self::GaussianTail => "gaussian_tail",
            Self::OffGrid(_) => "off_grid",
            Self::EmptyInterval => "empty_interval",
            Self::NonDyadic(_) => "non_dyadic",
            Self::Quadrature { .. } => "quadrature",
            Self::NotApplicable(_) => "not_applicable",
            Self::Degenerate(_) => "degenerate",
            Self::Format(_) => "format",
            Self::Io(_) => "io",
            Self::Json(_) => "json",
        }
    }
}
