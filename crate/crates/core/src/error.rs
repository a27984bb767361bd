use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input data.
    #[error("validation error: {0}")]
    Validation(String),

    /// A multiplier or parameter outside the domain of a formula.
    #[error("domain error: {name} = {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The outer minimizer ran into an end of the multiplier bracket while the
    /// objective was still decreasing towards it.
    #[error(
        "bracket exhausted: minimizer pinned at multiplier {multiplier:e} (bound {bound:e}), \
         subgradient [{slope_lo:e}, {slope_hi:e}] does not contain 0; widen the multiplier bracket"
    )]
    BracketExhausted {
        multiplier: f64,
        bound: f64,
        slope_lo: f64,
        slope_hi: f64,
    },

    /// Root or parameter out of the representable range.
    #[error("range error: {0}")]
    Range(String),

    #[error("curve error: {0}")]
    Curve(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::BracketExhausted { .. } | Error::Range(_))
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_)) || matches!(self, Error::Csv(e) if e.is_io_error())
    }
}
