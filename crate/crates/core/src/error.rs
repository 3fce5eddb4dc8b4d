use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Every comparison was a tie, so neither WR nor phi is defined.
    #[error("all {n_pairs} comparisons are ties")]
    AllTies { n_pairs: u64 },

    #[error("degenerate counts (wins = {n_win}, losses = {n_loss}); use bootstrap inference")]
    DegenerateCounts { n_win: u64, n_loss: u64 },

    #[error("variance is unbounded: {0}")]
    UnboundedVariance(String),

    #[error("required sample size is infinite: {0}")]
    InfiniteSampleSize(String),

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("statistic undefined: {0}")]
    UndefinedStatistic(String),

    #[error("{context}: line {line}, column `{column}`: {message}")]
    Parse { context: String, line: u64, column: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Checks `0 < p < 1`.
pub(crate) fn check_open_unit(name: &str, p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must lie in (0, 1), got {p}")))
    }
}

pub(crate) fn check_unit(name: &str, p: f64) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must lie in [0, 1], got {p}")))
    }
}

pub(crate) fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {x}")))
    }
}
