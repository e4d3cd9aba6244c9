use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function being evaluated.
    #[error("domain error: {0}")]
    Domain(String),

    /// A method was requested whose structural precondition does not hold,
    /// e.g. a closed form for a path-loss exponent it does not cover.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("quadrature did not converge (estimate {estimate:e}, error estimate {abs_error:e})")]
    NonConvergence { estimate: f64, abs_error: f64 },

    #[error("optimizer did not converge: {0}")]
    Optimizer(String),

    #[error("not identifiable: {0}")]
    Identifiability(String),

    #[error("simulation failed: {0}")]
    Simulation(String),

    #[error("empty sample set")]
    EmptySamples,

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Divergent(_)
                | Error::NonConvergence { .. }
                | Error::Optimizer(_)
                | Error::Simulation(_)
        )
    }
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Validation(msg()))
    }
}
