use thiserror::Error;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("infeasible parameter: {name} = {value} must exceed {threshold}")]
    Infeasible {
        name: String,
        value: f64,
        threshold: f64,
    },

    #[error("aliasing guard failed on {location}: tail ratio {tail:.3e} exceeds {limit:.1e}")]
    Aliasing {
        location: String,
        tail: f64,
        limit: f64,
    },

    #[error("kernel error: {0}")]
    Kernel(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("convention calibration failed: {0}")]
    Convention(String),
}

impl Error {
    /// Short machine-readable tag used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Infeasible { .. } => "infeasible",
            Error::Aliasing { .. } => "aliasing",
            Error::Kernel(_) => "kernel",
            Error::Numerical(_) => "numerical",
            Error::Convention(_) => "convention",
        }
    }

    /// True when the error comes from the configuration rather than a defect in the numerics.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Parameter(_) | Error::Infeasible { .. } | Error::Aliasing { .. } | Error::Kernel(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
