use thiserror::Error;

/// Errors produced by the solvation library.
#[derive(Debug, Error)]
pub enum Error {
    /// Temperature outside the validity window of a dielectric law.
    #[error("temperature {t} °C is outside the valid range [{t_min}, {t_max}] °C for solvent {solvent}")]
    TemperatureOutOfRange {
        solvent: String,
        t: f64,
        t_min: f64,
        t_max: f64,
    },

    /// An input violated a mathematical precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative solve failed to reach its tolerance.
    #[error("{context}: no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence {
        context: String,
        iterations: usize,
        residual: f64,
    },

    /// A fit could not be performed (degenerate or insufficient samples).
    #[error("fit error: {0}")]
    Fit(String),

    /// Malformed input file.
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// Structurally valid input with inadmissible content.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("unknown solvent '{0}'")]
    UnknownSolvent(String),

    #[error("unknown ion '{0}'")]
    UnknownIon(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
