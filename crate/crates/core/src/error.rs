use thiserror::Error;

/// Errors raised by operator construction, the state engine and the protocol.
#[derive(Debug, Error)]
pub enum SteerError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{condition} violated: {detail}")]
    ConstraintViolation { condition: &'static str, detail: String },

    #[error("chain of {qutrits} sites with local dimension {local_dim} exceeds the engine limit of {limit} amplitudes")]
    EngineLimit { qutrits: usize, local_dim: usize, limit: usize },

    #[error("propagation did not converge: residual estimate {residual:.3e} after {iterations} Krylov steps")]
    Propagation { residual: f64, iterations: usize },

    #[error("state corruption: {0}")]
    StateCorruption(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("integration unstable: trace drift {drift:.3e} exceeds {limit:.1e}; use a smaller step")]
    Integration { drift: f64, limit: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = SteerError> = std::result::Result<T, E>;
