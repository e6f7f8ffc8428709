use thiserror::Error;

/// Errors raised by the spectral library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error(
        "period ratio {index} is not recoverable as an exact rational ({value}); \
         resonance detection needs exact eigenvalue arithmetic"
    )]
    NonRationalRatio { index: usize, value: f64 },

    #[error("field violates the reality condition at k = {k:?} (defect {defect:e})")]
    RealityViolation { k: [i32; 3], defect: f64 },

    #[error("wave vector {0:?} is not retained by the lattice")]
    ModeNotRetained([i32; 3]),

    #[error("operands live on different lattices")]
    LatticeMismatch,

    #[error("{0} is not an eigenvalue of the Stokes operator on this lattice")]
    NotAnEigenvalue(String),

    #[error("field has a non-zero mean where a zero-mean field is required")]
    NonZeroMean,

    #[error("integral of t^m e^(alpha t) with alpha = omega = 0 is the pure power case")]
    PurePowerCase,

    #[error("beta = 0 requires an explicit initial value")]
    MissingInitialValue,

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("integration produced a non-finite state after t = {last_valid_time}")]
    NonFinite { last_valid_time: f64 },

    #[error("tail fit did not converge: {0}")]
    FitNotConverged(String),

    #[error("data are not supported on a single line of wave vectors: {0}")]
    NotColinear(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
