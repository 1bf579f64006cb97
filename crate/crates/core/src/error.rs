use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("wavepacket not contained: {0}")]
    Containment(String),
    #[error("spectral differentiation invalid: {0}")]
    SpectralValidity(String),
    #[error("numerical blowup: {0}")]
    NumericalBlowup(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid loop: {0}")]
    LoopInvalid(String),
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// `true` for failures caused by the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalBlowup(_) | Error::SpectralValidity(_) | Error::Containment(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
