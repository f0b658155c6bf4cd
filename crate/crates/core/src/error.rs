use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    #[error("singular design matrix: {0}")]
    Singular(String),

    #[error("postselection has zero probability")]
    ZeroPostselection,

    #[error("extracted map is not completely positive (min eigenvalue {0:.3e})")]
    NotCompletelyPositive(f64),

    #[error("phase estimate undefined: {0}")]
    ZeroContrast(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("zero-norm process matrix")]
    ZeroNorm,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange(format!("{name} = {x} not in [0, 1]")));
    }
    Ok(())
}
