use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("invalid argument: {0}")]
    InvalidArg(String),

    #[error("iteration limit exceeded: {0}")]
    MaxIter(String),

    #[error("Krylov substep budget exhausted: {0}")]
    KrylovBudget(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("Newton iteration did not converge: {0}")]
    NewtonDiverged(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("scene file: {0}")]
    SceneIo(String),
}

pub type Result<T> = std::result::Result<T, Error>;
