use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("invalid probabilities p1={p1}, p2={p2}")]
    InvalidProbabilities { p1: f64, p2: f64 },

    #[error("operator is zero")]
    ZeroOperator,

    #[error("operator is semidefinite, an indefinite operator is required")]
    Semidefinite,

    #[error("unsupported dimension {found}: only dimension {supported} is supported here")]
    UnsupportedDimension { found: usize, supported: usize },

    #[error("parameter constraint violated: {0}")]
    Constraint(String),

    #[error("basis is not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("state is not an interior point (min eigenvalue {min_eigenvalue} < {required})")]
    NotInterior { min_eigenvalue: f64, required: f64 },

    #[error("time {0} is not on the propagator grid")]
    OffGrid(f64),

    #[error("invalid time interval: s={s}, t={t}")]
    InvalidInterval { s: f64, t: f64 },

    #[error(
        "divisibility undefined: map at t={t} is not invertible (singular value ratio {ratio:e})"
    )]
    DivisibilityUndefined { t: f64, ratio: f64 },

    #[error("invalid integration grid: T={t_final}, dt={dt}")]
    InvalidGrid { t_final: f64, dt: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
