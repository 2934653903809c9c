use thiserror::Error;

/// Errors produced by the network calculus.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown tensor factor `{0}`")]
    UnknownFactor(String),

    #[error("duplicate tensor factor `{0}`")]
    DuplicateFactor(String),

    #[error("factor `{label}` has dimension {found}, expected {expected}")]
    FactorDim {
        label: String,
        expected: usize,
        found: usize,
    },

    #[error("unknown block label `{0}`")]
    UnknownLabel(String),

    #[error("{what} is not unitary (residual {residual:.3e})")]
    NotUnitary { what: String, residual: f64 },

    #[error("{what} is not Hermitian (residual {residual:.3e})")]
    NotHermitian { what: String, residual: f64 },

    #[error("{what} is singular (condition number {cond:.3e})")]
    Singular { what: String, cond: f64 },

    #[error("ill-posed feedback network: {0}")]
    IllPosed(String),

    #[error("generalized Schur complement is not well defined: {0}")]
    NotWellDefined(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
