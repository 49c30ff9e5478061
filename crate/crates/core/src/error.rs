use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid functions live on incompatible grids")]
    DomainMismatch,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("series too short: need at least {needed} observations, got {got}")]
    InsufficientLength { needed: usize, got: usize },

    #[error("the adjoint of a point-evaluation operator is not a grid function")]
    UnsupportedAdjoint,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("eigen solver failed: {0}")]
    EigenFailure(String),

    #[error("simulation diverged: first non-finite value at time index {index}")]
    Divergence { index: usize },

    #[error("singular design: {0}")]
    SingularDesign(String),

    #[error("operator has no strong unit root")]
    NoStrongUnitRoot,

    #[error(
        "eigenvalue 1 is defective: algebraic multiplicity {algebraic}, geometric multiplicity {geometric}"
    )]
    DefectiveUnitRoot { algebraic: usize, geometric: usize },
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenFailure(_)
                | Error::Divergence { .. }
                | Error::SingularDesign(_)
                | Error::NoStrongUnitRoot
                | Error::DefectiveUnitRoot { .. }
        )
    }
}
