use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("state norm {norm} deviates from 1 by more than {tol}; normalize the state first")]
    NotNormalized { norm: f64, tol: f64 },

    #[error("site x={x} is outside the lattice range -{half}..={half}")]
    OutOfRange { x: i64, half: i64 },

    #[error("lattice mismatch: operator is {expected}, state is {found}")]
    LatticeMismatch { expected: String, found: String },

    #[error("cannot parse {what} from '{input}': expected {expected}")]
    Parse {
        what: &'static str,
        input: String,
        expected: &'static str,
    },

    #[error("momentum block requires y-translation invariance: {0}")]
    NotTranslationInvariant(String),

    #[error("tail mass {tail:e} at the lattice boundary exceeds {limit:e}")]
    TailTooLarge { tail: f64, limit: f64 },

    #[error("{context}: no convergence (best residual {best_residual:e})")]
    NoConvergence { context: String, best_residual: f64 },

    #[error("anticommutator {pair} is nonzero (residual {residual:e})")]
    Anticommutation { pair: String, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
