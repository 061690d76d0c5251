//! Numerical laboratory for the geometry and dynamics that live over
//! PSL(2,R): exact-winding arithmetic in the universal cover, cocompact
//! surface lattices and their length spectra, a computable moduli seminorm
//! on first cohomology, periodic-orbit thermodynamics for suspension flows
//! over hyperbolic toral automorphisms, and measure-of-maximal-entropy
//! linearization of expanding circle maps.
//!
//! Everything is plain f64 plus exact integer/rational bookkeeping where
//! exactness is load-bearing (windings, homology, periodic points). Parallel
//! reductions all run over fixed chunk decompositions folded in index order,
//! so results are bitwise reproducible regardless of worker-thread count.

pub mod cohomology;
pub mod cover;
pub mod det;
pub mod lattice;
pub mod margulis;
pub mod suspension;
pub mod tol;

use thiserror::Error as ThisError;

/// Library version, stamped into front-end output envelopes.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit-status category for an [`Error`], used by the command-line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input or configuration (exit 2).
    Invalid,
    /// Numerical failure: non-convergence or a violated hypothesis (exit 3).
    Numerical,
    /// Work or memory bound exceeded (exit 3, same status as non-convergence).
    Resource,
    /// Broken internal invariant; indicates a bug, not bad input (exit 4).
    Internal,
}

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("determinant {det} drifted beyond the recoverable band")]
    NonUnitDeterminant { det: f64 },

    #[error("degenerate commutator: {0}")]
    DegenerateCommutator(String),

    #[error("lattice construction failed: {0}")]
    ConstructionFailed(String),

    #[error("cohomological hypothesis violated: worst orbit sum {max_violation:e}")]
    HypothesisViolated { max_violation: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidInput(_) | Error::DegenerateCommutator(_) => ErrorKind::Invalid,
            Error::NonUnitDeterminant { .. }
            | Error::HypothesisViolated { .. }
            | Error::Numerical(_) => ErrorKind::Numerical,
            Error::ResourceLimit(_) => ErrorKind::Resource,
            Error::ConstructionFailed(_) => ErrorKind::Internal,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
