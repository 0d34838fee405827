//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix does not preserve the symplectic form")]
    NotSymplectic,

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("parameter {name} must be positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },

    #[error("grid size must be a power of two >= 64 (got {0})")]
    GridSize(usize),

    #[error("state tail not contained in grid: boundary magnitude {boundary:.3e} exceeds {limit:.3e} of the peak")]
    Containment { boundary: f64, limit: f64 },

    #[error("state vectors live on different grids or Planck parameters")]
    GridMismatch,

    #[error("symbol depends on hbar; a classical polynomial is required")]
    HbarDependent,

    #[error("observable carries no distributional lineage; apply pmechanise first")]
    NoLineage,

    #[error("bracket produced degree {degree}, above the cap {cap}; the evolution does not close at this degree")]
    DegreeCap { degree: usize, cap: usize },

    #[error("quadrature did not reach the requested tolerance")]
    Tolerance,

    #[error("the list of h values must not be empty")]
    EmptyHList,

    #[error("kernel is not a coherent state of the given oscillator")]
    NotCoherent,

    #[error("hamiltonian must be quadratic plus linear in (q, p) with no hbar terms")]
    NotQuadratic,

    #[error("eigenfunction index {0} above the supported maximum 12")]
    EigenIndex(usize),

    #[error("monomial degree {0} above the Weyl symmetrisation limit {1}")]
    WeylDegree(usize, usize),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
