//! Crate-wide error type.

use crate::lattice::Site;
use thiserror::Error;

/// Errors shared by the lattice, solver, harmonic and Monte Carlo layers.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("sites {0} and {1} are not lattice nearest neighbors")]
    NotNeighbor(Site, Site),

    #[error("site {0} is already a vertex of the walk")]
    SelfIntersection(Site),

    #[error("walk is not a loop: starts at {0}, ends at {1}")]
    NotLoop(Site, Site),

    #[error("walk ends at the origin; no forward step to canonicalize")]
    NoForwardStep,

    #[error("walk does not visit the origin")]
    OriginMissing,

    #[error("invalid walk: {0}")]
    InvalidWalk(String),

    #[error("site {0} is outside the domain")]
    OutsideDomain(Site),

    #[error("linear system is singular")]
    Singular,

    #[error("linear solver did not reach tolerance {tol:e} (residual {residual:e} after {iterations} iterations)")]
    SolverStalled {
        tol: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("sequence did not converge: {0}")]
    NotConverged(String),

    #[error("determinant {0:e} is below the degeneracy threshold; refusing to form a ratio")]
    DegenerateDeterminant(f64),

    #[error("division by zero in {0}")]
    DivideByZero(&'static str),

    #[error("only {got} accepted samples, below the configured minimum {min}")]
    InsufficientAcceptance { got: u64, min: u64 },

    #[error("no accepted sample after {0} attempts")]
    MaxTriesExceeded(u64),

    #[error("dimension {0} is not supported by this operation (d = 2 only)")]
    DimensionUnsupported(usize),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
