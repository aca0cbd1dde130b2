//! Error type shared by all simulation modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration or argument value is outside its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A numerical routine produced NaN/Inf or otherwise blew up.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An iterative routine did not converge within its iteration budget.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Adjacent Bloch states have (near-)vanishing overlap; the discrete
    /// Berry connection is undefined at this grid resolution.
    #[error("gauge singularity: {0}")]
    GaugeSingularity(String),

    /// A walker confined to an open subregion reached its boundary.
    #[error("boundary violation: {0}")]
    BoundaryViolation(String),

    /// Attractive nonlinearity drove the peak density past the collapse
    /// heuristic.
    #[error("condensate collapse: {0}")]
    Collapse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
