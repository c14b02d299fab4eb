use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("subspace is {{0}}: every spanning vector is numerically zero")]
    ZeroSubspace,

    #[error("{clause}: mass 0 < ∫‖L_ω‖² μ(dω) ≤ 1 violated, Σ w_i ‖L_i‖² = {mass:e}")]
    Inadmissible { clause: &'static str, mass: f64 },

    #[error("weights do not form a probability vector (sum = {sum:e})")]
    NotProbability { sum: f64 },

    #[error("atom {atom} has a non-identity linear operator")]
    NotIdentityLinop { atom: usize },

    #[error("grid oracle: {0}")]
    Grid(String),

    #[error("supremum attained on the grid boundary; the true value is likely unbounded")]
    BoundaryAttained,

    #[error("iterate became non-finite at iteration {iter}")]
    Diverged { iter: usize },
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}
