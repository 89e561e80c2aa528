//! Lie algebras, matrix Lie groups and the built-in b-Lie group pairs.
//!
//! Conventions:
//!
//! * `[e_i, e_j] = Σ_k c^k_ij e_k`;
//! * `⟨Ad*_g μ, X⟩ = ⟨μ, Ad_{g⁻¹} X⟩`, so `Ad*` is a left action;
//! * the Lie-Poisson bracket is the minus one,
//!   `{F, G}(μ) = −Σ c^k_ij μ_k ∂_i F ∂_j G`.

mod algebra;
mod declared;
mod group;
mod pair;

use thiserror::Error;

use crate::linalg::LinalgError;

pub use algebra::{lie_poisson, lie_poisson_expr, matrix_expander, structure_constants_from_matrices, LieAlgebra};
pub use declared::declared_algebra;
pub use group::{Locator, MatrixGroup, Wrap};
pub use pair::{symbolic_exp, BLieGroupPair};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{what} is not in the span of the basis (residual {residual:.3e})")]
    NotInSpan { what: String, residual: f64 },
    #[error("basis matrices are linearly dependent")]
    DependentBasis,
    #[error("[{left}, {right}] leaves the subalgebra")]
    NotSubalgebra { left: String, right: String },
    #[error("unknown group `{0}` (expected se2, galilean or heisenberg_q)")]
    UnknownGroup(String),
    #[error("unknown basis label `{0}`")]
    UnknownLabel(String),
    #[error("generator `{0}` is neither nilpotent nor a rotation generator; no closed-form chart")]
    UnsupportedGenerator(String),
    #[error("could not invert the chart of {0}")]
    LocateFailed(String),
    #[error("matrix logarithm series did not converge")]
    LogDiverged,
    #[error("invalid bracket assignment: {0}")]
    BracketSyntax(String),
    #[error("invalid chart: {0}")]
    Chart(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
