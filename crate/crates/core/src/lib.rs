//! b-symplectic geometry on b-Lie groups.
//!
//! The crate is organised bottom-up:
//!
//! * [`expr`]: a small expression language with exact differentiation. Every
//!   coefficient function, Hamiltonian and test function is an [`Expr`].
//! * [`lie`]: Lie algebras by structure constants, matrix models of the
//!   built-in b-Lie group pairs, adjoint and coadjoint actions, and the minus
//!   Lie-Poisson bracket.
//! * [`bcalc`]: b-charts, b-forms stored in the b-frame, the b-exterior
//!   derivative, b-functions, b-symplectic checks and Poisson inversion.
//! * [`blift`]: the b-cotangent bundle of a b-Lie group pair, the b-Liouville
//!   form, the cotangent lift of left translations and its moment map.
//! * [`reduction`]: principal (b-)connections, the minimal-coupling maps and
//!   the reduced Poisson structure.
//! * [`dynamics`]: Hamiltonian vector fields and fixed-step integrators.
//! * [`verify`]: the full verification suite with structured reports.
//!
//! Numerical kernels are generic over [`Scalar`] (`f32`, `f64`, dual
//! numbers); exact algebra is generic over [`Field`] (adds rationals).

pub mod bcalc;
pub mod blift;
pub mod dual;
pub mod dynamics;
pub mod expr;
pub mod lie;
pub mod linalg;
pub mod reduction;
pub mod sampling;
pub mod scalar;
pub mod verify;

pub use dual::Dual;
pub use expr::{Env, Expr};
pub use linalg::Matrix;
pub use scalar::{Field, Scalar};

/// Default real scalar.
pub type Real = f64;
/// Exact rational scalar used for structure constants.
pub type Rational = num_rational::BigRational;
/// Forward-mode dual number over `f64`.
pub type Dual64 = Dual<f64>;
/// Dense real matrix.
pub type RealMatrix = Matrix<f64>;
/// Dense exact matrix.
pub type ExactMatrix = Matrix<Rational>;
/// Lie algebra with exact structure constants.
pub type ExactAlgebra = lie::LieAlgebra<Rational>;
/// Lie algebra with `f64` structure constants.
pub type RealAlgebra = lie::LieAlgebra<f64>;
