//! Scalar abstractions.
//!
//! Two traits are used throughout the crate:
//!
//! * [`Scalar`]: a real floating-point-like number (`f32`, `f64`, [`Dual`]).
//!   Everything that is evaluated numerically is generic over it, so the same
//!   code path yields values (`f64`) or exact first derivatives (`Dual<f64>`).
//! * [`Field`]: anything we can run Gaussian elimination over. This adds the
//!   exact rationals used for structure constants and basis expansions.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive, Zero};

pub use crate::dual::Dual;

/// Real scalar the numerical kernels are generic over.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Embeds an `f64` literal.
    fn lit(x: f64) -> Self;

    /// The real (value) part as `f64`.
    fn re(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn re(self) -> f64 {
        self as f64
    }
}

/// A field that supports Gaussian elimination.
///
/// `weight` is the magnitude used for pivot selection and residual checks;
/// for exact fields any non-zero element is an acceptable pivot.
pub trait Field: Clone + PartialEq + Debug + Num + Neg<Output = Self> {
    /// True when arithmetic is exact (no rounding tolerance applies).
    const EXACT: bool;

    fn weight(&self) -> f64;

    fn from_rational(r: &BigRational) -> Self;
}

impl Field for f64 {
    const EXACT: bool = false;
    fn weight(&self) -> f64 {
        self.abs()
    }
    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }
}

impl Field for f32 {
    const EXACT: bool = false;
    fn weight(&self) -> f64 {
        self.abs() as f64
    }
    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r) as f32
    }
}

impl<T: Scalar> Field for Dual<T> {
    const EXACT: bool = false;
    fn weight(&self) -> f64 {
        self.re.re().abs()
    }
    fn from_rational(r: &BigRational) -> Self {
        Dual::constant(T::lit(rational_to_f64(r)))
    }
}

impl Field for BigRational {
    const EXACT: bool = true;
    fn weight(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            rational_to_f64(&self.abs()).max(f64::MIN_POSITIVE)
        }
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

/// Nearest `f64` to an exact rational (falls back to a ratio of floats for
/// very large numerators and denominators).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact rational from a small integer.
pub fn rational_int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Exact rational `n / d`.
pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Converts an `f64` (exactly) into a rational.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Lifts a vector of `f64` into any scalar.
pub fn lift_slice<T: Scalar>(xs: &[f64]) -> Vec<T> {
    xs.iter().map(|&x| T::lit(x)).collect()
}

/// Real parts of a slice of scalars.
pub fn re_slice<T: Scalar>(xs: &[T]) -> Vec<f64> {
    xs.iter().map(|x| x.re()).collect()
}
