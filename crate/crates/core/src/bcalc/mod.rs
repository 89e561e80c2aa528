//! b-calculus on an adapted chart.
//!
//! A b-chart has coordinates `z_1..z_n`, one of which is the defining
//! coordinate `f` of the critical hypersurface `Z = {f = 0}`. Every b-object
//! is stored in the b-frame `(f∂_f, ∂_{z_i})` or the dual b-coframe
//! `(df/f, dz_i)`, so stored coefficients are smooth and evaluation on `Z`
//! never divides by `f`.

mod form;
mod poisson;
mod symplectic;

use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::sampling::SampleBox;

pub use form::{BForm, BFunction, BVectorField, MultiIndex};
pub use poisson::{invert_to_poisson, PoissonBivector};
pub use symplectic::{bdarboux_model, is_b_symplectic, BSymplecticReport, SymplecticOptions};

/// Smallest `|f|` at which conversion to the coordinate frame is allowed.
pub const DEFAULT_FRAME_FLOOR: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BcalcError {
    #[error("invalid chart: {0}")]
    Chart(String),
    #[error("degree mismatch: {0}")]
    Degree(String),
    #[error("b-symplectic checks need an even-dimensional chart (got {0})")]
    OddDimension(usize),
    #[error("frame matrix is singular at {0:?}")]
    Singular(Vec<f64>),
    #[error("|f| = {f:.3e} is below the coordinate-frame floor {floor:.1e}")]
    TooCloseToZ { f: f64, floor: f64 },
    #[error("b-functions are not evaluated on the critical hypersurface")]
    OnCriticalSet,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Coordinates with a designated defining coordinate and a sampling box.
#[derive(Clone, Debug, PartialEq)]
pub struct BChart {
    names: Vec<String>,
    defining: usize,
    domain: SampleBox,
}

impl BChart {
    pub fn new(names: Vec<String>, defining: usize, domain: SampleBox) -> Result<BChart, BcalcError> {
        if defining >= names.len() {
            return Err(BcalcError::Chart(format!("defining index {defining} out of range")));
        }
        if domain.dim() != names.len() {
            return Err(BcalcError::Chart("domain box dimension differs from coordinate count".into()));
        }
        if domain.lo.iter().zip(&domain.hi).any(|(l, h)| !(l < h)) {
            return Err(BcalcError::Chart("domain box must be open (lo < hi)".into()));
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(BcalcError::Chart("duplicate coordinate names".into()));
        }
        Ok(BChart { names, defining, domain })
    }

    /// Chart on the cube `[-w, w]^n`.
    pub fn with_cube(names: &[&str], defining: &str, half_width: f64) -> Result<BChart, BcalcError> {
        let idx = names
            .iter()
            .position(|n| *n == defining)
            .ok_or_else(|| BcalcError::Chart(format!("defining coordinate `{defining}` not among coordinates")))?;
        BChart::new(names.iter().map(|s| s.to_string()).collect(), idx, SampleBox::cube(names.len(), half_width))
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name_refs(&self) -> Vec<&str> {
        self.names.iter().map(String::as_str).collect()
    }

    pub fn defining(&self) -> usize {
        self.defining
    }

    pub fn defining_name(&self) -> &str {
        &self.names[self.defining]
    }

    pub fn domain(&self) -> &SampleBox {
        &self.domain
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// The frame operator `∂̂_j`: `f∂_f` on the defining coordinate and
    /// `∂_j` otherwise.
    pub fn frame_derivative(&self, e: &Expr, j: usize) -> Expr {
        let d = e.diff(&self.names[j]);
        if j == self.defining {
            Expr::var(self.names[j].clone()).mul(&d)
        } else {
            d
        }
    }

    /// Scale from frame to coordinate components: `f` for the defining
    /// index, `1` otherwise.
    pub fn frame_scale(&self, j: usize) -> Expr {
        if j == self.defining {
            Expr::var(self.names[j].clone())
        } else {
            Expr::one()
        }
    }

    /// Frame coefficients of the differential of a smooth function.
    pub fn differential(&self, g: &Expr) -> Vec<Expr> {
        (0..self.dim()).map(|j| self.frame_derivative(g, j)).collect()
    }
}
