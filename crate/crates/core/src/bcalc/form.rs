use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use super::{BChart, BcalcError};
use crate::expr::{CompiledExpr, Expr, Polynomial};
use crate::linalg::Matrix;

/// Strictly increasing list of frame indices.
pub type MultiIndex = Vec<usize>;

/// A b-vector field in frame components: `a_f·(f∂_f) + Σ a_i ∂_{z_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BVectorField {
    coeffs: Vec<Expr>,
}

impl BVectorField {
    pub fn new(coeffs: Vec<Expr>) -> BVectorField {
        BVectorField { coeffs }
    }

    /// The `i`-th frame field.
    pub fn frame(dim: usize, i: usize) -> BVectorField {
        BVectorField { coeffs: (0..dim).map(|j| if j == i { Expr::one() } else { Expr::zero() }).collect() }
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval_at(&self, chart: &BChart, x: &[f64]) -> Result<Vec<f64>, BcalcError> {
        let code = CompiledExpr::new(&self.coeffs, &chart.name_refs())?;
        Ok(code.eval_all(x)?)
    }

    /// True when every coefficient is smooth across `f = 0`.
    pub fn is_regular(&self, chart: &BChart) -> bool {
        self.coeffs.iter().all(|c| c.is_regular_in(chart.defining_name()))
    }
}

/// A b-form `Σ_I ω_I e^I` in the b-coframe `e^f = df/f`, `e^i = dz_i`.
///
/// Terms whose multi-index contains the defining index form the `α∧df/f`
/// part; the rest form the smooth part `β`.
#[derive(Clone, PartialEq)]
pub struct BForm {
    dim: usize,
    degree: usize,
    terms: BTreeMap<MultiIndex, Expr>,
}

impl fmt::Debug for BForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BForm(deg {}; ", self.degree)?;
        for (i, (k, v)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({v}) e{k:?}")?;
        }
        write!(f, ")")
    }
}

/// Sign of the permutation sorting `idx`, or `None` on a repeated index.
fn sort_sign(idx: &[usize]) -> Option<(MultiIndex, i64)> {
    let mut v = idx.to_vec();
    let mut sign = 1;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            } else if v[j] == v[j + 1] {
                return None;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

impl BForm {
    pub fn zero(dim: usize, degree: usize) -> BForm {
        BForm { dim, degree, terms: BTreeMap::new() }
    }

    /// A 0-form (smooth function).
    pub fn function(dim: usize, g: Expr) -> BForm {
        let mut out = BForm::zero(dim, 0);
        out.add_term(&[], g);
        out
    }

    /// Adds `c·e^{idx}` where `idx` may be unsorted (the sign of the sorting
    /// permutation is applied; repeated indices contribute nothing).
    pub fn add_term(&mut self, idx: &[usize], c: Expr) {
        assert_eq!(idx.len(), self.degree, "multi-index length must equal the degree");
        assert!(idx.iter().all(|&i| i < self.dim), "frame index out of range");
        let Some((sorted, sign)) = sort_sign(idx) else { return };
        if c.is_zero() {
            return;
        }
        let c = if sign < 0 { c.neg() } else { c };
        let entry = self.terms.entry(sorted.clone()).or_insert_with(Expr::zero);
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.terms.remove(&sorted);
        }
    }

    pub fn from_terms(dim: usize, degree: usize, terms: impl IntoIterator<Item = (MultiIndex, Expr)>) -> BForm {
        let mut out = BForm::zero(dim, degree);
        for (idx, c) in terms {
            out.add_term(&idx, c);
        }
        out
    }

    /// A form given in the classical coordinate coframe `dz_I`; the factor
    /// `dz_f = f·(df/f)` is absorbed into the coefficients.
    pub fn from_smooth(chart: &BChart, degree: usize, terms: impl IntoIterator<Item = (MultiIndex, Expr)>) -> BForm {
        let mut out = BForm::zero(chart.dim(), degree);
        for (idx, c) in terms {
            let c = if idx.contains(&chart.defining()) { c.mul(&chart.frame_scale(chart.defining())) } else { c };
            out.add_term(&idx, c);
        }
        out
    }

    /// `α∧df/f + β` with `α` of degree `k−1` and `β` of degree `k`, both
    /// given in the coordinate coframe and free of `df`.
    pub fn from_alpha_beta(chart: &BChart, alpha: &BForm, beta: &BForm) -> Result<BForm, BcalcError> {
        let f = chart.defining();
        if beta.degree != alpha.degree + 1 {
            return Err(BcalcError::Degree("β must have degree deg α + 1".into()));
        }
        if alpha.terms.keys().chain(beta.terms.keys()).any(|k| k.contains(&f)) {
            return Err(BcalcError::Degree("α and β must not contain df".into()));
        }
        let mut out = beta.clone();
        for (idx, c) in &alpha.terms {
            let mut full = idx.clone();
            full.push(f);
            out.add_term(&full, c.clone());
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Expr)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, idx: &[usize]) -> Expr {
        match sort_sign(idx) {
            Some((sorted, sign)) => {
                let c = self.terms.get(&sorted).cloned().unwrap_or_else(Expr::zero);
                if sign < 0 {
                    c.neg()
                } else {
                    c
                }
            }
            None => Expr::zero(),
        }
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(true)` when every coefficient is the zero polynomial; `None` if
    /// some coefficient is not polynomial.
    pub fn is_exactly_zero(&self) -> Option<bool> {
        for c in self.terms.values() {
            if !Polynomial::from_expr(c)?.is_zero() {
                return Some(false);
            }
        }
        Some(true)
    }

    pub fn add(&self, rhs: &BForm) -> BForm {
        assert_eq!((self.dim, self.degree), (rhs.dim, rhs.degree));
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k, c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Expr) -> BForm {
        let mut out = BForm::zero(self.dim, self.degree);
        for (k, c) in &self.terms {
            out.add_term(k, c.mul(s));
        }
        out
    }

    pub fn neg(&self) -> BForm {
        self.scale(&Expr::int(-1))
    }

    pub fn wedge(&self, rhs: &BForm) -> BForm {
        assert_eq!(self.dim, rhs.dim);
        let mut out = BForm::zero(self.dim, self.degree + rhs.degree);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let mut idx = a.clone();
                idx.extend_from_slice(b);
                out.add_term(&idx, ca.mul(cb));
            }
        }
        out
    }

    /// The b-exterior derivative `d(ω_I e^I) = Σ_j ∂̂_j ω_I e^j∧e^I`, with
    /// `∂̂_f = f∂_f`. Equivalent to `dα∧df/f + dβ`.
    pub fn b_d(&self, chart: &BChart) -> BForm {
        let mut out = BForm::zero(self.dim, self.degree + 1);
        for (idx, c) in &self.terms {
            for j in 0..self.dim {
                if idx.contains(&j) {
                    continue;
                }
                let dc = chart.frame_derivative(c, j);
                if dc.is_zero() {
                    continue;
                }
                let mut full = vec![j];
                full.extend_from_slice(idx);
                out.add_term(&full, dc);
            }
        }
        out
    }

    /// Smooth part `α` of `α∧df/f + β` (degree `k−1`).
    pub fn alpha(&self, chart: &BChart) -> BForm {
        let f = chart.defining();
        let mut out = BForm::zero(self.dim, self.degree.saturating_sub(1));
        for (idx, c) in &self.terms {
            if let Some(p) = idx.iter().position(|&i| i == f) {
                // move e^f to the end: (k-1-p) transpositions
                let sign = if (self.degree - 1 - p).is_multiple_of(2) { 1 } else { -1 };
                let rest: Vec<usize> = idx.iter().copied().filter(|&i| i != f).collect();
                out.add_term(&rest, if sign > 0 { c.clone() } else { c.neg() });
            }
        }
        out
    }

    /// Smooth part `β` (terms without `df/f`).
    pub fn beta(&self, chart: &BChart) -> BForm {
        let f = chart.defining();
        BForm::from_terms(
            self.dim,
            self.degree,
            self.terms.iter().filter(|(k, _)| !k.contains(&f)).map(|(k, c)| (k.clone(), c.clone())),
        )
    }

    fn compiled(&self, chart: &BChart) -> Result<(Vec<MultiIndex>, CompiledExpr), BcalcError> {
        let keys: Vec<MultiIndex> = self.terms.keys().cloned().collect();
        let exprs: Vec<Expr> = self.terms.values().cloned().collect();
        Ok((keys, CompiledExpr::new(&exprs, &chart.name_refs())?))
    }

    /// Pairing with `k` b-vectors given by frame components at `x`.
    pub fn pair_frame(&self, chart: &BChart, x: &[f64], vectors: &[Vec<f64>]) -> Result<f64, BcalcError> {
        if vectors.len() != self.degree {
            return Err(BcalcError::Degree(format!(
                "a {}-form needs {} vectors, got {}",
                self.degree,
                self.degree,
                vectors.len()
            )));
        }
        let (keys, code) = self.compiled(chart)?;
        let vals = code.eval_all(x)?;
        let mut acc = 0.0;
        for (idx, c) in keys.iter().zip(vals) {
            let m = Matrix::from_fn(self.degree, self.degree, |a, b| vectors[a][idx[b]]);
            acc += c * if self.degree == 0 { 1.0 } else { m.determinant() };
        }
        Ok(acc)
    }

    /// Pairing with b-vector fields evaluated at `x`.
    pub fn pair(&self, chart: &BChart, vectors: &[BVectorField], x: &[f64]) -> Result<f64, BcalcError> {
        let vals = vectors.iter().map(|v| v.eval_at(chart, x)).collect::<Result<Vec<_>, _>>()?;
        self.pair_frame(chart, x, &vals)
    }

    /// Largest absolute coefficient at `x`.
    pub fn max_abs_coefficient(&self, chart: &BChart, x: &[f64]) -> Result<f64, BcalcError> {
        let (_, code) = self.compiled(chart)?;
        Ok(code.eval_all(x)?.iter().fold(0.0, |m: f64, v| m.max(v.abs())))
    }

    /// Frame matrix `ω(E_i, E_j)` of a 2-form, symbolically.
    pub fn frame_matrix_expr(&self) -> Result<Matrix<Expr>, BcalcError> {
        if self.degree != 2 {
            return Err(BcalcError::Degree(format!("frame matrix of a {}-form", self.degree)));
        }
        Ok(Matrix::from_fn(self.dim, self.dim, |i, j| self.coefficient(&[i, j])))
    }

    /// Frame matrix of a 2-form at `x`.
    pub fn frame_matrix_at(&self, chart: &BChart, x: &[f64]) -> Result<Matrix<f64>, BcalcError> {
        let m = self.frame_matrix_expr()?;
        let code = CompiledExpr::new(m.data(), &chart.name_refs())?;
        Ok(Matrix::from_vec(self.dim, self.dim, code.eval_all(x)?))
    }

    /// Matrix of a 2-form in the coordinate coframe at a point off `Z`
    /// (`|f| ≥ floor`).
    pub fn coordinate_matrix_at(&self, chart: &BChart, x: &[f64], floor: f64) -> Result<Matrix<f64>, BcalcError> {
        let f = x[chart.defining()];
        if f.abs() < floor {
            return Err(BcalcError::TooCloseToZ { f, floor });
        }
        let mut m = self.frame_matrix_at(chart, x)?;
        let d = chart.defining();
        for k in 0..self.dim {
            let a = *m.get(d, k) / f;
            m.set(d, k, a);
            let b = *m.get(k, d) / f;
            m.set(k, d, b);
        }
        Ok(m)
    }
}

/// `c·log|f| + g` with `g` smooth.
#[derive(Clone, Debug, PartialEq)]
pub struct BFunction {
    pub c: BigRational,
    pub g: Expr,
}

impl BFunction {
    pub fn new(c: BigRational, g: Expr) -> BFunction {
        BFunction { c, g }
    }

    /// Value away from `Z`; evaluation on `Z` is refused.
    pub fn value(&self, chart: &BChart, x: &[f64]) -> Result<f64, BcalcError> {
        let f = x[chart.defining()];
        if f == 0.0 && !self.c.is_zero() {
            return Err(BcalcError::OnCriticalSet);
        }
        let g = self.g.compile(&chart.name_refs())?.eval(x)?;
        let c = crate::scalar::rational_to_f64(&self.c);
        Ok(if self.c.is_zero() { g } else { c * f.abs().ln() + g })
    }

    /// `d(c log|f| + g) = c·df/f + dg`.
    pub fn d(&self, chart: &BChart) -> BForm {
        let mut out = BForm::zero(chart.dim(), 1);
        out.add_term(&[chart.defining()], Expr::constant(self.c.clone()));
        for (j, dg) in chart.differential(&self.g).into_iter().enumerate() {
            out.add_term(&[j], dg);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> BChart {
        BChart::with_cube(&["x", "y", "z"], "y", 2.0).unwrap()
    }

    #[test]
    fn sorting_signs() {
        assert_eq!(sort_sign(&[2, 0, 1]), Some((vec![0, 1, 2], 1)));
        assert_eq!(sort_sign(&[1, 0]), Some((vec![0, 1], -1)));
        assert_eq!(sort_sign(&[1, 1]), None);
    }

    #[test]
    fn d_of_log_f_is_df_over_f() {
        let c = chart();
        let u = BFunction::new(crate::scalar::rational_int(1), Expr::zero());
        let d = u.d(&c);
        assert_eq!(d.terms().count(), 1);
        assert!(d.coefficient(&[1]).is_one());
    }

    #[test]
    fn alpha_beta_roundtrip() {
        let c = chart();
        let w = BForm::from_terms(
            3,
            2,
            vec![(vec![0, 1], Expr::parse("x*z").unwrap()), (vec![1, 2], Expr::parse("z").unwrap()), (vec![0, 2], Expr::one())],
        );
        let back = BForm::from_alpha_beta(&c, &w.alpha(&c), &w.beta(&c)).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn wedge_is_graded_commutative() {
        let a = BForm::from_terms(3, 1, vec![(vec![0], Expr::var("x")), (vec![1], Expr::one())]);
        let b = BForm::from_terms(3, 1, vec![(vec![2], Expr::var("z"))]);
        assert_eq!(a.wedge(&b).add(&b.wedge(&a)).is_exactly_zero(), Some(true));
        assert_eq!(a.wedge(&a).is_exactly_zero(), Some(true));
    }
}
