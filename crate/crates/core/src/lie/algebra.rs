use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::Zero;

use super::LieError;
use crate::expr::{EvalError, Expr};
use crate::linalg::{BasisExpander, Matrix};
use crate::scalar::{rational_to_f64, Field};

/// A finite-dimensional Lie algebra given by structure constants
/// `[e_i, e_j] = Σ_k c^k_ij e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra<F> {
    dim: usize,
    labels: Vec<String>,
    c: Vec<F>,
}

impl<F: Field> LieAlgebra<F> {
    /// The abelian algebra on the given labels.
    pub fn abelian(labels: Vec<String>) -> Self {
        let n = labels.len();
        LieAlgebra { dim: n, labels, c: vec![F::zero(); n * n * n] }
    }

    /// Builds an algebra from a dense `c[i][j][k]` table. Only
    /// antisymmetric tables are accepted.
    pub fn from_constants(labels: Vec<String>, c: Vec<Vec<Vec<F>>>) -> Result<Self, LieError> {
        let n = labels.len();
        let mut alg = LieAlgebra::abelian(labels);
        if c.len() != n {
            return Err(LieError::Dimension(format!("{} rows of constants for dimension {n}", c.len())));
        }
        for (i, row) in c.iter().enumerate() {
            if row.len() != n || row.iter().any(|v| v.len() != n) {
                return Err(LieError::Dimension("structure constant table is not n×n×n".into()));
            }
            for (j, v) in row.iter().enumerate() {
                for (k, x) in v.iter().enumerate() {
                    alg.c[(i * n + j) * n + k] = x.clone();
                }
            }
        }
        Ok(alg)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// `c^k_ij`.
    pub fn constant(&self, i: usize, j: usize, k: usize) -> &F {
        &self.c[(i * self.dim + j) * self.dim + k]
    }

    /// Sets `[e_i, e_j] = Σ_k v_k e_k` and the antisymmetric partner.
    pub fn set_bracket(&mut self, i: usize, j: usize, v: &[F]) {
        let n = self.dim;
        for (k, x) in v.iter().enumerate() {
            self.c[(i * n + j) * n + k] = x.clone();
            self.c[(j * n + i) * n + k] = -x.clone();
        }
    }

    /// `[e_i, e_j]` as a coefficient vector.
    pub fn basis_bracket(&self, i: usize, j: usize) -> Vec<F> {
        (0..self.dim).map(|k| self.constant(i, j, k).clone()).collect()
    }

    pub fn bracket(&self, x: &[F], y: &[F]) -> Result<Vec<F>, LieError> {
        let n = self.dim;
        if x.len() != n || y.len() != n {
            return Err(LieError::Dimension(format!(
                "bracket of vectors of length {} and {} in dimension {n}",
                x.len(),
                y.len()
            )));
        }
        let mut out = vec![F::zero(); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                let w = x[i].clone() * y[j].clone();
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.constant(i, j, k);
                    if !c.is_zero() {
                        *o = o.clone() + c.clone() * w.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix of `ad_x` in the basis.
    pub fn ad(&self, x: &[F]) -> Matrix<F> {
        let n = self.dim;
        let cols: Vec<Vec<F>> = (0..n)
            .map(|j| {
                let mut e = vec![F::zero(); n];
                e[j] = F::one();
                self.bracket(x, &e).expect("dimension checked")
            })
            .collect();
        Matrix::from_columns(&cols)
    }

    /// Largest weight of `c^k_ij + c^k_ji`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let s = self.constant(i, j, k).clone() + self.constant(j, i, k).clone();
                    worst = worst.max(s.weight());
                }
            }
        }
        worst
    }

    /// Index quadruples `(i, j, k, l)` where the Jacobi sum is non-zero
    /// (beyond `tol` for inexact fields), together with the largest defect.
    pub fn jacobi_defects(&self, tol: f64) -> (Vec<(usize, usize, usize, usize)>, f64) {
        let n = self.dim;
        let mut bad = Vec::new();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    for l in 0..n {
                        let mut s = F::zero();
                        for m in 0..n {
                            s = s
                                + self.constant(i, j, m).clone() * self.constant(m, k, l).clone()
                                + self.constant(j, k, m).clone() * self.constant(m, i, l).clone()
                                + self.constant(k, i, m).clone() * self.constant(m, j, l).clone();
                        }
                        let w = s.weight();
                        worst = worst.max(w);
                        let failed = if F::EXACT { !s.is_zero() } else { w > tol };
                        if failed {
                            bad.push((i, j, k, l));
                        }
                    }
                }
            }
        }
        (bad, worst)
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> LieAlgebra<G> {
        LieAlgebra { dim: self.dim, labels: self.labels.clone(), c: self.c.iter().map(f).collect() }
    }

    /// Subalgebra spanned by a subset of the basis; fails if the span is not
    /// closed under the bracket.
    pub fn subalgebra(&self, indices: &[usize]) -> Result<LieAlgebra<F>, LieError> {
        let k = indices.len();
        let mut sub = LieAlgebra::abelian(indices.iter().map(|&i| self.labels[i].clone()).collect());
        for a in 0..k {
            for b in a + 1..k {
                let full = self.basis_bracket(indices[a], indices[b]);
                for (m, v) in full.iter().enumerate() {
                    if !v.is_zero() && !indices.contains(&m) {
                        return Err(LieError::NotSubalgebra {
                            left: self.labels[indices[a]].clone(),
                            right: self.labels[indices[b]].clone(),
                        });
                    }
                }
                let v: Vec<F> = indices.iter().map(|&m| full[m].clone()).collect();
                sub.set_bracket(a, b, &v);
            }
        }
        Ok(sub)
    }
}

impl LieAlgebra<BigRational> {
    pub fn to_f64(&self) -> LieAlgebra<f64> {
        self.map(rational_to_f64)
    }

    /// CSV table: one row per ordered pair `i < j` with the coefficients of
    /// `[e_i, e_j]`.
    pub fn bracket_table_csv(&self) -> String {
        let mut out = String::from("left,right");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                let _ = write!(out, "{},{}", self.labels[i], self.labels[j]);
                for k in 0..self.dim {
                    let _ = write!(out, ",{}", self.constant(i, j, k));
                }
                out.push('\n');
            }
        }
        out
    }

    /// Human-readable non-zero brackets, e.g. `[J, P1] = P2`.
    pub fn bracket_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                let v = self.basis_bracket(i, j);
                if v.iter().all(Zero::is_zero) {
                    continue;
                }
                let rhs = Expr::sum(
                    v.iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(k, c)| Expr::var(self.labels[k].clone()).scale(c))
                        .collect::<Vec<_>>()
                        .iter(),
                );
                let rhs = crate::expr::Polynomial::from_expr(&rhs).map_or(rhs, |p| p.to_expr());
                out.push(format!("[{}, {}] = {}", self.labels[i], self.labels[j], rhs));
            }
        }
        out
    }

    /// Dual coordinate names `mu_<label>`.
    pub fn dual_names(&self) -> Vec<String> {
        self.labels.iter().map(|l| format!("mu_{l}")).collect()
    }

    /// Coefficient of `∂_i ∧ ∂_j` of the minus Lie-Poisson bivector,
    /// `−Σ_k c^k_ij μ_k`, as an expression in the dual coordinates.
    pub fn lie_poisson_coefficient(&self, i: usize, j: usize) -> Expr {
        let names = self.dual_names();
        let terms: Vec<Expr> = (0..self.dim)
            .filter(|&k| !self.constant(i, j, k).is_zero())
            .map(|k| Expr::var(names[k].clone()).scale(&-self.constant(i, j, k)))
            .collect();
        let sum = Expr::sum(terms.iter());
        crate::expr::Polynomial::from_expr(&sum).map_or(sum, |p| p.to_expr())
    }
}

/// Structure constants of the span of matrices, computed exactly from
/// commutators. This is the oracle for every built-in algebra.
pub fn structure_constants_from_matrices(
    basis: &[Matrix<BigRational>],
    labels: &[String],
) -> Result<LieAlgebra<BigRational>, LieError> {
    let n = basis.len();
    if labels.len() != n {
        return Err(LieError::Dimension(format!("{} labels for {n} basis matrices", labels.len())));
    }
    let Some(first) = basis.first() else {
        return Ok(LieAlgebra::abelian(Vec::new()));
    };
    let m = first.rows();
    if basis.iter().any(|b| b.rows() != m || b.cols() != m) {
        return Err(LieError::Dimension("basis matrices must be square and of equal size".into()));
    }
    let expander = matrix_expander(basis)?;
    let mut alg = LieAlgebra::abelian(labels.to_vec());
    for i in 0..n {
        for j in i + 1..n {
            let comm = basis[i].commutator(&basis[j]);
            let (coeffs, residual) = expander.expand_exact(comm.data()).map_err(LieError::Linalg)?;
            if residual > 0.0 {
                return Err(LieError::NotInSpan { what: format!("[{}, {}]", labels[i], labels[j]), residual });
            }
            alg.set_bracket(i, j, &coeffs);
        }
    }
    Ok(alg)
}

/// Expander for flattened matrices in the span of `basis`.
pub fn matrix_expander<F: Field>(basis: &[Matrix<F>]) -> Result<BasisExpander<F>, LieError> {
    let cols: Vec<Vec<F>> = basis.iter().map(|b| b.data().to_vec()).collect();
    BasisExpander::new(Matrix::from_columns(&cols)).map_err(|_| LieError::DependentBasis)
}

/// Minus Lie-Poisson bracket `{F,G}(μ) = −Σ c^k_ij μ_k ∂_i F ∂_j G`.
/// `F` and `G` are expressions in the dual names `mu_<label>`.
pub fn lie_poisson(alg: &LieAlgebra<BigRational>, f: &Expr, g: &Expr, mu: &[f64]) -> Result<f64, EvalError> {
    let names = alg.dual_names();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let n = alg.dim();
    let df: Vec<f64> = (0..n).map(|i| f.diff(refs[i]).compile(&refs)?.eval(mu)).collect::<Result<_, _>>()?;
    let dg: Vec<f64> = (0..n).map(|i| g.diff(refs[i]).compile(&refs)?.eval(mu)).collect::<Result<_, _>>()?;
    let mut acc = 0.0;
    for i in 0..n {
        if df[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if dg[j] == 0.0 {
                continue;
            }
            for (k, m) in mu.iter().enumerate() {
                let c = alg.constant(i, j, k);
                if !c.is_zero() {
                    acc -= rational_to_f64(c) * m * df[i] * dg[j];
                }
            }
        }
    }
    Ok(acc)
}

/// Symbolic minus Lie-Poisson bracket of two expressions in `mu_<label>`.
pub fn lie_poisson_expr(alg: &LieAlgebra<BigRational>, f: &Expr, g: &Expr) -> Expr {
    let names = alg.dual_names();
    let n = alg.dim();
    let df: Vec<Expr> = names.iter().map(|v| f.diff(v)).collect();
    let dg: Vec<Expr> = names.iter().map(|v| g.diff(v)).collect();
    let mut acc = Expr::zero();
    for i in 0..n {
        for j in 0..n {
            if i == j || df[i].is_zero() || dg[j].is_zero() {
                continue;
            }
            let coeff = if i < j { alg.lie_poisson_coefficient(i, j) } else { alg.lie_poisson_coefficient(j, i).neg() };
            if coeff.is_zero() {
                continue;
            }
            acc = acc.add(&coeff.mul(&df[i]).mul(&dg[j]));
        }
    }
    acc
}
