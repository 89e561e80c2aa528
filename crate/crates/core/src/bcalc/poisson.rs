use std::collections::BTreeMap;

use super::{BChart, BForm, BcalcError};
use crate::expr::{CompiledExpr, Expr, Polynomial};
use crate::linalg::Matrix;
use crate::sampling::box_points;

/// A bivector `Σ_{i<j} Π^{ij} ∂_i∧∂_j` over coordinate vector fields, with
/// bracket `{F,G} = Σ_{i,j} Π^{ij} ∂_iF ∂_jG`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonBivector {
    names: Vec<String>,
    entries: BTreeMap<(usize, usize), Expr>,
}

fn normalize(e: Expr) -> Expr {
    match Polynomial::from_expr(&e) {
        Some(p) => p.to_expr(),
        None => e,
    }
}

impl PoissonBivector {
    pub fn new(names: Vec<String>) -> PoissonBivector {
        PoissonBivector { names, entries: BTreeMap::new() }
    }

    /// From an antisymmetric matrix of coordinate components; only the upper
    /// triangle is read.
    pub fn from_matrix(names: Vec<String>, m: &Matrix<Expr>) -> PoissonBivector {
        let mut out = PoissonBivector::new(names);
        for i in 0..m.rows() {
            for j in i + 1..m.cols() {
                out.set(i, j, m.get(i, j).clone());
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Sets `Π^{ij}` (and implicitly `Π^{ji} = −Π^{ij}`).
    pub fn set(&mut self, i: usize, j: usize, e: Expr) {
        assert!(i != j || e.is_zero(), "diagonal entries of a bivector vanish");
        if i == j {
            return;
        }
        let (key, e) = if i < j { ((i, j), e) } else { ((j, i), e.neg()) };
        if e.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, e);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Expr {
        if i == j {
            return Expr::zero();
        }
        if i < j {
            self.entries.get(&(i, j)).cloned().unwrap_or_else(Expr::zero)
        } else {
            self.entries.get(&(j, i)).map(Expr::neg).unwrap_or_else(Expr::zero)
        }
    }

    /// Structurally nonzero upper-triangle entries.
    pub fn nonzero_entries(&self) -> impl Iterator<Item = (usize, usize, &Expr)> {
        self.entries.iter().map(|(&(i, j), e)| (i, j, e))
    }

    pub fn matrix_expr(&self) -> Matrix<Expr> {
        Matrix::from_fn(self.dim(), self.dim(), |i, j| self.get(i, j))
    }

    fn refs(&self) -> Vec<&str> {
        self.names.iter().map(String::as_str).collect()
    }

    pub fn matrix_at(&self, x: &[f64]) -> Result<Matrix<f64>, BcalcError> {
        let m = self.matrix_expr();
        let code = CompiledExpr::new(m.data(), &self.refs())?;
        Ok(Matrix::from_vec(self.dim(), self.dim(), code.eval_all(x)?))
    }

    pub fn bracket_expr(&self, f: &Expr, g: &Expr) -> Expr {
        let df: Vec<Expr> = self.names.iter().map(|n| f.diff(n)).collect();
        let dg: Vec<Expr> = self.names.iter().map(|n| g.diff(n)).collect();
        let mut acc = Expr::zero();
        for (&(i, j), p) in &self.entries {
            let t = df[i].mul(&dg[j]).sub(&df[j].mul(&dg[i]));
            if !t.is_zero() {
                acc = acc.add(&p.mul(&t));
            }
        }
        acc
    }

    pub fn bracket_at(&self, f: &Expr, g: &Expr, x: &[f64]) -> Result<f64, BcalcError> {
        Ok(self.bracket_expr(f, g).compile(&self.refs())?.eval(x)?)
    }

    /// `{{F,G},K} + {{G,K},F} + {{K,F},G}` at `x`.
    pub fn jacobiator_at(&self, f: &Expr, g: &Expr, k: &Expr, x: &[f64]) -> Result<f64, BcalcError> {
        let terms = [
            self.bracket_expr(&self.bracket_expr(f, g), k),
            self.bracket_expr(&self.bracket_expr(g, k), f),
            self.bracket_expr(&self.bracket_expr(k, f), g),
        ];
        let code = CompiledExpr::new(&terms, &self.refs())?;
        Ok(code.eval_all(x)?.iter().sum())
    }

    /// Largest component of the Schouten tensor
    /// `Σ_l (Π^{li}∂_lΠ^{jk} + Π^{lj}∂_lΠ^{ki} + Π^{lk}∂_lΠ^{ij})` at `x`.
    pub fn jacobi_tensor_max_at(&self, x: &[f64]) -> Result<f64, BcalcError> {
        let n = self.dim();
        let mut exprs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let mut acc = Expr::zero();
                    for l in 0..n {
                        let nl = &self.names[l];
                        for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                            let p = self.get(l, a);
                            if p.is_zero() {
                                continue;
                            }
                            let d = self.get(b, c).diff(nl);
                            if !d.is_zero() {
                                acc = acc.add(&p.mul(&d));
                            }
                        }
                    }
                    exprs.push(acc);
                }
            }
        }
        if exprs.is_empty() {
            return Ok(0.0);
        }
        let code = CompiledExpr::new(&exprs, &self.refs())?;
        Ok(code.eval_all(x)?.iter().fold(0.0, |m: f64, v| m.max(v.abs())))
    }

    /// `X_H = Σ_{i,j} Π^{ij} ∂_jH ∂_i`, so that `X_H(F) = {F,H}`.
    pub fn hamiltonian_vector(&self, h: &Expr) -> Vec<Expr> {
        let dh: Vec<Expr> = self.names.iter().map(|n| h.diff(n)).collect();
        (0..self.dim())
            .map(|i| {
                let mut acc = Expr::zero();
                for (j, d) in dh.iter().enumerate() {
                    let p = self.get(i, j);
                    if !p.is_zero() && !d.is_zero() {
                        acc = acc.add(&p.mul(d));
                    }
                }
                acc
            })
            .collect()
    }
}

/// Gauss-Jordan inverse of a symbolic matrix. Constant pivots are preferred;
/// polynomial intermediate entries are kept in normal form.
fn symbolic_inverse(m: &Matrix<Expr>) -> Option<Matrix<Expr>> {
    let n = m.rows();
    let mut a: Vec<Vec<Expr>> = (0..n)
        .map(|i| {
            let mut row = m.row(i).to_vec();
            row.extend((0..n).map(|j| if i == j { Expr::one() } else { Expr::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let candidates: Vec<usize> = (col..n).filter(|&r| !a[r][col].is_zero()).collect();
        let piv = candidates.iter().copied().find(|&r| a[r][col].is_const()).or(candidates.first().copied())?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for e in a[col].iter_mut() {
            if !e.is_zero() {
                *e = normalize(e.div(&p));
            }
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in 0..2 * n {
                if a[col][c].is_zero() {
                    continue;
                }
                let v = a[r][c].sub(&factor.mul(&a[col][c]));
                a[r][c] = normalize(v);
            }
        }
    }
    Some(Matrix::from_fn(n, n, |i, j| a[i][n + j].clone()))
}

/// The Poisson bivector of a b-symplectic form.
///
/// With `Ω_{ij} = ω(E_i, E_j)` in the b-frame, the frame components of `Π`
/// are `(Ω⁻¹)ᵀ`; coordinate components carry a factor `f` for each
/// defining-frame index. This is the convention in which `ι_{X_H}ω = dH` for
/// `X_H = Π(·, dH)`, and it yields `{x₁, y₁} = y₁` on the b-Darboux model.
pub fn invert_to_poisson(omega: &BForm, chart: &BChart) -> Result<PoissonBivector, BcalcError> {
    if chart.dim() % 2 == 1 {
        return Err(BcalcError::OddDimension(chart.dim()));
    }
    let frame = omega.frame_matrix_expr()?;
    // The symbolic inverse can succeed on a matrix that is singular at some
    // points, so the precondition is checked on samples.
    let n = chart.dim();
    let code = CompiledExpr::new(frame.data(), &chart.name_refs())?;
    for x in box_points(chart.domain(), 16, crate::sampling::DEFAULT_SEED) {
        let m = Matrix::from_vec(n, n, code.eval_all(&x)?);
        if m.determinant().abs() < 1e-12 {
            return Err(BcalcError::Singular(x));
        }
    }
    let inv = symbolic_inverse(&frame).ok_or_else(|| BcalcError::Singular(vec![]))?;
    let mut out = PoissonBivector::new(chart.names().to_vec());
    for i in 0..n {
        for j in i + 1..n {
            let e = inv.get(j, i).mul(&chart.frame_scale(i)).mul(&chart.frame_scale(j));
            out.set(i, j, normalize(e));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcalc::bdarboux_model;

    #[test]
    fn darboux_one_gives_y1() {
        let (chart, w) = bdarboux_model(1);
        let pi = invert_to_poisson(&w, &chart).unwrap();
        assert_eq!(pi.get(0, 1).to_string(), "y1");
    }

    #[test]
    fn darboux_two_smooth_block() {
        let (chart, w) = bdarboux_model(2);
        let pi = invert_to_poisson(&w, &chart).unwrap();
        assert!(pi.get(2, 3).is_one());
        assert_eq!(pi.nonzero_entries().count(), 2);
    }

    #[test]
    fn reduced_b_canonical_chart() {
        let chart = BChart::with_cube(&["phi", "p"], "phi", 1.0).unwrap();
        let w = BForm::from_terms(2, 2, vec![(vec![0, 1], Expr::one())]);
        let pi = invert_to_poisson(&w, &chart).unwrap();
        assert_eq!(pi.get(0, 1).to_string(), "phi");
    }

    #[test]
    fn hamiltonian_vector_of_p() {
        let mut pi = PoissonBivector::new(vec!["phi".into(), "p".into()]);
        pi.set(0, 1, Expr::var("phi"));
        let x = pi.hamiltonian_vector(&Expr::var("p"));
        assert_eq!(x[0].to_string(), "phi");
        assert!(x[1].is_zero());
    }

    #[test]
    fn nonconstant_frame_matrix() {
        let chart = BChart::with_cube(&["x", "y"], "y", 1.0).unwrap();
        // (2 + x^2) dx∧dy/y
        let w = BForm::from_terms(2, 2, vec![(vec![0, 1], Expr::parse("2 + x^2").unwrap())]);
        let pi = invert_to_poisson(&w, &chart).unwrap();
        let v = pi.get(0, 1).eval(&crate::Env::from_pairs(&[("x", 0.5), ("y", 0.3)])).unwrap();
        assert!((v - 0.3 / 2.25).abs() < 1e-14);
    }
}
