use num_rational::BigRational;

use super::algebra::{matrix_expander, structure_constants_from_matrices, LieAlgebra};
use super::LieError;
use crate::expr::{CompiledExpr, Expr};
use crate::linalg::{expm, inverse_scalar, logm_near_identity, solve_tall, BasisExpander, Matrix};
use crate::scalar::{rational_to_f64, Scalar};

/// How a chart parameter wraps around, e.g. an angle or the Heisenberg
/// quotient coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wrap {
    pub lower: f64,
    pub period: f64,
}

impl Wrap {
    pub fn apply(&self, x: f64) -> f64 {
        let mut y = (x - self.lower).rem_euclid(self.period) + self.lower;
        if y >= self.lower + self.period {
            y -= self.period;
        }
        y
    }
}

/// Inverse of the chart map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Locator {
    /// SE(2), parameters `(x, y, phi)`.
    Se2,
    /// T(2) inside SE(2), parameters `(x, y)`.
    Translations2,
    /// Galilean group, parameters `(th1..3, v1..3, a1..3, s)`.
    Galilean,
    /// The `s = 0` subgroup, parameters `(th1..3, v1..3, a1..3)`.
    GalileanFixedTime,
    /// Heisenberg group of size `n`, parameters `(a2..an, b1..bn, c, a1)`.
    Heisenberg(usize),
    /// The `a1 = 0` subgroup, parameters `(a2..an, b1..bn, c)`.
    HeisenbergSlice(usize),
    /// Gauss-Newton on the chart equations.
    Newton,
}

/// A matrix Lie group given by a chart `parameters → m×m matrix` and a
/// basis of its Lie algebra.
#[derive(Clone, Debug)]
pub struct MatrixGroup {
    name: String,
    size: usize,
    params: Vec<String>,
    chart: Matrix<Expr>,
    chart_code: CompiledExpr,
    jacobian_code: CompiledExpr,
    basis: Vec<Matrix<BigRational>>,
    basis_f64: Vec<Matrix<f64>>,
    algebra: LieAlgebra<BigRational>,
    expander: BasisExpander<f64>,
    wraps: Vec<Option<Wrap>>,
    locator: Locator,
}

impl MatrixGroup {
    pub fn new(
        name: impl Into<String>,
        params: Vec<String>,
        chart: Matrix<Expr>,
        basis: Vec<Matrix<BigRational>>,
        labels: Vec<String>,
        wraps: Vec<Option<Wrap>>,
        locator: Locator,
    ) -> Result<MatrixGroup, LieError> {
        let size = chart.rows();
        if !chart.is_square() {
            return Err(LieError::Dimension("chart matrix must be square".into()));
        }
        if basis.len() != params.len() {
            return Err(LieError::Dimension(format!("{} parameters for a {}-dimensional algebra", params.len(), basis.len())));
        }
        if wraps.len() != params.len() {
            return Err(LieError::Dimension("one wrap flag per parameter".into()));
        }
        let algebra = structure_constants_from_matrices(&basis, &labels)?;
        let expander = matrix_expander(&basis)?.convert(rational_to_f64);
        let refs: Vec<&str> = params.iter().map(String::as_str).collect();
        let chart_code = CompiledExpr::new(chart.data(), &refs).map_err(|e| LieError::Chart(e.to_string()))?;
        let mut jac = Vec::with_capacity(params.len() * size * size);
        for p in &refs {
            jac.extend(chart.data().iter().map(|e| e.diff(p)));
        }
        let jacobian_code = CompiledExpr::new(&jac, &refs).map_err(|e| LieError::Chart(e.to_string()))?;
        let basis_f64 = basis.iter().map(|b| b.map(rational_to_f64)).collect();
        Ok(MatrixGroup {
            name: name.into(),
            size,
            params,
            chart,
            chart_code,
            jacobian_code,
            basis,
            basis_f64,
            algebra,
            expander,
            wraps,
            locator,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn chart(&self) -> &Matrix<Expr> {
        &self.chart
    }

    pub fn basis(&self) -> &[Matrix<BigRational>] {
        &self.basis
    }

    pub fn basis_f64(&self) -> &[Matrix<f64>] {
        &self.basis_f64
    }

    pub fn algebra(&self) -> &LieAlgebra<BigRational> {
        &self.algebra
    }

    pub fn wraps(&self) -> &[Option<Wrap>] {
        &self.wraps
    }

    pub fn locator(&self) -> Locator {
        self.locator
    }

    pub fn identity_params(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }

    pub fn chart_at<T: Scalar>(&self, p: &[T]) -> Matrix<T> {
        let vals = self.chart_code.eval_all(p).expect("chart entries are polynomial or trigonometric");
        Matrix::from_vec(self.size, self.size, vals)
    }

    /// `∂ chart / ∂ p_i` for every parameter.
    pub fn chart_jacobian<T: Scalar>(&self, p: &[T]) -> Vec<Matrix<T>> {
        let vals = self.jacobian_code.eval_all(p).expect("chart derivatives are defined everywhere");
        let block = self.size * self.size;
        (0..self.dim()).map(|i| Matrix::from_vec(self.size, self.size, vals[i * block..(i + 1) * block].to_vec())).collect()
    }

    /// `Σ x_i e_i` as a matrix.
    pub fn algebra_matrix<T: Scalar>(&self, x: &[T]) -> Matrix<T> {
        let mut out = Matrix::zeros(self.size, self.size);
        for (xi, b) in x.iter().zip(&self.basis_f64) {
            out = out.add_matrix(&b.map(|v| T::lit(*v)).scale(xi));
        }
        out
    }

    /// Coefficients of a matrix assumed to lie in the Lie algebra.
    pub fn expand<T: Scalar>(&self, m: &Matrix<T>) -> Vec<T> {
        self.expander.coefficients(m.data())
    }

    /// Coefficients with a span check on the value parts.
    pub fn expand_checked(&self, m: &Matrix<f64>, tol: f64) -> Result<Vec<f64>, LieError> {
        self.expander.expand(m.data(), tol).map_err(|_| LieError::NotInSpan {
            what: "matrix".into(),
            residual: self.expander.expand_exact(m.data()).map(|(_, r)| r).unwrap_or(f64::NAN),
        })
    }

    /// Inverse of the chart on (the value part of) a group matrix; no
    /// wrapping is applied.
    pub fn locate<T: Scalar>(&self, m: &Matrix<T>) -> Result<Vec<T>, LieError> {
        let at = |r: usize, c: usize| *m.get(r, c);
        let out = match self.locator {
            Locator::Se2 => vec![at(0, 2), at(1, 2), at(1, 0).atan2(at(0, 0))],
            Locator::Translations2 => vec![at(0, 2), at(1, 2)],
            Locator::Galilean | Locator::GalileanFixedTime => {
                let th2 = at(0, 2).atan2((at(1, 2) * at(1, 2) + at(2, 2) * at(2, 2)).sqrt());
                let th1 = (-at(1, 2)).atan2(at(2, 2));
                let th3 = (-at(0, 1)).atan2(at(0, 0));
                let s = at(3, 4);
                let mut out = vec![th1, th2, th3, at(0, 3), at(1, 3), at(2, 3)];
                for i in 0..3 {
                    out.push(at(i, 4) - at(i, 3) * s);
                }
                if self.locator == Locator::Galilean {
                    out.push(s);
                }
                out
            }
            Locator::Heisenberg(n) | Locator::HeisenbergSlice(n) => {
                let mut out: Vec<T> = (2..=n).map(|i| at(0, i)).collect();
                out.extend((1..=n).map(|i| at(i, n + 1)));
                out.push(at(0, n + 1));
                if matches!(self.locator, Locator::Heisenberg(_)) {
                    out.push(at(0, 1));
                }
                out
            }
            Locator::Newton => return self.newton_locate(m),
        };
        Ok(out)
    }

    fn newton_locate<T: Scalar>(&self, m: &Matrix<T>) -> Result<Vec<T>, LieError> {
        let d = self.dim();
        let target = Matrix::from_vec(m.rows() * m.cols(), 1, m.data().to_vec());
        let mut q = vec![T::zero(); d];
        let mut settled = 0;
        for _ in 0..80 {
            let c = self.chart_at(&q);
            let r = target.sub_matrix(&Matrix::from_vec(c.rows() * c.cols(), 1, c.data().to_vec()));
            let jac = self.chart_jacobian(&q);
            let cols: Vec<Vec<T>> = jac.iter().map(|j| j.data().to_vec()).collect();
            let j = Matrix::from_columns(&cols);
            let dq = solve_tall(&j, &r).map_err(|_| LieError::LocateFailed(self.name.clone()))?;
            let step = dq.data().iter().map(|x| x.re().abs()).fold(0.0, f64::max);
            for (qi, di) in q.iter_mut().zip(dq.data()) {
                *qi = *qi + *di;
            }
            let scale = q.iter().map(|x| x.re().abs()).fold(1.0, f64::max);
            if step <= 1e-15 * scale {
                settled += 1;
                // extra sweeps let derivative parts of dual inputs converge
                if settled >= 3 {
                    break;
                }
            }
        }
        let c = self.chart_at(&q);
        let residual = c.data().iter().zip(m.data()).map(|(a, b)| (a.re() - b.re()).abs()).fold(0.0, f64::max);
        if !(residual <= 1e-9) {
            return Err(LieError::LocateFailed(self.name.clone()));
        }
        Ok(q)
    }

    pub fn wrap(&self, mut p: Vec<f64>) -> Vec<f64> {
        for (x, w) in p.iter_mut().zip(&self.wraps) {
            if let Some(w) = w {
                *x = w.apply(*x);
            }
        }
        p
    }

    pub fn mul(&self, p: &[f64], q: &[f64]) -> Result<Vec<f64>, LieError> {
        let m = self.chart_at(p).matmul(&self.chart_at(q));
        Ok(self.wrap(self.locate(&m)?))
    }

    pub fn inv(&self, p: &[f64]) -> Result<Vec<f64>, LieError> {
        let m = inverse_scalar(&self.chart_at(p)).map_err(LieError::Linalg)?;
        Ok(self.wrap(self.locate(&m)?))
    }

    /// Parameters of `exp(Σ x_i e_i)`.
    pub fn exp(&self, x: &[f64]) -> Result<Vec<f64>, LieError> {
        let m = expm(&self.algebra_matrix(x));
        Ok(self.wrap(self.locate(&m)?))
    }

    /// Algebra coordinates `X` with `exp(X) = m`, for `m` near the identity.
    pub fn log(&self, m: &Matrix<f64>) -> Result<Vec<f64>, LieError> {
        let l = logm_near_identity(m).ok_or(LieError::LogDiverged)?;
        self.expand_checked(&l, 1e-10)
    }

    /// `Ad_g X = g X g⁻¹`.
    pub fn adjoint<T: Scalar>(&self, g: &[T], x: &[T]) -> Result<Vec<T>, LieError> {
        let gm = self.chart_at(g);
        let ginv = inverse_scalar(&gm).map_err(LieError::Linalg)?;
        Ok(self.expand(&gm.matmul(&self.algebra_matrix(x)).matmul(&ginv)))
    }

    /// Matrix of `Ad_g` for a group matrix `g` (columns `Ad_g e_j`).
    pub fn adjoint_matrix_of<T: Scalar>(&self, gm: &Matrix<T>) -> Result<Matrix<T>, LieError> {
        let ginv = inverse_scalar(gm).map_err(LieError::Linalg)?;
        let cols: Vec<Vec<T>> =
            self.basis_f64.iter().map(|b| self.expand(&gm.matmul(&b.map(|v| T::lit(*v))).matmul(&ginv))).collect();
        Ok(Matrix::from_columns(&cols))
    }

    /// `⟨Ad*_g μ, X⟩ = ⟨μ, Ad_{g⁻¹} X⟩`.
    pub fn coadjoint_star<T: Scalar>(&self, g: &[T], mu: &[T]) -> Result<Vec<T>, LieError> {
        let gm = self.chart_at(g);
        let ginv = inverse_scalar(&gm).map_err(LieError::Linalg)?;
        let ad_inv = self.adjoint_matrix_of(&ginv)?;
        Ok(ad_inv.transpose().matvec(mu))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_into_interval() {
        let w = Wrap { lower: 0.0, period: 1.0 };
        assert_eq!(w.apply(1.25), 0.25);
        assert_eq!(w.apply(-0.25), 0.75);
        let a = Wrap { lower: -std::f64::consts::PI, period: 2.0 * std::f64::consts::PI };
        assert!((a.apply(4.0) - (4.0 - 2.0 * std::f64::consts::PI)).abs() < 1e-15);
    }
}
