use num_rational::BigRational;
use num_traits::{One, Zero};

use super::algebra::{structure_constants_from_matrices, LieAlgebra};
use super::group::{Locator, MatrixGroup, Wrap};
use super::LieError;
use crate::expr::{CompiledExpr, Expr};
use crate::linalg::{inverse_scalar, solve_tall, Matrix};
use crate::scalar::{rational_int, Scalar};

/// A b-Lie group pair `(G, H)` with `H` of codimension one, trivialized
/// semilocally as `g = h·σ(φ)` with `σ(φ) = exp(φE)` and `H = {φ = 0}`.
///
/// `G` is parametrized by `(q, φ)` where `q` are the parameters of `H`.
#[derive(Clone, Debug)]
pub struct BLieGroupPair {
    name: String,
    g: MatrixGroup,
    h: MatrixGroup,
    h_in_g: Vec<usize>,
    transverse: usize,
    phi: String,
    sigma: Matrix<Expr>,
    sigma_code: CompiledExpr,
    quotient: String,
}

fn e(m: usize, r: usize, c: usize) -> Matrix<BigRational> {
    let mut out = Matrix::zeros(m, m);
    out.set(r, c, BigRational::one());
    out
}

fn q(n: i64) -> BigRational {
    rational_int(n)
}

fn expr_matrix(rows: Vec<Vec<Expr>>) -> Matrix<Expr> {
    Matrix::from_rows(rows)
}

fn v(name: &str) -> Expr {
    Expr::var(name)
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Symbolic `exp(t X)` for a nilpotent `X` or one with `X³ = −X`.
pub fn symbolic_exp(x: &Matrix<BigRational>, t: &Expr, label: &str) -> Result<Matrix<Expr>, LieError> {
    let m = x.rows();
    let id: Matrix<BigRational> = Matrix::identity(m);
    let to_expr = |a: &Matrix<BigRational>| a.map(|c| Expr::constant(c.clone()));
    // nilpotent: finite series
    let mut powers = vec![id.clone()];
    for _ in 0..m {
        let next = powers.last().unwrap().matmul(x);
        if next.data().iter().all(Zero::is_zero) {
            let mut out = Matrix::zeros(m, m);
            let mut fact = BigRational::one();
            for (k, p) in powers.iter().enumerate() {
                if k > 0 {
                    fact *= q(k as i64);
                }
                let coeff = t.powi(k as i32).scale(&fact.recip());
                out = out.add_matrix(&to_expr(p).scale(&coeff));
            }
            return Ok(out);
        }
        powers.push(next);
    }
    let x2 = x.matmul(x);
    let x3 = x2.matmul(x);
    if x3 == (-x).clone() {
        let out =
            to_expr(&id).add_matrix(&to_expr(x).scale(&t.sin())).add_matrix(&to_expr(&x2).scale(&Expr::one().sub(&t.cos())));
        return Ok(out);
    }
    Err(LieError::UnsupportedGenerator(label.to_string()))
}

impl BLieGroupPair {
    /// Built-in pairs: `se2`, `galilean`, `heisenberg_q` (with `n`).
    pub fn builtin(name: &str, n: Option<usize>) -> Result<BLieGroupPair, LieError> {
        match name {
            "se2" => Ok(BLieGroupPair::se2()),
            "galilean" => Ok(BLieGroupPair::galilean()),
            "heisenberg_q" | "heisenberg" => BLieGroupPair::heisenberg_q(n.unwrap_or(1)),
            other => Err(LieError::UnknownGroup(other.to_string())),
        }
    }

    /// `(SE(2), T(2))`, `φ` the rotation angle.
    pub fn se2() -> BLieGroupPair {
        let j = e(3, 1, 0).sub_matrix(&e(3, 0, 1));
        let p1 = e(3, 0, 2);
        let p2 = e(3, 1, 2);
        let (c, s) = (v("phi").cos(), v("phi").sin());
        let (z, o) = (Expr::zero(), Expr::one());
        let g_chart = expr_matrix(vec![
            vec![c.clone(), s.neg(), v("x")],
            vec![s.clone(), c.clone(), v("y")],
            vec![z.clone(), z.clone(), o.clone()],
        ]);
        let h_chart = expr_matrix(vec![
            vec![o.clone(), z.clone(), v("x")],
            vec![z.clone(), o.clone(), v("y")],
            vec![z.clone(), z.clone(), o.clone()],
        ]);
        let sigma = expr_matrix(vec![vec![c.clone(), s.neg(), z.clone()], vec![s, c, z.clone()], vec![z.clone(), z, o]]);
        let angle = Some(Wrap { lower: -std::f64::consts::PI, period: 2.0 * std::f64::consts::PI });
        let g = MatrixGroup::new(
            "SE(2)",
            names(&["x", "y", "phi"]),
            g_chart,
            vec![j, p1.clone(), p2.clone()],
            names(&["J", "P1", "P2"]),
            vec![None, None, angle],
            Locator::Se2,
        )
        .expect("SE(2) model is consistent");
        let h = MatrixGroup::new(
            "T(2)",
            names(&["x", "y"]),
            h_chart,
            vec![p1, p2],
            names(&["P1", "P2"]),
            vec![None, None],
            Locator::Translations2,
        )
        .expect("T(2) model is consistent");
        BLieGroupPair::assemble("se2", g, h, vec![1, 2], 0, "phi", sigma, "S^1")
    }

    /// The Galilean group with `H = {s = 0}`. Basis order
    /// `(J1, J2, J3, K1, K2, K3, P1, P2, P3, E)`.
    pub fn galilean() -> BLieGroupPair {
        let m = 5;
        let l1 = e(m, 2, 1).sub_matrix(&e(m, 1, 2));
        let l2 = e(m, 0, 2).sub_matrix(&e(m, 2, 0));
        let l3 = e(m, 1, 0).sub_matrix(&e(m, 0, 1));
        let mut basis = vec![l1, l2, l3];
        basis.extend((0..3).map(|i| e(m, i, 3)));
        basis.extend((0..3).map(|i| e(m, i, 4)));
        basis.push(e(m, 3, 4));
        let labels = names(&["J1", "J2", "J3", "K1", "K2", "K3", "P1", "P2", "P3", "E"]);

        let rot = |axis: usize, t: &str| -> Matrix<Expr> {
            let (c, s) = (v(t).cos(), v(t).sin());
            let mut r: Matrix<Expr> = Matrix::identity(3);
            let (a, b) = match axis {
                0 => (1, 2),
                1 => (2, 0),
                _ => (0, 1),
            };
            r.set(a, a, c.clone());
            r.set(b, b, c);
            r.set(a, b, s.neg());
            r.set(b, a, s);
            r
        };
        let a = rot(0, "th1").matmul(&rot(1, "th2")).matmul(&rot(2, "th3"));
        let build = |with_time: bool| -> Matrix<Expr> {
            let mut g: Matrix<Expr> = Matrix::identity(m);
            for r in 0..3 {
                for c in 0..3 {
                    g.set(r, c, a.get(r, c).clone());
                }
                let vel = v(&format!("v{}", r + 1));
                let pos = v(&format!("a{}", r + 1));
                g.set(r, 3, vel.clone());
                g.set(r, 4, if with_time { pos.add(&vel.mul(&v("s"))) } else { pos });
            }
            if with_time {
                g.set(3, 4, v("s"));
            }
            g
        };
        let mut sigma: Matrix<Expr> = Matrix::identity(m);
        sigma.set(3, 4, v("s"));
        let h_params = names(&["th1", "th2", "th3", "v1", "v2", "v3", "a1", "a2", "a3"]);
        let mut g_params = h_params.clone();
        g_params.push("s".into());
        let g =
            MatrixGroup::new("Galilean", g_params, build(true), basis.clone(), labels.clone(), vec![None; 10], Locator::Galilean)
                .expect("Galilean model is consistent");
        let h = MatrixGroup::new(
            "Galilean{s=0}",
            h_params,
            build(false),
            basis[..9].to_vec(),
            labels[..9].to_vec(),
            vec![None; 9],
            Locator::GalileanFixedTime,
        )
        .expect("Galilean subgroup model is consistent");
        BLieGroupPair::assemble("galilean", g, h, (0..9).collect(), 9, "s", sigma, "R")
    }

    /// The Heisenberg group of dimension `2n+1` modulo the integer centre,
    /// with `H = {a1 = 0}`.
    pub fn heisenberg_q(n: usize) -> Result<BLieGroupPair, LieError> {
        if n == 0 {
            return Err(LieError::Dimension("heisenberg_q needs n >= 1".into()));
        }
        let m = n + 2;
        let idx = |base: &str, i: usize| if n == 1 { base.to_string() } else { format!("{base}{i}") };
        let mut basis = Vec::new();
        let mut labels = Vec::new();
        for i in 1..=n {
            basis.push(e(m, 0, i));
            labels.push(idx("X", i));
        }
        for i in 1..=n {
            basis.push(e(m, i, n + 1));
            labels.push(idx("Y", i));
        }
        basis.push(e(m, 0, n + 1));
        labels.push("Z".into());

        let a_names: Vec<String> = (1..=n).map(|i| idx("a", i)).collect();
        let b_names: Vec<String> = (1..=n).map(|i| idx("b", i)).collect();
        let chart = |with_a1: bool| -> Matrix<Expr> {
            let mut g: Matrix<Expr> = Matrix::identity(m);
            for i in 1..=n {
                if i > 1 || with_a1 {
                    g.set(0, i, v(&a_names[i - 1]));
                }
                g.set(i, n + 1, v(&b_names[i - 1]));
            }
            g.set(0, n + 1, v("c"));
            g
        };
        let mut h_params: Vec<String> = a_names[1..].to_vec();
        h_params.extend(b_names.iter().cloned());
        h_params.push("c".into());
        let mut g_params = h_params.clone();
        g_params.push(a_names[0].clone());
        // G basis order (X1..Xn, Y1..Yn, Z); parameters list H first.
        let unit = Some(Wrap { lower: 0.0, period: 1.0 });
        let mut g_wraps = vec![None; 2 * n + 1];
        g_wraps[2 * n - 1] = unit;
        let mut h_wraps = vec![None; 2 * n];
        h_wraps[2 * n - 1] = unit;
        let h_in_g: Vec<usize> = (1..=2 * n).collect();
        let mut sigma: Matrix<Expr> = Matrix::identity(m);
        sigma.set(0, 1, v(&a_names[0]));
        let g = MatrixGroup::new(
            format!("Heis_{n}/Z"),
            g_params,
            chart(true),
            basis.clone(),
            labels.clone(),
            g_wraps,
            Locator::Heisenberg(n),
        )?;
        let h = MatrixGroup::new(
            format!("Heis_{n}/Z{{{}=0}}", a_names[0]),
            h_params,
            chart(false),
            h_in_g.iter().map(|&i| basis[i].clone()).collect(),
            h_in_g.iter().map(|&i| labels[i].clone()).collect(),
            h_wraps,
            Locator::HeisenbergSlice(n),
        )?;
        let phi = a_names[0].clone();
        Ok(BLieGroupPair::assemble(&format!("heisenberg_q({n})"), g, h, h_in_g, 0, &phi, sigma, "R"))
    }

    /// A user-defined pair from a matrix basis. The chart is given by
    /// coordinates of the second kind, `Π_a exp(q_a e_a) · exp(φ E)`, with
    /// parameter names `q_<label>`.
    pub fn custom(
        name: &str,
        basis: Vec<Matrix<BigRational>>,
        labels: Vec<String>,
        transverse: &str,
        phi: &str,
    ) -> Result<BLieGroupPair, LieError> {
        let t = labels.iter().position(|l| l == transverse).ok_or_else(|| LieError::UnknownLabel(transverse.to_string()))?;
        if basis.len() != labels.len() {
            return Err(LieError::Dimension("one label per basis matrix".into()));
        }
        let m = basis.first().map_or(0, Matrix::rows);
        let algebra = structure_constants_from_matrices(&basis, &labels)?;
        let h_in_g: Vec<usize> = (0..basis.len()).filter(|&i| i != t).collect();
        algebra.subalgebra(&h_in_g)?;
        let h_params: Vec<String> = h_in_g.iter().map(|&i| format!("q_{}", labels[i])).collect();
        let mut h_chart: Matrix<Expr> = Matrix::identity(m);
        for (k, &i) in h_in_g.iter().enumerate() {
            h_chart = h_chart.matmul(&symbolic_exp(&basis[i], &v(&h_params[k]), &labels[i])?);
        }
        let sigma = symbolic_exp(&basis[t], &v(phi), transverse)?;
        let g_chart = h_chart.matmul(&sigma);
        let mut g_params = h_params.clone();
        g_params.push(phi.to_string());
        let mut g_basis: Vec<Matrix<BigRational>> = h_in_g.iter().map(|&i| basis[i].clone()).collect();
        g_basis.push(basis[t].clone());
        let mut g_labels: Vec<String> = h_in_g.iter().map(|&i| labels[i].clone()).collect();
        g_labels.push(labels[t].clone());
        let k = h_in_g.len();
        let g = MatrixGroup::new(name, g_params, g_chart, g_basis.clone(), g_labels.clone(), vec![None; k + 1], Locator::Newton)?;
        let h = MatrixGroup::new(
            format!("{name}{{{phi}=0}}"),
            h_params,
            h_chart,
            g_basis[..k].to_vec(),
            g_labels[..k].to_vec(),
            vec![None; k],
            Locator::Newton,
        )?;
        Ok(BLieGroupPair::assemble(name, g, h, (0..k).collect(), k, phi, sigma, "R"))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        name: &str,
        g: MatrixGroup,
        h: MatrixGroup,
        h_in_g: Vec<usize>,
        transverse: usize,
        phi: &str,
        sigma: Matrix<Expr>,
        quotient: &str,
    ) -> BLieGroupPair {
        let sigma_code = CompiledExpr::new(sigma.data(), &[phi]).expect("sigma depends on phi only");
        BLieGroupPair {
            name: name.to_string(),
            g,
            h,
            h_in_g,
            transverse,
            phi: phi.to_string(),
            sigma,
            sigma_code,
            quotient: quotient.to_string(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn g(&self) -> &MatrixGroup {
        &self.g
    }

    pub fn h(&self) -> &MatrixGroup {
        &self.h
    }

    pub fn g_algebra(&self) -> &LieAlgebra<BigRational> {
        self.g.algebra()
    }

    pub fn h_algebra(&self) -> &LieAlgebra<BigRational> {
        self.h.algebra()
    }

    /// Indices of the `𝔥` basis inside the `𝔤` basis.
    pub fn h_in_g(&self) -> &[usize] {
        &self.h_in_g
    }

    /// Index of the transverse generator `E` in the `𝔤` basis.
    pub fn transverse(&self) -> usize {
        self.transverse
    }

    pub fn phi_name(&self) -> &str {
        &self.phi
    }

    pub fn q_names(&self) -> &[String] {
        self.h.params()
    }

    pub fn sigma(&self) -> &Matrix<Expr> {
        &self.sigma
    }

    /// Name of `G/H` as a manifold (`S^1` or `R`).
    pub fn quotient(&self) -> &str {
        &self.quotient
    }

    pub fn dim_g(&self) -> usize {
        self.g.dim()
    }

    pub fn dim_h(&self) -> usize {
        self.h.dim()
    }

    pub fn sigma_at<T: Scalar>(&self, phi: T) -> Matrix<T> {
        let m = self.g.size();
        Matrix::from_vec(m, m, self.sigma_code.eval_all(&[phi]).expect("sigma is entire"))
    }

    /// `G` parameters of `h(q)·σ(φ)`.
    pub fn g_params<T: Scalar>(&self, q: &[T], phi: T) -> Vec<T> {
        let mut p = q.to_vec();
        p.push(phi);
        p
    }

    /// Splits `G` parameters into `(q, φ)`.
    pub fn split<T: Scalar>(&self, p: &[T]) -> (Vec<T>, T) {
        let k = self.dim_h();
        (p[..k].to_vec(), p[k])
    }

    pub fn h_matrix<T: Scalar>(&self, q: &[T]) -> Matrix<T> {
        self.h.chart_at(q)
    }

    /// Columns `∂h/∂q_i` flattened into an `m² × d` matrix.
    fn flat_jacobian<T: Scalar>(&self, q: &[T]) -> Matrix<T> {
        let cols: Vec<Vec<T>> = self.h.chart_jacobian(q).iter().map(|d| d.data().to_vec()).collect();
        Matrix::from_columns(&cols)
    }

    fn solve_tangent<T: Scalar>(&self, q: &[T], rhs: &[Matrix<T>]) -> Result<Matrix<T>, LieError> {
        let d = self.flat_jacobian(q);
        let cols: Vec<Vec<T>> = rhs.iter().map(|m| m.data().to_vec()).collect();
        solve_tall(&d, &Matrix::from_columns(&cols)).map_err(LieError::Linalg)
    }

    fn h_basis<T: Scalar>(&self) -> Vec<Matrix<T>> {
        self.h.basis_f64().iter().map(|b| b.map(|x| T::lit(*x))).collect()
    }

    /// Right-invariant fields: column `a` holds the `q`-components of
    /// `ζ^{e_a}(h) = e_a·h`.
    pub fn right_fields<T: Scalar>(&self, q: &[T]) -> Result<Matrix<T>, LieError> {
        let h = self.h_matrix(q);
        let rhs: Vec<Matrix<T>> = self.h_basis::<T>().iter().map(|b| b.matmul(&h)).collect();
        self.solve_tangent(q, &rhs)
    }

    /// Left-invariant fields: column `a` holds the `q`-components of `h·e_a`.
    pub fn left_fields<T: Scalar>(&self, q: &[T]) -> Result<Matrix<T>, LieError> {
        let h = self.h_matrix(q);
        let rhs: Vec<Matrix<T>> = self.h_basis::<T>().iter().map(|b| h.matmul(b)).collect();
        self.solve_tangent(q, &rhs)
    }

    /// Right trivialization of a tangent vector `v_q` at `h(q)`:
    /// the `𝔥`-coefficients of `(Σ v_i ∂h/∂q_i)·h⁻¹`.
    pub fn right_trivialize<T: Scalar>(&self, q: &[T], vq: &[T]) -> Result<Vec<T>, LieError> {
        let h = self.h_matrix(q);
        let hinv = inverse_scalar(&h).map_err(LieError::Linalg)?;
        let jac = self.h.chart_jacobian(q);
        let mut dv = Matrix::zeros(h.rows(), h.cols());
        for (d, vi) in jac.iter().zip(vq) {
            dv = dv.add_matrix(&d.scale(vi));
        }
        Ok(self.h.expand(&dv.matmul(&hinv)))
    }

    /// `Ad_h` on `𝔥` at `h(q)`, as a `k×k` matrix.
    pub fn ad_h<T: Scalar>(&self, q: &[T]) -> Result<Matrix<T>, LieError> {
        self.h.adjoint_matrix_of(&self.h_matrix(q))
    }

    /// `q'` with `h(q') = k·h(q)`.
    pub fn left_translate<T: Scalar>(&self, k: &Matrix<T>, q: &[T]) -> Result<Vec<T>, LieError> {
        self.h.locate(&k.matmul(&self.h_matrix(q)))
    }

    /// `q' = k·q` together with the Jacobian `∂q'/∂q` of left translation.
    pub fn translate_with_jacobian<T: Scalar>(&self, k: &Matrix<T>, q: &[T]) -> Result<(Vec<T>, Matrix<T>), LieError> {
        let q2 = self.left_translate(k, q)?;
        let rhs: Vec<Matrix<T>> = self.h.chart_jacobian(q).iter().map(|d| k.matmul(d)).collect();
        let jac = self.solve_tangent(&q2, &rhs)?;
        Ok((q2, jac))
    }

    /// One-line description of the trivialization.
    pub fn trivialization_summary(&self) -> String {
        format!(
            "U = H x V, g = h({}) * exp({} {}), H = {{{} = 0}}",
            self.q_names().join(", "),
            self.phi,
            self.g.algebra().label(self.transverse),
            self.phi
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
        a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn trivialization_reproduces_g_chart() {
        let pairs = [
            BLieGroupPair::se2(),
            BLieGroupPair::galilean(),
            BLieGroupPair::heisenberg_q(1).unwrap(),
            BLieGroupPair::heisenberg_q(3).unwrap(),
        ];
        for pair in &pairs {
            let d = pair.dim_h();
            let q: Vec<f64> = (0..d).map(|i| 0.3 - 0.17 * i as f64).collect();
            let phi = 0.41;
            let lhs = pair.g().chart_at(&pair.g_params(&q, phi));
            let rhs = pair.h_matrix(&q).matmul(&pair.sigma_at(phi));
            assert!(max_diff(&lhs, &rhs) < 1e-14, "{}", pair.name());
            let back = pair.g().locate(&lhs).unwrap();
            assert!(back.iter().zip(pair.g_params(&q, phi)).all(|(a, b)| (a - b).abs() < 1e-12), "{}", pair.name());
        }
    }

    #[test]
    fn symbolic_exp_cases() {
        let j = e(3, 1, 0).sub_matrix(&e(3, 0, 1));
        let r = symbolic_exp(&j, &v("t"), "J").unwrap();
        assert_eq!(r.get(1, 0).to_string(), "sin(t)");
        let n = e(3, 0, 1).add_matrix(&e(3, 1, 2));
        let r = symbolic_exp(&n, &v("t"), "N").unwrap();
        assert_eq!(r.get(0, 2).to_string(), "(1/2)*t^2");
        let d = e(2, 0, 0);
        assert!(symbolic_exp(&d, &v("t"), "D").is_err());
    }

    #[test]
    fn custom_se2_matches_builtin_algebra() {
        let j = e(3, 1, 0).sub_matrix(&e(3, 0, 1));
        let pair = BLieGroupPair::custom("se2c", vec![j, e(3, 0, 2), e(3, 1, 2)], names(&["J", "P1", "P2"]), "J", "phi").unwrap();
        assert_eq!(pair.dim_h(), 2);
        let p: [f64; 3] = [0.2, -0.4, 0.7];
        let m = pair.g().chart_at(&p);
        let back = pair.g().locate(&m).unwrap();
        assert!(back.iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}
