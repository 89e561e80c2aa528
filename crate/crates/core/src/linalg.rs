//! Small dense matrices over a generic element type.
//!
//! The container is generic over any `Clone` element so that the same type
//! holds symbolic matrices (`Matrix<Expr>`), exact matrices
//! (`Matrix<BigRational>`) and numeric ones. Elimination routines require
//! [`Field`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;
use thiserror::Error;

use crate::scalar::{Field, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular")]
    Singular,
    #[error("vector is not in the span of the basis (residual {residual:.3e})")]
    NotInSpan { residual: f64 },
}

#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T: Clone> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let data: Vec<T> = rows.into_iter().flatten().collect();
        Matrix::from_vec(r, c, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<T>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        Matrix::from_fn(r, c, |i, j| cols[j][i].clone())
    }
}

impl<T: Clone + Zero> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |_, _| T::zero())
    }
}

impl<T: Clone + Zero + num_traits::One> Matrix<T> {
    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |r, c| if r == c { T::one() } else { T::zero() })
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero + Add<Output = T> + Mul<Output = T>,
{
    pub fn matmul(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "matmul shape");
        Matrix::from_fn(self.rows, rhs.cols, |r, c| {
            let mut acc = T::zero();
            for k in 0..self.cols {
                acc = acc + self.get(r, k).clone() * rhs.get(k, c).clone();
            }
            acc
        })
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec shape");
        (0..self.rows)
            .map(|r| {
                let mut acc = T::zero();
                for c in 0..self.cols {
                    acc = acc + self.get(r, c).clone() * v[c].clone();
                }
                acc
            })
            .collect()
    }

    pub fn scale(&self, s: &T) -> Matrix<T> {
        self.map(|x| x.clone() * s.clone())
    }
}

impl<T: Clone + Add<Output = T>> Matrix<T> {
    pub fn add_matrix(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }
}

impl<T: Clone + Sub<Output = T>> Matrix<T> {
    pub fn sub_matrix(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, rhs: &Matrix<T>) -> Matrix<T> {
        self.matmul(rhs).sub_matrix(&rhs.matmul(self))
    }
}

impl<T: Clone + Neg<Output = T>> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        self.map(|x| -x.clone())
    }
}

impl<T: Field> Matrix<T> {
    /// Largest element weight.
    pub fn max_weight(&self) -> f64 {
        self.data.iter().map(Field::weight).fold(0.0, f64::max)
    }

    /// Solves `A X = B` for square `A` by Gaussian elimination with partial
    /// pivoting (any non-zero pivot for exact fields).
    pub fn solve_matrix(&self, rhs: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
        if !self.is_square() || rhs.rows != self.rows {
            return Err(LinalgError::Dimension(format!("solve {}x{} with rhs {}x{}", self.rows, self.cols, rhs.rows, rhs.cols)));
        }
        let n = self.rows;
        let m = rhs.cols;
        let mut a = self.clone();
        let mut b = rhs.clone();
        let scale = a.max_weight().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let pivot = pick_pivot(&a, col, col..n);
            let Some(p) = pivot else { return Err(LinalgError::Singular) };
            if !T::EXACT && a.get(p, col).weight() <= 1e-14 * scale {
                return Err(LinalgError::Singular);
            }
            a.swap_rows(col, p);
            b.swap_rows(col, p);
            let piv = a.get(col, col).clone();
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a.get(r, col).clone() / piv.clone();
                if factor.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = a.get(r, c).clone() - factor.clone() * a.get(col, c).clone();
                    a.set(r, c, v);
                }
                for c in 0..m {
                    let v = b.get(r, c).clone() - factor.clone() * b.get(col, c).clone();
                    b.set(r, c, v);
                }
            }
        }
        for r in 0..n {
            let piv = a.get(r, r).clone();
            for c in 0..m {
                let v = b.get(r, c).clone() / piv.clone();
                b.set(r, c, v);
            }
        }
        Ok(b)
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>, LinalgError> {
        let b = Matrix::from_vec(rhs.len(), 1, rhs.to_vec());
        Ok(self.solve_matrix(&b)?.data)
    }

    pub fn inverse(&self) -> Result<Matrix<T>, LinalgError> {
        let n = self.rows;
        self.solve_matrix(&Matrix::from_fn(n, n, |r, c| if r == c { T::one() } else { T::zero() }))
    }

    pub fn determinant(&self) -> T {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for col in 0..n {
            let Some(p) = pick_pivot(&a, col, col..n) else { return T::zero() };
            if p != col {
                a.swap_rows(col, p);
                det = -det;
            }
            let piv = a.get(col, col).clone();
            det = det * piv.clone();
            for r in col + 1..n {
                let factor = a.get(r, col).clone() / piv.clone();
                for c in col..n {
                    let v = a.get(r, c).clone() - factor.clone() * a.get(col, c).clone();
                    a.set(r, c, v);
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

fn pick_pivot<T: Field>(a: &Matrix<T>, col: usize, rows: std::ops::Range<usize>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for r in rows {
        let w = a.get(r, col).weight();
        if a.get(r, col).is_zero() {
            continue;
        }
        if T::EXACT {
            return Some(r);
        }
        if best.is_none_or(|(_, bw)| w > bw) {
            best = Some((r, w));
        }
    }
    best.map(|(r, _)| r)
}

/// Expansion of vectors in a fixed (possibly overcomplete-ambient) basis.
///
/// The basis vectors are the columns of a tall `m × k` matrix of full column
/// rank. Construction selects `k` independent rows exactly and stores the
/// inverse of that square block, so each expansion is a `k × k` product
/// followed by a residual check on all `m` rows.
#[derive(Clone, Debug)]
pub struct BasisExpander<T> {
    columns: Matrix<T>,
    pivot_rows: Vec<usize>,
    block_inverse: Matrix<T>,
}

impl<T: Field> BasisExpander<T> {
    pub fn new(columns: Matrix<T>) -> Result<Self, LinalgError> {
        let (m, k) = (columns.rows(), columns.cols());
        if k > m {
            return Err(LinalgError::Dimension(format!("{k} basis vectors in dimension {m}")));
        }
        // Row-reduce the transpose to find k independent rows of `columns`.
        let mut work = columns.transpose();
        let mut pivot_rows = Vec::with_capacity(k);
        let mut row = 0;
        for c in 0..m {
            if row == k {
                break;
            }
            let Some(p) = pick_pivot(&work, c, row..k) else { continue };
            if !T::EXACT && work.get(p, c).weight() <= 1e-12 * columns.max_weight() {
                continue;
            }
            work.swap_rows(row, p);
            let piv = work.get(row, c).clone();
            for r in row + 1..k {
                let f = work.get(r, c).clone() / piv.clone();
                for cc in c..m {
                    let v = work.get(r, cc).clone() - f.clone() * work.get(row, cc).clone();
                    work.set(r, cc, v);
                }
            }
            pivot_rows.push(c);
            row += 1;
        }
        if pivot_rows.len() < k {
            return Err(LinalgError::Singular);
        }
        let block = Matrix::from_fn(k, k, |i, j| columns.get(pivot_rows[i], j).clone());
        let block_inverse = block.inverse()?;
        Ok(BasisExpander { columns, pivot_rows, block_inverse })
    }

    pub fn dim(&self) -> usize {
        self.columns.cols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.rows()
    }

    pub fn columns(&self) -> &Matrix<T> {
        &self.columns
    }

    /// Coefficients `c` with `columns · c = v` and the residual weight.
    pub fn expand_exact(&self, v: &[T]) -> Result<(Vec<T>, f64), LinalgError> {
        if v.len() != self.ambient_dim() {
            return Err(LinalgError::Dimension(format!(
                "expand vector of length {} in ambient dimension {}",
                v.len(),
                self.ambient_dim()
            )));
        }
        let picked: Vec<T> = self.pivot_rows.iter().map(|&r| v[r].clone()).collect();
        let coeffs = self.block_inverse.matvec(&picked);
        let recon = self.columns.matvec(&coeffs);
        let residual = recon.iter().zip(v).map(|(a, b)| (a.clone() - b.clone()).weight()).fold(0.0, f64::max);
        Ok((coeffs, residual))
    }

    /// As [`expand_exact`](Self::expand_exact), failing when the residual
    /// exceeds `tol` (relative to the size of `v` for inexact fields).
    pub fn expand(&self, v: &[T], tol: f64) -> Result<Vec<T>, LinalgError> {
        let (coeffs, residual) = self.expand_exact(v)?;
        let scale = if T::EXACT { 0.0 } else { v.iter().map(Field::weight).fold(1.0, f64::max) };
        let limit = if T::EXACT { 0.0 } else { tol * scale };
        if residual > limit {
            return Err(LinalgError::NotInSpan { residual });
        }
        Ok(coeffs)
    }

    /// Converts the exact expander into another field without re-pivoting.
    pub fn convert<U: Field>(&self, f: impl Fn(&T) -> U + Copy) -> BasisExpander<U> {
        BasisExpander {
            columns: self.columns.map(f),
            pivot_rows: self.pivot_rows.clone(),
            block_inverse: self.block_inverse.map(f),
        }
    }

    /// Expansion without residual check, usable for any scalar (including
    /// dual numbers) once the expander has been converted to `f64`.
    pub fn coefficients<S: Scalar>(&self, v: &[S]) -> Vec<S>
    where
        T: Into<f64> + Copy,
    {
        let k = self.dim();
        (0..k)
            .map(|i| {
                let mut acc = S::zero();
                for (j, &r) in self.pivot_rows.iter().enumerate() {
                    acc = acc + S::lit((*self.block_inverse.get(i, j)).into()) * v[r];
                }
                acc
            })
            .collect()
    }
}

impl BasisExpander<num_rational::BigRational> {
    /// Symbolic coefficients of a vector of expressions assumed to lie in
    /// the span; no residual check is possible.
    pub fn coefficients_expr(&self, v: &[crate::expr::Expr]) -> Vec<crate::expr::Expr> {
        (0..self.dim())
            .map(|i| {
                let terms: Vec<crate::expr::Expr> = self
                    .pivot_rows
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| !self.block_inverse.get(i, *j).is_zero())
                    .map(|(j, &r)| v[r].scale(self.block_inverse.get(i, j)))
                    .collect();
                crate::expr::Expr::sum(terms.iter())
            })
            .collect()
    }
}

/// Solves a square system numerically for any [`Scalar`] (dual numbers
/// included) by Gaussian elimination with partial pivoting on the value part.
pub fn solve_scalar<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>, LinalgError> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n {
        return Err(LinalgError::Dimension("solve_scalar".into()));
    }
    let mut a = a.clone();
    let mut b = b.clone();
    let scale = a.data().iter().map(|x| x.re().abs()).fold(f64::MIN_POSITIVE, f64::max);
    for col in 0..n {
        let mut p = col;
        let mut best = a.get(col, col).re().abs();
        for r in col + 1..n {
            let w = a.get(r, col).re().abs();
            if w > best {
                best = w;
                p = r;
            }
        }
        if best <= 1e-14 * scale {
            return Err(LinalgError::Singular);
        }
        if p != col {
            for c in 0..n {
                a.data.swap(col * n + c, p * n + c);
            }
            let m = b.cols();
            for c in 0..m {
                b.data.swap(col * m + c, p * m + c);
            }
        }
        let piv = *a.get(col, col);
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = *a.get(r, col) / piv;
            if f.re() == 0.0 && f == S::zero() {
                // value part zero; derivative part may still be non-zero
            }
            for c in col..n {
                let v = *a.get(r, c) - f * *a.get(col, c);
                a.set(r, c, v);
            }
            for c in 0..b.cols() {
                let v = *b.get(r, c) - f * *b.get(col, c);
                b.set(r, c, v);
            }
        }
    }
    for r in 0..n {
        let piv = *a.get(r, r);
        for c in 0..b.cols() {
            let v = *b.get(r, c) / piv;
            b.set(r, c, v);
        }
    }
    Ok(b)
}

/// Inverse of a square matrix of scalars.
pub fn inverse_scalar<S: Scalar>(a: &Matrix<S>) -> Result<Matrix<S>, LinalgError> {
    solve_scalar(a, &Matrix::identity(a.rows()))
}

/// Least-squares solution of a tall consistent system `A x = b` through the
/// normal equations. Used where `A` has orthogonal-ish, well-conditioned
/// columns (chart differentials).
pub fn solve_tall<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>, LinalgError> {
    let at = a.transpose();
    solve_scalar(&at.matmul(a), &at.matmul(b))
}

/// Matrix exponential by scaling and squaring of the Taylor series; exact
/// (finite series) for nilpotent input.
pub fn expm<S: Scalar>(a: &Matrix<S>) -> Matrix<S> {
    let n = a.rows();
    let norm = a.data().iter().map(|x| x.re().abs()).sum::<f64>();
    let mut squarings = 0;
    let mut scaled = a.clone();
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
        let s = S::lit(0.5f64.powi(squarings as i32));
        scaled = a.scale(&s);
    }
    let mut result = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=30 {
        term = term.matmul(&scaled).scale(&S::lit(1.0 / k as f64));
        if term.data().iter().all(|x| x.re() == 0.0) && term.data().iter().all(|x| *x == S::zero()) {
            break;
        }
        result = result.add_matrix(&term);
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

/// Matrix logarithm `log(M)` for `M` near the identity via the Mercator
/// series; returns `None` when `‖M − I‖ ≥ 1` or the series stalls.
pub fn logm_near_identity(m: &Matrix<f64>) -> Option<Matrix<f64>> {
    let n = m.rows();
    let x = m.sub_matrix(&Matrix::identity(n));
    let norm = x.data().iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm >= 1.0 {
        return None;
    }
    let mut result = Matrix::zeros(n, n);
    let mut power = Matrix::identity(n);
    for k in 1..=400 {
        power = power.matmul(&x);
        let coeff = if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
        let term = power.scale(&coeff);
        let size = term.data().iter().map(|v| v.abs()).fold(0.0, f64::max);
        result = result.add_matrix(&term);
        if size < 1e-17 {
            return Some(result);
        }
    }
    None
}

/// Pfaffian of an antisymmetric matrix by skew-symmetric Gaussian
/// elimination with pivoting.
pub fn pfaffian(a: &Matrix<f64>) -> f64 {
    let n = a.rows();
    assert!(a.is_square());
    if n % 2 == 1 {
        return 0.0;
    }
    let mut m = a.clone();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        // Pivot: largest |m[k][j]| for j > k, swapped into position k+1.
        let mut p = k + 1;
        let mut best = m.get(k, k + 1).abs();
        for j in k + 2..n {
            let w = m.get(k, j).abs();
            if w > best {
                best = w;
                p = j;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if p != k + 1 {
            // Simultaneous row/column swap flips the sign of the Pfaffian.
            swap_sym(&mut m, k + 1, p);
            pf = -pf;
        }
        let piv = *m.get(k, k + 1);
        pf *= piv;
        // Eliminate rows/cols k+2.. using rows k and k+1.
        for i in k + 2..n {
            let tau = *m.get(k, i) / piv;
            let sigma = *m.get(k + 1, i) / piv;
            // row_i <- row_i - tau * row_{k+1} + sigma * row_k (and columns)
            for j in 0..n {
                let v = *m.get(i, j) - tau * *m.get(k + 1, j) + sigma * *m.get(k, j);
                m.set(i, j, v);
            }
            for j in 0..n {
                let v = *m.get(j, i) - tau * *m.get(j, k + 1) + sigma * *m.get(j, k);
                m.set(j, i, v);
            }
        }
        k += 2;
    }
    pf
}

fn swap_sym(m: &mut Matrix<f64>, a: usize, b: usize) {
    let n = m.rows();
    for j in 0..n {
        m.data.swap(a * n + j, b * n + j);
    }
    for i in 0..n {
        m.data.swap(i * n + a, i * n + b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rational, rational_int};
    use num_rational::BigRational;

    #[test]
    fn exact_inverse_roundtrip() {
        let a = Matrix::from_rows(vec![
            vec![rational_int(2), rational_int(1), rational_int(0)],
            vec![rational_int(0), rational_int(1), rational(1, 3)],
            vec![rational_int(1), rational_int(0), rational_int(1)],
        ]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.matmul(&inv), Matrix::<BigRational>::identity(3));
    }

    #[test]
    fn singular_is_reported() {
        let a = Matrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert_eq!(a.inverse(), Err(LinalgError::Singular));
    }

    #[test]
    fn expander_detects_out_of_span() {
        let cols = Matrix::from_columns(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]]);
        let e = BasisExpander::new(cols).unwrap();
        let c: Vec<f64> = e.expand(&[2.0, 3.0, 3.0], 1e-10).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-15 && (c[1] - 3.0).abs() < 1e-15);
        assert!(matches!(e.expand(&[0.0, 1.0, 0.0], 1e-10), Err(LinalgError::NotInSpan { .. })));
    }

    #[test]
    fn pfaffian_of_block_and_permuted_forms() {
        // dx1^dy1 + 3 dx2^dy2 in order (x1,y1,x2,y2): Pf = 3
        let mut a = Matrix::zeros(4, 4);
        a.set(0, 1, 1.0);
        a.set(1, 0, -1.0);
        a.set(2, 3, 3.0);
        a.set(3, 2, -3.0);
        assert!((pfaffian(&a) - 3.0).abs() < 1e-14);
        // ordering (x1,x2,y1,y2): Pf = -3
        let mut b = Matrix::zeros(4, 4);
        b.set(0, 2, 1.0);
        b.set(2, 0, -1.0);
        b.set(1, 3, 3.0);
        b.set(3, 1, -3.0);
        assert!((pfaffian(&b) + 3.0).abs() < 1e-14);
    }

    #[test]
    fn pfaffian_squares_to_determinant() {
        let vals = [0.3, -1.2, 0.7, 2.0, 0.1, -0.4];
        let mut a = Matrix::zeros(4, 4);
        let mut k = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                a.set(i, j, vals[k]);
                a.set(j, i, -vals[k]);
                k += 1;
            }
        }
        let pf = pfaffian(&a);
        assert!((pf * pf - a.determinant()).abs() < 1e-12);
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t: f64 = 0.7;
        let j = Matrix::from_rows(vec![vec![0.0, -t], vec![t, 0.0]]);
        let r = expm(&j);
        assert!((r.get(0, 0) - t.cos()).abs() < 1e-14);
        assert!((r.get(1, 0) - t.sin()).abs() < 1e-14);
        let back = logm_near_identity(&r).unwrap();
        assert!((back.get(1, 0) - t).abs() < 1e-12);
    }
}
