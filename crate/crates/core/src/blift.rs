//! The b-cotangent bundle of a b-Lie group pair and the cotangent lift of
//! left translations by `H`.
//!
//! Points of `ᵇT*U` over the trivialization `U ≅ H × V` are stored as flat
//! vectors `(q_1..q_k, φ, p_1..p_k, p_φ)`. In b-mode `p_φ` pairs with
//! `φ∂_φ`; in smooth mode with `∂_φ`. Numerical checks work in the *mode
//! frame* `(∂_q, s(φ)∂_φ, ∂_p, ∂_{p_φ})` with `s(φ) = φ` (b-mode) or `1`
//! (smooth mode), in which the canonical form has constant coefficients.

use thiserror::Error;

use crate::bcalc::{BChart, BForm, BcalcError};
use crate::expr::Expr;
use crate::lie::{BLieGroupPair, LieError};
use crate::linalg::{solve_scalar, LinalgError, Matrix};
use crate::sampling::{box_points, signed_band, Halton, SampleBox};
use crate::scalar::{Dual, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BliftError {
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Bcalc(#[from] BcalcError),
    #[error("vector has a transverse component {0:.3e} on Z and is not a b-vector")]
    NotTangent(f64),
    #[error("expected a point of dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Classical (`T*U`) or b (`ᵇT*U`) cotangent structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Smooth,
    B,
}

impl Mode {
    /// Length of the transverse mode-frame vector in `∂_φ` units.
    pub fn scale<T: Scalar>(self, phi: T) -> T {
        match self {
            Mode::Smooth => T::one(),
            Mode::B => phi,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Smooth => "smooth",
            Mode::B => "b",
        }
    }
}

/// The b-cotangent bundle of a b-chart as a b-chart with coordinates
/// `(z, p_z)`, where `p_f` is dual to `f∂_f`.
#[derive(Clone, Debug, PartialEq)]
pub struct BCotangentChart {
    base: BChart,
    total: BChart,
}

impl BCotangentChart {
    pub fn new(base: &BChart, p_half_width: f64) -> Result<BCotangentChart, BcalcError> {
        let mut names = base.names().to_vec();
        names.extend(base.names().iter().map(|n| format!("p_{n}")));
        let mut lo = base.domain().lo.clone();
        let mut hi = base.domain().hi.clone();
        lo.extend(std::iter::repeat_n(-p_half_width, base.dim()));
        hi.extend(std::iter::repeat_n(p_half_width, base.dim()));
        let total = BChart::new(names, base.defining(), SampleBox { lo, hi })?;
        Ok(BCotangentChart { base: base.clone(), total })
    }

    pub fn base(&self) -> &BChart {
        &self.base
    }

    pub fn chart(&self) -> &BChart {
        &self.total
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    /// `λ = Σ_i p_i e^i` with `e^f = df/f`.
    pub fn liouville(&self) -> BForm {
        let n = self.base_dim();
        BForm::from_terms(2 * n, 1, (0..n).map(|i| (vec![i], Expr::var(self.total.names()[n + i].clone()))))
    }

    /// `ω = −dλ = Σ_i e^i ∧ dp_i`.
    pub fn canonical_bsymplectic(&self) -> BForm {
        self.liouville().b_d(&self.total).neg()
    }
}

/// Constant matrix of the canonical form in the mode frame.
pub fn canonical_frame_matrix(n: usize) -> Matrix<f64> {
    let mut m = Matrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        m.set(a, n + a, 1.0);
        m.set(n + a, a, -1.0);
    }
    m
}

/// `ω(u, v)` for mode-frame vectors.
pub fn canonical_pairing<T: Scalar>(u: &[T], v: &[T]) -> T {
    let n = u.len() / 2;
    let mut acc = T::zero();
    for a in 0..n {
        acc = acc + u[a] * v[n + a] - u[n + a] * v[a];
    }
    acc
}

/// Sampling ranges for points of `ᵇT*U` and elements of `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSpec {
    pub q_half_width: f64,
    /// `|φ|` range off `Z`.
    pub phi_band: (f64, f64),
    pub p_half_width: f64,
    /// Every `on_z_every`-th sample is placed on `Z` (`0` disables).
    pub on_z_every: usize,
    pub group_half_width: f64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec { q_half_width: 0.7, phi_band: (0.05, 1.0), p_half_width: 1.0, on_z_every: 4, group_half_width: 0.6 }
    }
}

/// The cotangent lift `(k, α_g) ↦ (L_{k⁻¹})*α_g` of left translation by `H`
/// on the trivialization, with its moment map.
#[derive(Clone, Copy, Debug)]
pub struct LiftedAction<'a> {
    pair: &'a BLieGroupPair,
    mode: Mode,
}

impl<'a> LiftedAction<'a> {
    pub fn new(pair: &'a BLieGroupPair, mode: Mode) -> LiftedAction<'a> {
        LiftedAction { pair, mode }
    }

    pub fn pair(&self) -> &'a BLieGroupPair {
        self.pair
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Dimension `k` of `H`.
    pub fn k(&self) -> usize {
        self.pair.dim_h()
    }

    /// Dimension `k + 1` of the base.
    pub fn base_dim(&self) -> usize {
        self.k() + 1
    }

    pub fn dim(&self) -> usize {
        2 * self.base_dim()
    }

    pub fn phi_index(&self) -> usize {
        self.k()
    }

    pub fn p_phi_index(&self) -> usize {
        2 * self.k() + 1
    }

    /// Coordinate names `(q, φ, p_q, p_φ)`.
    pub fn names(&self) -> Vec<String> {
        let mut base: Vec<String> = self.pair.q_names().to_vec();
        base.push(self.pair.phi_name().to_string());
        let p: Vec<String> = base.iter().map(|n| format!("p_{n}")).collect();
        base.extend(p);
        base
    }

    /// The b-chart of the base `U` with defining coordinate `φ`.
    pub fn base_chart(&self, spec: &SampleSpec) -> BChart {
        let k = self.k();
        let mut names: Vec<String> = self.pair.q_names().to_vec();
        names.push(self.pair.phi_name().to_string());
        let mut lo = vec![-spec.q_half_width; k];
        let mut hi = vec![spec.q_half_width; k];
        lo.push(-spec.phi_band.1);
        hi.push(spec.phi_band.1);
        BChart::new(names, k, SampleBox { lo, hi }).expect("pair coordinates are distinct")
    }

    pub fn cotangent_chart(&self, spec: &SampleSpec) -> BCotangentChart {
        BCotangentChart::new(&self.base_chart(spec), spec.p_half_width).expect("valid cotangent chart")
    }

    fn check_dim(&self, x: &[impl Copy]) -> Result<(), BliftError> {
        if x.len() != self.dim() {
            return Err(BliftError::Dimension { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// Image of `x` under the lift of the `H`-element with matrix `km`.
    pub fn act<T: Scalar>(&self, km: &Matrix<T>, x: &[T]) -> Result<Vec<T>, BliftError> {
        self.check_dim(x)?;
        let k = self.k();
        let (q2, jac) = self.pair.translate_with_jacobian(km, &x[..k])?;
        // p' = J^{-T} p
        let p = Matrix::from_vec(k, 1, x[k + 1..2 * k + 1].to_vec());
        let p2 = solve_scalar(&jac.transpose(), &p)?;
        let mut out = q2;
        out.push(x[k]);
        out.extend_from_slice(p2.data());
        out.push(x[2 * k + 1]);
        Ok(out)
    }

    /// The lift of the `H`-element with parameters `kp`.
    pub fn act_params(&self, kp: &[f64], x: &[f64]) -> Result<Vec<f64>, BliftError> {
        self.act(&self.pair.h().chart_at(kp), x)
    }

    /// `μ(x) ∈ 𝔥*` with `⟨μ, X⟩ = ⟨λ, X#⟩ = ⟨p, ζ^X(q)⟩`.
    pub fn moment<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>, BliftError> {
        self.check_dim(x)?;
        let k = self.k();
        let z = self.pair.right_fields(&x[..k])?;
        Ok(z.transpose().matvec(&x[k + 1..2 * k + 1]))
    }

    pub fn moment_component<T: Scalar>(&self, x: &[T], xi: &[T]) -> Result<T, BliftError> {
        let mu = self.moment(x)?;
        Ok(mu.iter().zip(xi).fold(T::zero(), |acc, (m, v)| acc + *m * *v))
    }

    /// Coordinate components of the fundamental field `X#` at `x`,
    /// `d/dt Φ_{exp(tX)}(x)` at `t = 0`.
    pub fn fundamental_field(&self, x: &[f64], xi: &[f64]) -> Result<Vec<f64>, BliftError> {
        let m = self.pair.h().size();
        let gen = self.pair.h().algebra_matrix(xi);
        let km = Matrix::from_fn(m, m, |r, c| Dual::new(if r == c { 1.0 } else { 0.0 }, *gen.get(r, c)));
        let xd: Vec<Dual<f64>> = x.iter().map(|v| Dual::constant(*v)).collect();
        Ok(self.act(&km, &xd)?.iter().map(|d| d.eps).collect())
    }

    /// Converts coordinate components to mode-frame components.
    pub fn to_frame(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>, BliftError> {
        let s = self.mode.scale(x[self.phi_index()]);
        let mut out = v.to_vec();
        let i = self.phi_index();
        if s == 0.0 {
            if v[i] != 0.0 {
                return Err(BliftError::NotTangent(v[i]));
            }
        } else {
            out[i] = v[i] / s;
        }
        Ok(out)
    }

    /// Converts mode-frame components to coordinate components.
    pub fn from_frame<T: Scalar>(&self, x: &[T], v: &[T]) -> Vec<T> {
        let mut out = v.to_vec();
        let i = self.phi_index();
        out[i] = v[i] * self.mode.scale(x[i]);
        out
    }

    /// Point seeded with the mode-frame direction `E_j`.
    pub fn seed_frame(&self, x: &[f64], j: usize) -> Vec<Dual<f64>> {
        let s = self.mode.scale(x[self.phi_index()]);
        x.iter()
            .enumerate()
            .map(|(i, v)| {
                if i != j {
                    Dual::constant(*v)
                } else if i == self.phi_index() {
                    Dual::new(*v, s)
                } else {
                    Dual::variable(*v)
                }
            })
            .collect()
    }

    /// Mode-frame derivatives `E_j(μ^X)`.
    pub fn d_moment_frame(&self, x: &[f64], xi: &[f64]) -> Result<Vec<f64>, BliftError> {
        let xid: Vec<Dual<f64>> = xi.iter().map(|v| Dual::constant(*v)).collect();
        (0..self.dim()).map(|j| Ok(self.moment_component(&self.seed_frame(x, j), &xid)?.eps)).collect()
    }

    /// Mode-frame components of `λ` at `x`.
    pub fn liouville_frame(&self, x: &[f64]) -> Vec<f64> {
        let n = self.base_dim();
        let mut out = x[n..].to_vec();
        out.extend(std::iter::repeat_n(0.0, n));
        out
    }

    /// Mode-frame matrix of `dΦ_k` at `x` (column `j` is `dΦ_k(E_j)` in the
    /// frame at `Φ_k(x)`), together with `Φ_k(x)`.
    pub fn frame_differential(&self, kp: &[f64], x: &[f64]) -> Result<(Vec<f64>, Matrix<f64>), BliftError> {
        let km: Matrix<Dual<f64>> = self.pair.h().chart_at(kp).map(|v| Dual::constant(*v));
        let image = self.act_params(kp, x)?;
        let mut cols = Vec::with_capacity(self.dim());
        for j in 0..self.dim() {
            let out = self.act(&km, &self.seed_frame(x, j))?;
            let coord: Vec<f64> = out.iter().map(|d| d.eps).collect();
            // Φ_k fixes φ, so the transverse row is exactly the unit row.
            let mut col = coord.clone();
            let i = self.phi_index();
            col[i] = if j == i { 1.0 } else { 0.0 };
            debug_assert!(j == i || coord[i] == 0.0);
            cols.push(col);
        }
        Ok((image, Matrix::from_columns(&cols)))
    }

    /// `max_i |ι_{X#}ω(E_i) − dμ^X(E_i)|`.
    pub fn hamilton_residual(&self, x: &[f64], xi: &[f64]) -> Result<f64, BliftError> {
        let v = self.to_frame(x, &self.fundamental_field(x, xi)?)?;
        let dmu = self.d_moment_frame(x, xi)?;
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for (i, dm) in dmu.iter().enumerate() {
            let e: Vec<f64> = (0..n).map(|j| if j == i { 1.0 } else { 0.0 }).collect();
            worst = worst.max((canonical_pairing(&v, &e) - dm).abs());
        }
        Ok(worst)
    }

    /// `|μ(Φ_k x) − Ad*_k μ(x)|_∞`.
    pub fn equivariance_residual(&self, kp: &[f64], x: &[f64]) -> Result<f64, BliftError> {
        let lhs = self.moment(&self.act_params(kp, x)?)?;
        let rhs = self.pair.h().coadjoint_star(kp, &self.moment(x)?)?;
        Ok(max_abs_diff(&lhs, &rhs))
    }

    /// `|Φ_{k₂}(Φ_{k₁}x) − Φ_{k₂k₁}(x)|_∞`.
    pub fn action_law_residual(&self, k1: &[f64], k2: &[f64], x: &[f64]) -> Result<f64, BliftError> {
        let h = self.pair.h();
        let lhs = self.act_params(k2, &self.act_params(k1, x)?)?;
        let prod = h.chart_at(k2).matmul(&h.chart_at(k1));
        let rhs = self.act(&prod, x)?;
        Ok(max_abs_diff(&lhs, &rhs))
    }

    /// `|⟨Φ_k α, (L_k)_* v⟩ − ⟨α, v⟩|` for a base tangent vector `v = (v_q, v_φ)`
    /// in coordinates.
    pub fn pairing_residual(&self, kp: &[f64], x: &[f64], v: &[f64]) -> Result<f64, BliftError> {
        let k = self.k();
        let km: Matrix<Dual<f64>> = self.pair.h().chart_at(kp).map(|c| Dual::constant(*c));
        let qd: Vec<Dual<f64>> = x[..k].iter().zip(v).map(|(q, d)| Dual::new(*q, *d)).collect();
        let pushed: Vec<f64> = self.pair.left_translate(&km, &qd)?.iter().map(|d| d.eps).collect();
        let image = self.act_params(kp, x)?;
        let before: f64 = (0..k).map(|i| x[k + 1 + i] * v[i]).sum::<f64>() + x[2 * k + 1] * v[k];
        let after: f64 = (0..k).map(|i| image[k + 1 + i] * pushed[i]).sum::<f64>() + image[2 * k + 1] * v[k];
        Ok((after - before).abs())
    }

    /// `max_j |λ_{Φ x}(dΦ E_j) − λ_x(E_j)|`.
    pub fn liouville_invariance_residual(&self, kp: &[f64], x: &[f64]) -> Result<f64, BliftError> {
        let (image, d) = self.frame_differential(kp, x)?;
        let after = d.transpose().matvec(&self.liouville_frame(&image));
        Ok(max_abs_diff(&after, &self.liouville_frame(x)))
    }

    /// `max_{i,j} |ω(dΦ E_i, dΦ E_j) − ω(E_i, E_j)|`.
    pub fn omega_preservation_residual(&self, kp: &[f64], x: &[f64]) -> Result<f64, BliftError> {
        let (_, d) = self.frame_differential(kp, x)?;
        let omega = canonical_frame_matrix(self.base_dim());
        let pulled = d.transpose().matmul(&omega).matmul(&d);
        Ok(max_abs_diff(pulled.data(), omega.data()))
    }

    /// Seeded sample points of `ᵇT*U`; every `on_z_every`-th point has
    /// `φ = 0` exactly.
    pub fn sample_points(&self, n: usize, seed: u64, spec: &SampleSpec) -> Vec<Vec<f64>> {
        let k = self.k();
        let h = Halton::new(self.dim(), seed);
        (0..n)
            .map(|i| {
                let u = h.point(i);
                let mut x = Vec::with_capacity(self.dim());
                x.extend(u[..k].iter().map(|t| (2.0 * t - 1.0) * spec.q_half_width));
                let on_z = spec.on_z_every > 0 && i % spec.on_z_every == spec.on_z_every - 1;
                x.push(if on_z { 0.0 } else { signed_band(u[k], spec.phi_band.0, spec.phi_band.1) });
                x.extend(u[k + 1..].iter().map(|t| (2.0 * t - 1.0) * spec.p_half_width));
                x
            })
            .collect()
    }

    /// Seeded parameters of elements of `H`.
    pub fn sample_group(&self, n: usize, seed: u64, spec: &SampleSpec) -> Vec<Vec<f64>> {
        box_points(&SampleBox::cube(self.k(), spec.group_half_width), n, seed ^ 0x9e37_79b9)
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcalc::{bdarboux_model, is_b_symplectic, SymplecticOptions};

    #[test]
    fn liouville_and_canonical_on_line() {
        let base = BChart::with_cube(&["y1"], "y1", 1.0).unwrap();
        let c = BCotangentChart::new(&base, 1.0).unwrap();
        let lam = c.liouville();
        assert_eq!(lam.coefficient(&[0]).to_string(), "p_y1");
        let w = c.canonical_bsymplectic();
        assert!(w.coefficient(&[0, 1]).is_one());
        let r = is_b_symplectic(&w, c.chart(), &SymplecticOptions::default()).unwrap();
        assert!(r.verdict());
    }

    #[test]
    fn canonical_matches_darboux_after_renaming() {
        // x1 = -p_f, y1 = f: dx1∧dy1/y1 = df/f∧dp_f
        let (_, darboux) = bdarboux_model(1);
        let base = BChart::with_cube(&["f"], "f", 1.0).unwrap();
        let w = BCotangentChart::new(&base, 1.0).unwrap().canonical_bsymplectic();
        // frame order (x1, y1) vs (f, p_f): swap indices and flip the sign of x1
        let renamed = BForm::from_terms(2, 2, vec![(vec![1, 0], w.coefficient(&[0, 1]).neg())]);
        assert_eq!(renamed, darboux);
    }

    #[test]
    fn identity_acts_trivially() {
        let pair = BLieGroupPair::se2();
        let a = LiftedAction::new(&pair, Mode::B);
        let x = vec![0.3, -0.2, 0.5, 0.7, -0.4, 0.1];
        let y = a.act_params(&[0.0, 0.0], &x).unwrap();
        assert!(max_abs_diff(&x, &y) < 1e-15);
    }

    #[test]
    fn heisenberg_hamilton_and_equivariance() {
        let pair = BLieGroupPair::heisenberg_q(1).unwrap();
        let a = LiftedAction::new(&pair, Mode::B);
        let spec = SampleSpec::default();
        let ks = a.sample_group(10, 3, &spec);
        for (i, x) in a.sample_points(10, 3, &spec).iter().enumerate() {
            assert!(a.hamilton_residual(x, &[0.3, -0.8]).unwrap() < 1e-12);
            assert!(a.equivariance_residual(&ks[i], x).unwrap() < 1e-12);
            assert!(a.omega_preservation_residual(&ks[i], x).unwrap() < 1e-12);
        }
    }
}
