//! Principal (b-)connections on the trivialization `U ≅ H × V`, the
//! minimal-coupling maps and the reduced Poisson structure.
//!
//! Base tangent vectors are given in the mode frame `(∂_q, s(φ)∂_φ)` (see
//! [`crate::blift`]). A connection is `θ(v) = Θ(q)v_q + κ(q, φ)·w`, where
//! `Θ` right-trivializes `v_q` and `w` is the transverse frame component.
//!
//! Points of the coupled space `ℋ° × 𝔥*` are `(q, φ, b, μ)`: the annihilator
//! element is `b·e^φ` at `h(q)σ(φ)`, with `e^φ = dφ/φ` in b-mode and `dφ` in
//! smooth mode.

use num_traits::Zero;
use thiserror::Error;

use crate::bcalc::{BcalcError, PoissonBivector};
use crate::blift::{canonical_frame_matrix, canonical_pairing, max_abs_diff, BliftError, LiftedAction, Mode};
use crate::expr::{CompiledExpr, EvalError, Expr, Polynomial};
use crate::lie::{matrix_expander, BLieGroupPair, LieError};
use crate::linalg::{inverse_scalar, LinalgError, Matrix};
use crate::scalar::{Dual, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error(transparent)]
    Lift(#[from] BliftError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Bcalc(#[from] BcalcError),
    #[error("invalid deformation: {0}")]
    Deformation(String),
    #[error("connection axiom `{what}` violated (residual {residual:.3e})")]
    Axiom { what: String, residual: f64 },
    #[error("function is not H-invariant (residual {residual:.3e})")]
    NotInvariant { residual: f64 },
    #[error("unknown variable `{0}` in phase function")]
    UnknownVariable(String),
}

/// Which member of the connection family is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConnectionKind {
    Default,
    /// `θ + Ad_h ξ ⊗ c(φ) dφ`.
    SmoothDeformed,
    /// `θ + Ad_h ξ ⊗ c(φ) dφ/φ`.
    BDeformed,
}

impl ConnectionKind {
    pub fn name(self) -> &'static str {
        match self {
            ConnectionKind::Default => "default",
            ConnectionKind::SmoothDeformed => "smooth-deformed",
            ConnectionKind::BDeformed => "b-deformed",
        }
    }
}

#[derive(Clone, Debug)]
struct Deformation {
    xi: Vec<f64>,
    c: Expr,
    code: CompiledExpr,
    b_flag: bool,
}

/// A principal `H`-connection (smooth mode) or b-connection (b-mode).
#[derive(Clone, Debug)]
pub struct Connection<'a> {
    action: LiftedAction<'a>,
    deformation: Option<Deformation>,
}

/// A point `(β, μ)` of `ℋ° × 𝔥*` over `h(q)σ(φ)`, with `β = b·e^φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledPoint<T> {
    pub q: Vec<T>,
    pub phi: T,
    pub b: T,
    pub mu: Vec<T>,
}

impl<T: Scalar> CoupledPoint<T> {
    /// Flat layout `(q, φ, b, μ)`.
    pub fn to_vec(&self) -> Vec<T> {
        let mut out = self.q.clone();
        out.push(self.phi);
        out.push(self.b);
        out.extend_from_slice(&self.mu);
        out
    }

    pub fn from_slice(y: &[T], k: usize) -> CoupledPoint<T> {
        CoupledPoint { q: y[..k].to_vec(), phi: y[k], b: y[k + 1], mu: y[k + 2..].to_vec() }
    }
}

/// An annihilator element `b·e^φ` over the base point `(q, φ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnihilatorElement {
    pub q: Vec<f64>,
    pub phi: f64,
    pub b: f64,
}

impl<'a> Connection<'a> {
    /// The right-trivialized vertical projector of the product chart.
    pub fn default_for(pair: &'a BLieGroupPair, mode: Mode) -> Connection<'a> {
        Connection { action: LiftedAction::new(pair, mode), deformation: None }
    }

    /// `θ + Ad_h ξ ⊗ c(φ) dφ` (or `dφ/φ` with `b_flag`, b-mode only).
    pub fn deformed(
        pair: &'a BLieGroupPair,
        mode: Mode,
        xi: &[f64],
        c: &Expr,
        b_flag: bool,
    ) -> Result<Connection<'a>, ReductionError> {
        if xi.len() != pair.dim_h() {
            return Err(ReductionError::Deformation(format!("ξ has {} components, 𝔥 has dimension {}", xi.len(), pair.dim_h())));
        }
        if b_flag && mode == Mode::Smooth {
            return Err(ReductionError::Deformation("dφ/φ deformations need a b-mode connection".into()));
        }
        let phi = pair.phi_name();
        if let Some(v) = c.free_vars().into_iter().find(|v| v != phi) {
            return Err(ReductionError::Deformation(format!("c may only depend on `{phi}`, found `{v}`")));
        }
        let code = c.compile(&[phi])?;
        let conn = Connection {
            action: LiftedAction::new(pair, mode),
            deformation: Some(Deformation { xi: xi.to_vec(), c: c.clone(), code, b_flag }),
        };
        conn.self_check()?;
        Ok(conn)
    }

    /// The standard member of `kind` used by the verification suite:
    /// `ξ = e_1`, `c(φ) = 1/(1 + φ²)`.
    pub fn standard(pair: &'a BLieGroupPair, mode: Mode, kind: ConnectionKind) -> Result<Connection<'a>, ReductionError> {
        let mut xi = vec![0.0; pair.dim_h()];
        if let Some(x) = xi.first_mut() {
            *x = 1.0;
        }
        let c = Expr::one().div(&Expr::one().add(&Expr::var(pair.phi_name()).powi(2)));
        match kind {
            ConnectionKind::Default => Ok(Connection::default_for(pair, mode)),
            ConnectionKind::SmoothDeformed => Connection::deformed(pair, mode, &xi, &c, false),
            ConnectionKind::BDeformed => Connection::deformed(pair, mode, &xi, &c, true),
        }
    }

    fn self_check(&self) -> Result<(), ReductionError> {
        let spec = crate::blift::SampleSpec::default();
        let pts = self.action.sample_points(8, 7, &spec);
        let ks = self.action.sample_group(8, 7, &spec);
        let mut rng = crate::sampling::rng(7, 1);
        for (x, kp) in pts.iter().zip(&ks) {
            let (q, phi) = (&x[..self.k()], x[self.k()]);
            let xi = crate::sampling::uniform_vec(&mut rng, self.k(), 1.0);
            let r = self.reproducing_residual(q, phi, &xi)?;
            if r > 1e-8 {
                return Err(ReductionError::Axiom { what: "reproducing".into(), residual: r });
            }
            let v = crate::sampling::uniform_vec(&mut rng, self.k() + 1, 1.0);
            let e = self.equivariance_residual(kp, q, phi, &v)?;
            if e > 1e-8 {
                return Err(ReductionError::Axiom { what: "equivariance".into(), residual: e });
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> ConnectionKind {
        match &self.deformation {
            None => ConnectionKind::Default,
            Some(d) if d.b_flag => ConnectionKind::BDeformed,
            Some(_) => ConnectionKind::SmoothDeformed,
        }
    }

    /// Human-readable description of `θ`.
    pub fn describe(&self) -> String {
        let phi = self.pair().phi_name();
        match &self.deformation {
            None => "right-trivialized vertical projection".to_string(),
            Some(d) => format!(
                "theta + Ad_h xi (x) ({}) d{phi}{}, xi = {:?}",
                d.c,
                if d.b_flag { format!("/{phi}") } else { String::new() },
                d.xi
            ),
        }
    }

    pub fn action(&self) -> &LiftedAction<'a> {
        &self.action
    }

    pub fn pair(&self) -> &'a BLieGroupPair {
        self.action.pair()
    }

    pub fn mode(&self) -> Mode {
        self.action.mode()
    }

    fn k(&self) -> usize {
        self.action.k()
    }

    /// `Θ(q)`: right trivialization as a `k×k` matrix.
    pub fn theta_matrix<T: Scalar>(&self, q: &[T]) -> Result<Matrix<T>, ReductionError> {
        Ok(inverse_scalar(&self.pair().right_fields(q)?)?)
    }

    /// `κ(q, φ) = θ(E_φ)`.
    pub fn kappa<T: Scalar>(&self, q: &[T], phi: T) -> Result<Vec<T>, ReductionError> {
        let Some(d) = &self.deformation else {
            return Ok(vec![T::zero(); self.k()]);
        };
        let c: T = d.code.eval(&[phi])?;
        let s = if d.b_flag { T::one() } else { self.mode().scale(phi) };
        let xi: Vec<T> = d.xi.iter().map(|v| T::lit(*v)).collect();
        let ad = self.pair().ad_h(q)?;
        Ok(ad.matvec(&xi).into_iter().map(|v| v * c * s).collect())
    }

    /// `θ(v)` for a base frame vector `v = (v_q, w)`.
    pub fn apply<T: Scalar>(&self, q: &[T], phi: T, v: &[T]) -> Result<Vec<T>, ReductionError> {
        let k = self.k();
        let mut out = self.theta_matrix(q)?.matvec(&v[..k]);
        if v[k] != T::zero() || self.deformation.is_some() {
            for (o, kap) in out.iter_mut().zip(self.kappa(q, phi)?) {
                *o = *o + kap * v[k];
            }
        }
        Ok(out)
    }

    /// `ζ^X` at `h(q)σ(φ)`: `(Z(q)X, 0)`; it has no transverse component.
    pub fn zeta<T: Scalar>(&self, q: &[T], x: &[T]) -> Result<Vec<T>, ReductionError> {
        let mut out = self.pair().right_fields(q)?.matvec(x);
        out.push(T::zero());
        Ok(out)
    }

    /// Projection `v ↦ ζ^{θ(v)}` onto `ℋ_g = (R_g)_*𝔥` along `ker θ`.
    pub fn horizontal_projection(&self, q: &[f64], phi: f64, v: &[f64]) -> Result<Vec<f64>, ReductionError> {
        self.zeta(q, &self.apply(q, phi, v)?)
    }

    /// `v ↦ (v − ζ(θ v), θ v)`.
    pub fn phi_theta(&self, q: &[f64], phi: f64, v: &[f64]) -> Result<(Vec<f64>, Vec<f64>), ReductionError> {
        let x = self.apply(q, phi, v)?;
        let z = self.zeta(q, &x)?;
        Ok((v.iter().zip(&z).map(|(a, b)| a - b).collect(), x))
    }

    /// `(u, X) ↦ u + ζ^X`.
    pub fn phi_theta_inverse(&self, q: &[f64], u: &[f64], x: &[f64]) -> Result<Vec<f64>, ReductionError> {
        let z = self.zeta(q, x)?;
        Ok(u.iter().zip(&z).map(|(a, b)| a + b).collect())
    }

    /// `α ↦ (α − α∘ζ∘θ, α∘ζ)` on a point `(q, φ, p, p_φ)` of `ᵇT*U`.
    pub fn psi_theta<T: Scalar>(&self, x: &[T]) -> Result<CoupledPoint<T>, ReductionError> {
        let k = self.k();
        let (q, phi) = (&x[..k], x[k]);
        let mu = self.action.moment(x)?;
        let kap = self.kappa(q, phi)?;
        let b = x[2 * k + 1] - kap.iter().zip(&mu).fold(T::zero(), |acc, (a, m)| acc + *a * *m);
        Ok(CoupledPoint { q: q.to_vec(), phi, b, mu })
    }

    /// `(β, μ) ↦ β + μ∘θ`.
    pub fn psi_theta_inverse<T: Scalar>(&self, c: &CoupledPoint<T>) -> Result<Vec<T>, ReductionError> {
        let p = self.theta_matrix(&c.q)?.transpose().matvec(&c.mu);
        let kap = self.kappa(&c.q, c.phi)?;
        let p_phi = c.b + kap.iter().zip(&c.mu).fold(T::zero(), |acc, (a, m)| acc + *a * *m);
        let mut out = c.q.clone();
        out.push(c.phi);
        out.extend(p);
        out.push(p_phi);
        Ok(out)
    }

    /// The annihilator component of `ψ_θ(x)`.
    pub fn annihilator_part(&self, x: &[f64]) -> Result<AnnihilatorElement, ReductionError> {
        let c = self.psi_theta(x)?;
        Ok(AnnihilatorElement { q: c.q, phi: c.phi, b: c.b })
    }

    /// Frame components of `λ^θ` on the coupled space at `y = (q, φ, b, μ)`:
    /// `λ^θ(u) = μ(θ(u_q, u_φ))`.
    pub fn lambda_frame<T: Scalar>(&self, y: &[T]) -> Result<Vec<T>, ReductionError> {
        let k = self.k();
        let c = CoupledPoint::from_slice(y, k);
        let mut out = self.theta_matrix(&c.q)?.transpose().matvec(&c.mu);
        let kap = self.kappa(&c.q, c.phi)?;
        out.push(kap.iter().zip(&c.mu).fold(T::zero(), |acc, (a, m)| acc + *a * *m));
        out.push(T::zero());
        out.extend(std::iter::repeat_n(T::zero(), k));
        Ok(out)
    }

    /// `λ^θ_{(α, μ)}(u)` for a coupled-space frame vector `u`.
    pub fn lambda_theta(&self, c: &CoupledPoint<f64>, u: &[f64]) -> Result<f64, ReductionError> {
        let a = self.lambda_frame(&c.to_vec())?;
        Ok(a.iter().zip(u).map(|(x, y)| x * y).sum())
    }

    /// Coupled-space point seeded along the frame vector `u`.
    fn seed_coupled(&self, y: &[f64], u: &[f64]) -> Vec<Dual<f64>> {
        let k = self.k();
        let s = self.mode().scale(y[k]);
        y.iter().zip(u).enumerate().map(|(i, (v, d))| Dual::new(*v, if i == k { d * s } else { *d })).collect()
    }

    /// Phase-space point seeded along the frame vector `v`.
    fn seed_phase(&self, x: &[f64], v: &[f64]) -> Vec<Dual<f64>> {
        let k = self.k();
        let s = self.mode().scale(x[k]);
        x.iter().zip(v).enumerate().map(|(i, (a, d))| Dual::new(*a, if i == k { d * s } else { *d })).collect()
    }

    /// `dψ_θ(v)` in coupled frame components.
    pub fn push_forward(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>, ReductionError> {
        let out = self.psi_theta(&self.seed_phase(x, v))?.to_vec();
        let mut u: Vec<f64> = out.iter().map(|d| d.eps).collect();
        // ψ_θ fixes φ, so the transverse frame component is carried over.
        u[self.k()] = v[self.k()];
        Ok(u)
    }

    /// `(D_u A)` contracted with `w`, for `A` the frame components of `λ^θ`.
    fn d_lambda_dir(&self, y: &[f64], u: &[f64], w: &[f64]) -> Result<f64, ReductionError> {
        let a = self.lambda_frame(&self.seed_coupled(y, u))?;
        Ok(a.iter().zip(w).map(|(x, z)| x.eps * z).sum())
    }

    /// `dλ^θ(u, w)`; mode-frame fields commute, so no bracket term appears.
    pub fn d_lambda(&self, y: &[f64], u: &[f64], w: &[f64]) -> Result<f64, ReductionError> {
        Ok(self.d_lambda_dir(y, u, w)? - self.d_lambda_dir(y, w, u)?)
    }

    /// `(π̄*ω_{G/H} − dλ^θ)(u, w)` at the coupled point `y`.
    pub fn coupled_form(&self, y: &[f64], u: &[f64], w: &[f64]) -> Result<f64, ReductionError> {
        let k = self.k();
        let quotient = u[k] * w[k + 1] - u[k + 1] * w[k];
        Ok(quotient - self.d_lambda(y, u, w)?)
    }

    /// Frame matrix of the coupled form at `y`.
    pub fn coupled_frame_matrix(&self, y: &[f64]) -> Result<Matrix<f64>, ReductionError> {
        let n = y.len();
        let unit = |i: usize| -> Vec<f64> { (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect() };
        // da[i][j] = E_i(A_j)
        let mut da = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.lambda_frame(&self.seed_coupled(y, &unit(i)))?;
            da.push(a.iter().map(|d| d.eps).collect::<Vec<f64>>());
        }
        let k = self.k();
        Ok(Matrix::from_fn(n, n, |i, j| {
            let quotient = match (i, j) {
                (a, b) if a == k && b == k + 1 => 1.0,
                (a, b) if a == k + 1 && b == k => -1.0,
                _ => 0.0,
            };
            quotient - (da[i][j] - da[j][i])
        }))
    }

    /// `|ω_G(v, w) − (π̄*ω_{G/H} − dλ^θ)(dψ_θ v, dψ_θ w)|`.
    pub fn coupling_residual(&self, x: &[f64], v: &[f64], w: &[f64]) -> Result<f64, ReductionError> {
        let lhs = canonical_pairing(v, w);
        let y = self.psi_theta(x)?.to_vec();
        let rhs = self.coupled_form(&y, &self.push_forward(x, v)?, &self.push_forward(x, w)?)?;
        Ok((lhs - rhs).abs())
    }

    /// `|θ(ζ^X) − X|_∞`.
    pub fn reproducing_residual(&self, q: &[f64], phi: f64, x: &[f64]) -> Result<f64, ReductionError> {
        Ok(max_abs_diff(&self.apply(q, phi, &self.zeta(q, x)?)?, x))
    }

    /// `|θ((L_k)_* v) − Ad_k θ(v)|_∞`.
    pub fn equivariance_residual(&self, kp: &[f64], q: &[f64], phi: f64, v: &[f64]) -> Result<f64, ReductionError> {
        let (q2, v2) = translate_base(self.pair(), kp, q, v)?;
        let lhs = self.apply(&q2, phi, &v2)?;
        let rhs = self.pair().h().adjoint(kp, &self.apply(q, phi, v)?)?;
        Ok(max_abs_diff(&lhs, &rhs))
    }

    /// `|π(π(v)) − π(v)|_∞` for the projection onto `ℋ`.
    pub fn idempotence_residual(&self, q: &[f64], phi: f64, v: &[f64]) -> Result<f64, ReductionError> {
        let once = self.horizontal_projection(q, phi, v)?;
        let twice = self.horizontal_projection(q, phi, &once)?;
        Ok(max_abs_diff(&once, &twice))
    }

    /// Round trip `φ_θ⁻¹ ∘ φ_θ` and `θ(u) = 0` for the first component.
    pub fn phi_theta_roundtrip(&self, q: &[f64], phi: f64, v: &[f64]) -> Result<f64, ReductionError> {
        let (u, x) = self.phi_theta(q, phi, v)?;
        let back = self.phi_theta_inverse(q, &u, &x)?;
        let ker = self.apply(q, phi, &u)?;
        Ok(max_abs_diff(&back, v).max(ker.iter().fold(0.0, |m: f64, t| m.max(t.abs()))))
    }

    /// `φ_θ((L_k)_* v)` against `((L_k)_* u, Ad_k X)`.
    pub fn phi_theta_equivariance(&self, kp: &[f64], q: &[f64], phi: f64, v: &[f64]) -> Result<f64, ReductionError> {
        let (u, x) = self.phi_theta(q, phi, v)?;
        let (q2, v2) = translate_base(self.pair(), kp, q, v)?;
        let (u2, x2) = self.phi_theta(&q2, phi, &v2)?;
        let (_, u_pushed) = translate_base(self.pair(), kp, q, &u)?;
        let x_pushed = self.pair().h().adjoint(kp, &x)?;
        Ok(max_abs_diff(&u2, &u_pushed).max(max_abs_diff(&x2, &x_pushed)))
    }

    /// Round trip `ψ_θ⁻¹ ∘ ψ_θ` and `β(ζ^X) = 0` for the first component.
    pub fn psi_theta_roundtrip(&self, x: &[f64]) -> Result<f64, ReductionError> {
        let c = self.psi_theta(x)?;
        let back = self.psi_theta_inverse(&c)?;
        // β = α − μ∘θ as a full covector; its q-part must vanish.
        let k = self.k();
        let theta_t = self.theta_matrix(&c.q)?.transpose().matvec(&c.mu);
        let beta_q = x[k + 1..2 * k + 1].iter().zip(&theta_t).map(|(a, b)| a - b).fold(0.0, |m: f64, t| m.max(t.abs()));
        Ok(max_abs_diff(&back, x).max(beta_q))
    }

    /// `ψ_θ(Φ_k x)` against `((L_{k⁻¹})*β, Ad*_k μ)`.
    pub fn psi_theta_equivariance(&self, kp: &[f64], x: &[f64]) -> Result<f64, ReductionError> {
        let k = self.k();
        let lhs = self.psi_theta(&self.action.act_params(kp, x)?)?;
        let c = self.psi_theta(x)?;
        let q2 = self.pair().left_translate(&self.pair().h().chart_at(kp), &c.q)?;
        let rhs = CoupledPoint { q: q2, phi: c.phi, b: c.b, mu: self.pair().h().coadjoint_star(kp, &c.mu)? };
        debug_assert_eq!(lhs.q.len(), k);
        Ok(max_abs_diff(&lhs.to_vec(), &rhs.to_vec()))
    }

    /// `|π̄(ψ(Φ_k x)) − π̄(ψ(x))|`: the projected annihilator is invariant.
    pub fn annihilator_invariance(&self, kp: &[f64], x: &[f64]) -> Result<f64, ReductionError> {
        let a = project_annihilator(&self.annihilator_part(x)?);
        let b = project_annihilator(&self.annihilator_part(&self.action.act_params(kp, x)?)?);
        Ok((a.0 - b.0).abs().max((a.1 - b.1).abs()))
    }

    /// Reduced coordinates `(ν, φ, b)` with `ν = W(q)ᵀp` the left-trivialized
    /// momentum.
    pub fn reduce_point<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>, ReductionError> {
        let k = self.k();
        let w = self.pair().left_fields(&x[..k])?;
        let mut out = w.transpose().matvec(&x[k + 1..2 * k + 1]);
        out.push(x[k]);
        out.push(self.psi_theta(x)?.b);
        Ok(out)
    }

    /// Reduced bracket of two invariant functions computed on the coupled
    /// space with the form `π̄*ω_{G/H} − dλ^θ` at `ψ_θ(x)`.
    pub fn reduced_bracket(&self, f: &CompiledPhase, g: &CompiledPhase, x: &[f64]) -> Result<f64, ReductionError> {
        let y = self.psi_theta(x)?.to_vec();
        let omega = self.coupled_frame_matrix(&y)?;
        let poisson = inverse_scalar(&omega)?.transpose();
        let n = y.len();
        let grad = |ph: &CompiledPhase| -> Result<Vec<f64>, ReductionError> {
            (0..n)
                .map(|i| {
                    let e: Vec<f64> = (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect();
                    let yd = self.seed_coupled(&y, &e);
                    let c = CoupledPoint::from_slice(&yd, self.k());
                    Ok(ph.eval(&self.action, &self.psi_theta_inverse(&c)?)?.eps)
                })
                .collect()
        };
        let df = grad(f)?;
        let dg = grad(g)?;
        Ok(df.iter().zip(poisson.matvec(&dg)).map(|(a, b)| a * b).sum())
    }
}

/// `(L_k)_*` on a base frame vector: `(q, v_q, w) ↦ (k·q, J v_q, w)`.
pub fn translate_base(pair: &BLieGroupPair, kp: &[f64], q: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>), ReductionError> {
    let k = pair.dim_h();
    let (q2, jac) = pair.translate_with_jacobian(&pair.h().chart_at(kp), q)?;
    let mut v2 = jac.matvec(&v[..k]);
    v2.push(v[k]);
    Ok((q2, v2))
}

/// `b·e^φ` at `(h, φ)` ↦ `b·e^φ` at `φ` on `ᵇT*(G/H)`.
pub fn project_annihilator(a: &AnnihilatorElement) -> (f64, f64) {
    (a.phi, a.b)
}

/// A function on `ᵇT*U` used to probe reduced brackets.
#[derive(Clone, Debug, PartialEq)]
pub enum PhaseFunction {
    /// An expression in the phase-space coordinates `(q, φ, p_q, p_φ)`.
    Coordinate(Expr),
    /// An expression in the reduced names `(mu_<label>, φ, p)`, read
    /// upstairs as a function of `(ν, φ, p_φ)` and hence `H`-invariant.
    Invariant(Expr),
}

/// A compiled [`PhaseFunction`].
#[derive(Clone, Debug)]
pub struct CompiledPhase {
    invariant: bool,
    code: CompiledExpr,
}

impl PhaseFunction {
    pub fn compile(&self, action: &LiftedAction) -> Result<CompiledPhase, ReductionError> {
        let (names, e, invariant) = match self {
            PhaseFunction::Coordinate(e) => (action.names(), e, false),
            PhaseFunction::Invariant(e) => (reduced_names(action.pair()), e, true),
        };
        if let Some(v) = e.free_vars().into_iter().find(|v| !names.contains(v)) {
            return Err(ReductionError::UnknownVariable(v));
        }
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Ok(CompiledPhase { invariant, code: e.compile(&refs)? })
    }
}

impl CompiledPhase {
    pub fn eval<T: Scalar>(&self, action: &LiftedAction, x: &[T]) -> Result<T, ReductionError> {
        if !self.invariant {
            return Ok(self.code.eval(x)?);
        }
        let k = action.k();
        let w = action.pair().left_fields(&x[..k])?;
        let mut args = w.transpose().matvec(&x[k + 1..2 * k + 1]);
        args.push(x[k]);
        args.push(x[2 * k + 1]);
        Ok(self.code.eval(&args)?)
    }

    fn frame_gradient(&self, action: &LiftedAction, x: &[f64]) -> Result<Vec<f64>, ReductionError> {
        (0..action.dim()).map(|j| Ok(self.eval(action, &action.seed_frame(x, j))?.eps)).collect()
    }
}

/// Upstairs bracket of two `H`-invariant functions with the canonical
/// structure of `ᵇT*U`. This is the connection-free reference for reduced
/// brackets. Invariance is checked at `Φ_k x` for each `k` in `group`.
pub fn reduced_bracket_via_invariants(
    action: &LiftedAction,
    f: &CompiledPhase,
    g: &CompiledPhase,
    x: &[f64],
    group: &[Vec<f64>],
    tol: f64,
) -> Result<f64, ReductionError> {
    for kp in group {
        let y = action.act_params(kp, x)?;
        for h in [f, g] {
            let r = (h.eval(action, &y)? - h.eval(action, x)?).abs();
            if r > tol {
                return Err(ReductionError::NotInvariant { residual: r });
            }
        }
    }
    let df = f.frame_gradient(action, x)?;
    let dg = g.frame_gradient(action, x)?;
    Ok(canonical_pairing(&df, &dg))
}

/// Reduced coordinate names `(mu_<label>…, φ, p)`.
pub fn reduced_names(pair: &BLieGroupPair) -> Vec<String> {
    let mut names = pair.h_algebra().dual_names();
    names.push(pair.phi_name().to_string());
    names.push("p".to_string());
    names
}

/// `Π_red = Π⁻_{L-P}(𝔥*) + Π_can` on `𝔥* × ᵇT*(G/H)` in coordinates
/// `(μ, φ, p)`, with `Π_can = φ∂_φ∧∂_p` (b-mode) or `∂_φ∧∂_p` (smooth mode).
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedPoisson {
    mode: Mode,
    k: usize,
    bivector: PoissonBivector,
}

/// One coefficient `{left, right} = value` of a bivector table.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketEntry {
    pub left: String,
    pub right: String,
    pub value: Expr,
}

impl ReducedPoisson {
    pub fn new(pair: &BLieGroupPair, mode: Mode) -> ReducedPoisson {
        let names = reduced_names(pair);
        let k = pair.dim_h();
        let alg = pair.h_algebra();
        let mut pi = PoissonBivector::new(names);
        for i in 0..k {
            for j in i + 1..k {
                pi.set(i, j, alg.lie_poisson_coefficient(i, j));
            }
        }
        let can = match mode {
            Mode::B => Expr::var(pair.phi_name()),
            Mode::Smooth => Expr::one(),
        };
        pi.set(k, k + 1, can);
        ReducedPoisson { mode, k, bivector: pi }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn bivector(&self) -> &PoissonBivector {
        &self.bivector
    }

    pub fn names(&self) -> &[String] {
        self.bivector.names()
    }

    /// Every upper-triangle coefficient, zeros included, in coordinate order.
    pub fn table(&self) -> Vec<BracketEntry> {
        let n = self.names().len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                out.push(BracketEntry {
                    left: self.names()[i].clone(),
                    right: self.names()[j].clone(),
                    value: self.bivector.get(i, j),
                });
            }
        }
        out
    }

    /// `{μ_i, φ} = {μ_i, p} = 0` structurally.
    pub fn block_diagonal(&self) -> bool {
        (0..self.k).all(|i| self.bivector.get(i, self.k).is_zero() && self.bivector.get(i, self.k + 1).is_zero())
    }

    /// Every coefficient of `∂_φ` vanishes identically on `φ = 0`.
    pub fn tangent_to_z(&self) -> bool {
        let phi = &self.names()[self.k];
        (0..self.names().len()).all(|j| {
            let e = self.bivector.get(self.k, j).substitute_one(phi, &Expr::zero());
            Polynomial::from_expr(&e).is_some_and(|p| p.is_zero())
        })
    }

    /// `|Dρ Π₀ Dρᵀ − Π_red|_∞` at the image of `x` under the default-connection
    /// reduction map.
    pub fn pushforward_residual(&self, conn: &Connection, x: &[f64]) -> Result<f64, ReductionError> {
        let a = conn.action();
        let n = a.dim();
        let m = self.names().len();
        // rows: frame derivatives of each reduced coordinate
        let mut d = Matrix::zeros(m, n);
        for j in 0..n {
            let r = conn.reduce_point(&a.seed_frame(x, j))?;
            for (i, v) in r.iter().enumerate() {
                d.set(i, j, v.eps);
            }
        }
        let p0 = canonical_frame_matrix(a.base_dim());
        let pushed = d.matmul(&p0).matmul(&d.transpose());
        let y = conn.reduce_point(x)?;
        let target = self.bivector.matrix_at(&y)?;
        Ok(max_abs_diff(pushed.data(), target.data()))
    }

    /// Bracket of two expressions in the reduced names, exactly normalized
    /// when the result is a Laurent polynomial.
    pub fn bracket(&self, f: &Expr, g: &Expr) -> Expr {
        let e = self.bivector.bracket_expr(f, g);
        Polynomial::from_expr(&e).map_or(e, |p| p.to_expr())
    }
}

/// `G`-body momenta `ν^G_X = ⟨α, g·X⟩` for every basis element `X` of `𝔤`,
/// as expressions in the reduced names. With `Ad_{σ(φ)} X = Y + t E`,
/// `ν^G_X = ν(Y) + t·p/s(φ)`; the transverse term is singular on `Z` in
/// b-mode.
pub fn ambient_momenta(pair: &BLieGroupPair, mode: Mode) -> Result<Vec<(String, Expr)>, ReductionError> {
    let g = pair.g();
    let phi = Expr::var(pair.phi_name());
    let sigma = pair.sigma();
    let sigma_inv = sigma.map(|e| e.substitute_one(pair.phi_name(), &phi.neg()));
    let exact = matrix_expander(g.basis())?;
    let names = reduced_names(pair);
    let k = pair.dim_h();
    let p_term = match mode {
        Mode::B => Expr::var("p").div(&phi),
        Mode::Smooth => Expr::var("p"),
    };
    let mut out = Vec::with_capacity(g.dim());
    for (j, b) in g.basis().iter().enumerate() {
        let bx = b.map(|c| Expr::constant(c.clone()));
        let ad = sigma.matmul(&bx).matmul(&sigma_inv);
        let coeffs = exact.coefficients_expr(ad.data());
        let mut terms = Vec::new();
        for (a, &gi) in pair.h_in_g().iter().enumerate() {
            if !coeffs[gi].is_zero() {
                terms.push(coeffs[gi].mul(&Expr::var(names[a].clone())));
            }
        }
        let t = &coeffs[pair.transverse()];
        if !t.is_zero() {
            terms.push(t.mul(&p_term));
        }
        let e = Expr::sum(terms.iter());
        let e = Polynomial::from_expr(&e).map_or(e, |p| p.to_expr());
        out.push((format!("mu_{}", g.algebra().label(j)), e));
    }
    debug_assert_eq!(k + 1, g.dim());
    Ok(out)
}

/// Exact brackets of the `G`-body momenta under `Π_red`, with each result
/// re-expressed through the momenta where it matches one exactly.
pub fn ambient_bracket_table(pair: &BLieGroupPair, mode: Mode) -> Result<Vec<BracketEntry>, ReductionError> {
    let red = ReducedPoisson::new(pair, mode);
    let momenta = ambient_momenta(pair, mode)?;
    let alg = pair.g_algebra();
    let mut out = Vec::new();
    for i in 0..momenta.len() {
        for j in i + 1..momenta.len() {
            let value = red.bracket(&momenta[i].1, &momenta[j].1);
            // express −ν^G_{[X_i,X_j]} in the momentum names when exact
            let predicted: Vec<Expr> = (0..alg.dim())
                .filter(|&l| !alg.constant(i, j, l).is_zero())
                .map(|l| momenta[l].1.scale(&-alg.constant(i, j, l)))
                .collect();
            let predicted = Expr::sum(predicted.iter());
            let diff = Polynomial::from_expr(&value.sub(&predicted));
            let value = match diff {
                Some(d) if d.is_zero() => {
                    let named: Vec<Expr> = (0..alg.dim())
                        .filter(|&l| !alg.constant(i, j, l).is_zero())
                        .map(|l| Expr::var(momenta[l].0.clone()).scale(&-alg.constant(i, j, l)))
                        .collect();
                    let e = Expr::sum(named.iter());
                    Polynomial::from_expr(&e).map_or(e, |p| p.to_expr())
                }
                _ => value,
            };
            out.push(BracketEntry { left: momenta[i].0.clone(), right: momenta[j].0.clone(), value });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blift::SampleSpec;

    #[test]
    fn se2_reduced_is_b_canonical() {
        let pair = BLieGroupPair::se2();
        let r = ReducedPoisson::new(&pair, Mode::B);
        let nz: Vec<_> = r.table().into_iter().filter(|e| !e.value.is_zero()).collect();
        assert_eq!(nz.len(), 1);
        assert_eq!((nz[0].left.as_str(), nz[0].right.as_str()), ("phi", "p"));
        assert_eq!(nz[0].value.to_string(), "phi");
        assert!(r.block_diagonal());
        assert!(r.tangent_to_z());
    }

    #[test]
    fn coupling_identity_on_heisenberg() {
        let pair = BLieGroupPair::heisenberg_q(1).unwrap();
        for kind in [ConnectionKind::Default, ConnectionKind::SmoothDeformed, ConnectionKind::BDeformed] {
            let conn = Connection::standard(&pair, Mode::B, kind).unwrap();
            let a = conn.action();
            let mut rng = crate::sampling::rng(1, 0);
            for x in a.sample_points(12, 5, &SampleSpec::default()) {
                let v = crate::sampling::uniform_vec(&mut rng, a.dim(), 1.0);
                let w = crate::sampling::uniform_vec(&mut rng, a.dim(), 1.0);
                assert!(conn.coupling_residual(&x, &v, &w).unwrap() < 1e-12, "{kind:?}");
                assert!(conn.psi_theta_roundtrip(&x).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn galilean_ambient_bracket() {
        let pair = BLieGroupPair::galilean();
        let table = ambient_bracket_table(&pair, Mode::B).unwrap();
        let e = table.iter().find(|e| e.left == "mu_K1" && e.right == "mu_E").unwrap();
        assert_eq!(e.value.to_string(), "-mu_P1");
    }

    #[test]
    fn invariant_oracle_matches_lie_poisson() {
        let pair = BLieGroupPair::heisenberg_q(2).unwrap();
        let a = LiftedAction::new(&pair, Mode::B);
        let names = pair.h_algebra().dual_names();
        let f = PhaseFunction::Invariant(Expr::var(names[0].clone())).compile(&a).unwrap();
        let g = PhaseFunction::Invariant(Expr::var(names[2].clone())).compile(&a).unwrap();
        let red = ReducedPoisson::new(&pair, Mode::B);
        let conn = Connection::default_for(&pair, Mode::B);
        let ks = a.sample_group(3, 1, &SampleSpec::default());
        for x in a.sample_points(6, 2, &SampleSpec::default()) {
            let up = reduced_bracket_via_invariants(&a, &f, &g, &x, &ks, 1e-9).unwrap();
            let y = conn.reduce_point(&x).unwrap();
            let down = red.bivector().bracket_at(&Expr::var(names[0].clone()), &Expr::var(names[2].clone()), &y).unwrap();
            assert!((up - down).abs() < 1e-10);
            assert!((conn.reduced_bracket(&f, &g, &x).unwrap() - up).abs() < 1e-10);
        }
    }
}
