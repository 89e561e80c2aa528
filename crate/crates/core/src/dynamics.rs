//! Hamiltonian vector fields of Poisson bivectors and fixed-step
//! integration.
//!
//! On a b-Poisson block the `∂_φ` coefficient of every Hamiltonian field
//! carries the factor `φ`, so a trajectory that starts on `Z = {φ = 0}`
//! stays there exactly: every stage of the explicit schemes adds `0·(…)` to
//! `φ`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::bcalc::PoissonBivector;
use crate::expr::{CompiledExpr, EvalError, Expr};
use crate::sampling::SampleBox;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid integration parameters: {0}")]
    Parameters(String),
    #[error("state left the chart box at t = {time}")]
    LeftChart { time: f64, state: Vec<f64> },
    #[error("expected an initial state of dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Midpoint,
}

impl Method {
    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "rk4" => Some(Method::Rk4),
            "midpoint" => Some(Method::Midpoint),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::Midpoint => "midpoint",
        }
    }
}

/// A vector field with expression coefficients on named coordinates.
#[derive(Clone, Debug)]
pub struct VectorField {
    names: Vec<String>,
    coeffs: Vec<Expr>,
    code: CompiledExpr,
}

impl VectorField {
    pub fn new(names: Vec<String>, coeffs: Vec<Expr>) -> Result<VectorField, DynamicsError> {
        for c in &coeffs {
            if let Some(v) = c.free_vars().into_iter().find(|v| !names.contains(v)) {
                return Err(DynamicsError::UnknownVariable(v));
            }
        }
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let code = CompiledExpr::new(&coeffs, &refs)?;
        Ok(VectorField { names, coeffs, code })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        Ok(self.code.eval_all(x)?)
    }
}

/// `X_H` with `X_H(F) = {F, H} = Π(dF, dH)`.
pub fn hamiltonian_vf(pi: &PoissonBivector, h: &Expr) -> Result<VectorField, DynamicsError> {
    VectorField::new(pi.names().to_vec(), pi.hamiltonian_vector(h))
}

/// Integration settings beyond the step.
#[derive(Clone, Debug, Default)]
pub struct FlowOptions {
    pub hamiltonian: Option<Expr>,
    /// `(name, expression)` pairs tracked along the trajectory.
    pub casimirs: Vec<(String, Expr)>,
    /// Index of the defining coordinate, for the sign and floor diagnostics.
    pub phi_index: Option<usize>,
    /// Integration stops with an error when the state leaves this box.
    pub bounds: Option<SampleBox>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub names: Vec<String>,
    pub dt: f64,
    pub method: Method,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub energy: Vec<f64>,
    pub casimir_names: Vec<String>,
    pub casimirs: Vec<Vec<f64>>,
    pub phi_index: Option<usize>,
}

fn step(vf: &VectorField, x: &[f64], dt: f64, method: Method) -> Result<Vec<f64>, DynamicsError> {
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(u, v)| u + s * v).collect() };
    Ok(match method {
        Method::Midpoint => {
            let k1 = vf.eval(x)?;
            let k2 = vf.eval(&axpy(x, dt / 2.0, &k1))?;
            axpy(x, dt, &k2)
        }
        Method::Rk4 => {
            let k1 = vf.eval(x)?;
            let k2 = vf.eval(&axpy(x, dt / 2.0, &k1))?;
            let k3 = vf.eval(&axpy(x, dt / 2.0, &k2))?;
            let k4 = vf.eval(&axpy(x, dt, &k3))?;
            x.iter().enumerate().map(|(i, xi)| xi + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
        }
    })
}

/// Fixed-step integration over `[0, t_end]`; the step count is
/// `round(t_end/dt)` and the last time is exactly `n·dt`.
pub fn integrate(
    vf: &VectorField,
    x0: &[f64],
    dt: f64,
    t_end: f64,
    method: Method,
    opts: &FlowOptions,
) -> Result<Trajectory, DynamicsError> {
    if !(dt > 0.0) || !(t_end >= dt) {
        return Err(DynamicsError::Parameters(format!("need dt > 0 and T >= dt (dt = {dt}, T = {t_end})")));
    }
    if x0.len() != vf.names().len() {
        return Err(DynamicsError::Dimension { expected: vf.names().len(), got: x0.len() });
    }
    let steps = (t_end / dt).round() as usize;
    let refs: Vec<&str> = vf.names().iter().map(String::as_str).collect();
    let h_code = opts.hamiltonian.as_ref().map(|h| h.compile(&refs)).transpose()?;
    let c_exprs: Vec<Expr> = opts.casimirs.iter().map(|(_, e)| e.clone()).collect();
    let c_code = CompiledExpr::new(&c_exprs, &refs)?;

    let mut traj = Trajectory {
        names: vf.names().to_vec(),
        dt,
        method,
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        energy: Vec::new(),
        casimir_names: opts.casimirs.iter().map(|(n, _)| n.clone()).collect(),
        casimirs: Vec::new(),
        phi_index: opts.phi_index,
    };
    let mut x = x0.to_vec();
    for n in 0..=steps {
        let t = n as f64 * dt;
        if let Some(b) = &opts.bounds {
            if !b.contains(&x) || x.iter().any(|v| !v.is_finite()) {
                return Err(DynamicsError::LeftChart { time: t, state: x });
            }
        }
        if let Some(h) = &h_code {
            traj.energy.push(h.eval(&x)?);
        }
        traj.casimirs.push(c_code.eval_all(&x)?);
        traj.times.push(t);
        traj.states.push(x.clone());
        if n < steps {
            x = step(vf, &x, dt, method)?;
        }
    }
    Ok(traj)
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectories have at least one state")
    }

    /// `max_t |H(x_t) − H(x_0)|`.
    pub fn energy_drift(&self) -> Option<f64> {
        let h0 = *self.energy.first()?;
        Some(self.energy.iter().map(|h| (h - h0).abs()).fold(0.0, f64::max))
    }

    pub fn casimir_drifts(&self) -> Vec<(String, f64)> {
        self.casimir_names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let c0 = self.casimirs[0][i];
                (n.clone(), self.casimirs.iter().map(|c| (c[i] - c0).abs()).fold(0.0, f64::max))
            })
            .collect()
    }

    /// `min_t |φ(x_t)|`.
    pub fn phi_floor(&self) -> Option<f64> {
        let i = self.phi_index?;
        Some(self.states.iter().map(|s| s[i].abs()).fold(f64::INFINITY, f64::min))
    }

    /// True when `φ` never changes sign (and stays exactly `0` if it starts
    /// there).
    pub fn phi_sign_constant(&self) -> Option<bool> {
        let i = self.phi_index?;
        let s0 = self.states[0][i];
        Some(if s0 == 0.0 {
            self.states.iter().all(|s| s[i] == 0.0)
        } else {
            self.states.iter().all(|s| s[i] != 0.0 && s[i].signum() == s0.signum())
        })
    }

    /// CSV with header `t,<coords>,H,C[<casimir>]...`; floats use Rust's
    /// shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        if !self.energy.is_empty() {
            out.push_str(",H");
        }
        for n in &self.casimir_names {
            let _ = write!(out, ",C[{n}]");
        }
        out.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            let _ = write!(out, "{t:?}");
            for v in &self.states[i] {
                let _ = write!(out, ",{v:?}");
            }
            if let Some(h) = self.energy.get(i) {
                let _ = write!(out, ",{h:?}");
            }
            for c in &self.casimirs[i] {
                let _ = write!(out, ",{c:?}");
            }
            out.push('\n');
        }
        out
    }
}

/// Diagnostics of a trajectory of a reduced b-Poisson system.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafReport {
    pub steps: usize,
    pub phi_sign_constant: Option<bool>,
    pub phi_floor: Option<f64>,
    pub energy_drift: Option<f64>,
    pub casimir_drifts: Vec<(String, f64)>,
}

impl LeafReport {
    pub fn lines(&self) -> Vec<(String, String)> {
        let mut out = vec![("steps".to_string(), self.steps.to_string())];
        if let Some(s) = self.phi_sign_constant {
            out.push(("phi_sign_constant".into(), s.to_string()));
        }
        if let Some(f) = self.phi_floor {
            out.push(("phi_floor".into(), format!("{f:.6e}")));
        }
        if let Some(e) = self.energy_drift {
            out.push(("energy_drift".into(), format!("{e:.3e}")));
        }
        for (n, d) in &self.casimir_drifts {
            out.push((format!("casimir_drift[{n}]"), format!("{d:.3e}")));
        }
        out
    }
}

pub fn leaf_report(traj: &Trajectory) -> LeafReport {
    LeafReport {
        steps: traj.states.len() - 1,
        phi_sign_constant: traj.phi_sign_constant(),
        phi_floor: traj.phi_floor(),
        energy_drift: traj.energy_drift(),
        casimir_drifts: traj.casimir_drifts(),
    }
}

/// Casimir candidates of a bivector, kept only when `{C, x_i} = 0` holds
/// exactly for every coordinate: the linear Casimirs, plus the pairwise dot
/// products of coordinate triples `<stem>1, <stem>2, <stem>3` (the rotation
/// invariants of the Galilean block, e.g. `|μ_P|²` and `μ_K·μ_P`).
pub fn casimir_candidates(pi: &PoissonBivector) -> Vec<(String, Expr)> {
    let mut out = linear_casimirs(pi);
    let names = pi.names();
    let stems: Vec<&str> = names
        .iter()
        .filter_map(|n| n.strip_suffix('1'))
        .filter(|s| ["2", "3"].iter().all(|d| names.contains(&format!("{s}{d}"))))
        .collect();
    for (a, sa) in stems.iter().enumerate() {
        for sb in &stems[a..] {
            let e = Expr::sum(
                (1..=3).map(|d| Expr::var(format!("{sa}{d}")).mul(&Expr::var(format!("{sb}{d}")))).collect::<Vec<_>>().iter(),
            );
            let casimir = names
                .iter()
                .all(|n| crate::expr::poly_equal(&pi.bracket_expr(&e, &Expr::var(n.clone())), &Expr::zero()) == Some(true));
            if casimir {
                out.push((format!("{sa}.{sb}"), e));
            }
        }
    }
    out
}

/// Coordinate functions `μ_i` that Poisson-commute with every coordinate:
/// the linear Casimirs of a bivector (for a Lie-Poisson block, the duals of
/// central elements).
pub fn linear_casimirs(pi: &PoissonBivector) -> Vec<(String, Expr)> {
    (0..pi.dim())
        .filter(|&i| (0..pi.dim()).all(|j| pi.get(i, j).is_zero()))
        .map(|i| (pi.names()[i].clone(), Expr::var(pi.names()[i].clone())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b_line() -> PoissonBivector {
        let mut pi = PoissonBivector::new(vec!["phi".into(), "p".into()]);
        pi.set(0, 1, Expr::var("phi"));
        pi
    }

    #[test]
    fn field_of_p_and_p_squared() {
        let pi = b_line();
        let x = hamiltonian_vf(&pi, &Expr::var("p")).unwrap();
        assert_eq!(x.coeffs()[0].to_string(), "phi");
        assert!(x.coeffs()[1].is_zero());
        let x = hamiltonian_vf(&pi, &Expr::parse("p^2/2").unwrap()).unwrap();
        assert_eq!(x.eval(&[0.5, 3.0]).unwrap(), vec![1.5, 0.0]);
        let x = hamiltonian_vf(&pi, &Expr::int(4)).unwrap();
        assert!(x.coeffs().iter().all(Expr::is_zero));
    }

    #[test]
    fn exponential_growth_and_z_invariance() {
        let pi = b_line();
        let vf = hamiltonian_vf(&pi, &Expr::var("p")).unwrap();
        let opts = FlowOptions { phi_index: Some(0), hamiltonian: Some(Expr::var("p")), ..Default::default() };
        let t = integrate(&vf, &[1.0, 0.3], 1e-3, 1.0, Method::Rk4, &opts).unwrap();
        assert!((t.last()[0] - std::f64::consts::E).abs() < 1e-6);
        assert_eq!(t.energy_drift(), Some(0.0));
        let t = integrate(&vf, &[0.0, 0.3], 1e-3, 1.0, Method::Rk4, &opts).unwrap();
        assert!(t.states.iter().all(|s| s[0] == 0.0));
        assert_eq!(t.phi_sign_constant(), Some(true));
    }

    #[test]
    fn galilean_casimirs() {
        let pair = crate::lie::BLieGroupPair::galilean();
        let red = crate::reduction::ReducedPoisson::new(&pair, crate::blift::Mode::B);
        let names: Vec<String> = casimir_candidates(red.bivector()).into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, vec!["mu_K.mu_K", "mu_K.mu_P", "mu_P.mu_P"]);
        let pair = crate::lie::BLieGroupPair::heisenberg_q(2).unwrap();
        let red = crate::reduction::ReducedPoisson::new(&pair, crate::blift::Mode::B);
        let names: Vec<String> = casimir_candidates(red.bivector()).into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, vec!["mu_Y1", "mu_Z"]);
    }

    #[test]
    fn csv_header_and_rows() {
        let pi = b_line();
        let vf = hamiltonian_vf(&pi, &Expr::var("p")).unwrap();
        let opts = FlowOptions { hamiltonian: Some(Expr::var("p")), ..Default::default() };
        let t = integrate(&vf, &[1.0, 0.5], 0.5, 1.0, Method::Midpoint, &opts).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,phi,p,H"));
        assert_eq!(lines.next(), Some("0.0,1.0,0.5,0.5"));
        assert_eq!(csv.lines().count(), 4);
    }
}
