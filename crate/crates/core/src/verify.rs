//! The full verification suite for a b-Lie group pair.
//!
//! Every check reduces a residual over seeded samples to its maximum and
//! compares it with a tolerance. Exact checks (tolerance `0`) count
//! violations instead. The report is plain `key: value` text grouped in
//! `[section]` blocks and is byte-identical for identical inputs.

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use thiserror::Error;

use crate::bcalc::{bdarboux_model, invert_to_poisson, is_b_symplectic, BChart, BForm, PoissonBivector, SymplecticOptions};
use crate::blift::{canonical_frame_matrix, LiftedAction, Mode, SampleSpec};
use crate::dynamics::{hamiltonian_vf, integrate, FlowOptions, Method};
use crate::expr::Expr;
use crate::lie::{structure_constants_from_matrices, BLieGroupPair, LieAlgebra};
use crate::reduction::{
    reduced_bracket_via_invariants, reduced_names, Connection, ConnectionKind, PhaseFunction, ReducedPoisson,
};
use crate::sampling::{box_points, rng, uniform_vec, SampleBox, DEFAULT_SEED};
use crate::scalar::rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("invalid verification options: {0}")]
    Options(String),
}

/// A user-supplied deformation `Ad_h ξ ⊗ c(φ) dφ` (or `dφ/φ` with `b_flag`).
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationSpec {
    pub xi: Vec<f64>,
    pub c: Expr,
    pub b_flag: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Base sample count; equivariance checks use half of it.
    pub samples: usize,
    /// Replaces every numerical tolerance; exact checks stay exact.
    pub tolerance: Option<f64>,
    /// Declared structure constants of `𝔤` checked against the matrix model.
    /// `None` uses the model's own constants.
    pub declared: Option<LieAlgebra<BigRational>>,
    /// Extra connection verified alongside the standard family.
    pub deformation: Option<DeformationSpec>,
    /// Include the trajectory checks.
    pub dynamics: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: DEFAULT_SEED, samples: 200, tolerance: None, declared: None, deformation: None, dynamics: true }
    }
}

/// One line of the report.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub passed: bool,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub name: String,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub group: String,
    pub seed: u64,
    pub sections: Vec<Section>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.sections.iter().all(|s| s.checks.iter().all(|c| c.passed))
    }

    /// `"<section>: <check>"` for every failed check, in report order.
    pub fn failures(&self) -> Vec<String> {
        self.sections
            .iter()
            .flat_map(|s| s.checks.iter().filter(|c| !c.passed).map(move |c| format!("{}: {}", s.name, c.name)))
            .collect()
    }

    pub fn check(&self, section: &str, name: &str) -> Option<&Check> {
        self.sections.iter().find(|s| s.name == section)?.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "group: {}", self.group);
        let _ = writeln!(out, "seed: {}", self.seed);
        for s in &self.sections {
            let _ = writeln!(out, "\n[{}]", s.name);
            for c in &s.checks {
                let _ = write!(
                    out,
                    "{}: residual={:.3e} tolerance={:.1e} samples={} status={}",
                    c.name,
                    c.residual,
                    c.tolerance,
                    c.samples,
                    if c.passed { "pass" } else { "FAIL" }
                );
                if let Some(n) = &c.note {
                    let _ = write!(out, " note=\"{n}\"");
                }
                out.push('\n');
            }
        }
        let checks: usize = self.sections.iter().map(|s| s.checks.len()).sum();
        let failures = self.failures();
        let _ = writeln!(out, "\n[summary]");
        let _ = writeln!(out, "checks: {checks}");
        let _ = writeln!(out, "failed: {}", failures.len());
        for f in &failures {
            let _ = writeln!(out, "failed_check: {f}");
        }
        let _ = writeln!(out, "status: {}", if failures.is_empty() { "pass" } else { "fail" });
        out
    }
}

#[derive(Clone, Copy)]
enum Tol {
    Exact,
    Num(f64),
}

struct Suite<'o> {
    opts: &'o VerifyOptions,
    sections: Vec<Section>,
}

impl Suite<'_> {
    fn section(&mut self, name: impl Into<String>) {
        self.sections.push(Section { name: name.into(), checks: Vec::new() });
    }

    fn record(&mut self, name: &str, tol: Tol, samples: usize, result: Result<f64, String>) {
        let tolerance = match tol {
            Tol::Exact => 0.0,
            Tol::Num(t) => self.opts.tolerance.unwrap_or(t),
        };
        let (residual, note) = match result {
            Ok(r) => (r, None),
            Err(e) => (f64::INFINITY, Some(e)),
        };
        // NaN residuals fail
        let passed = residual <= tolerance;
        let check = Check { name: name.to_string(), residual, tolerance, samples, passed, note };
        self.sections.last_mut().expect("section opened").checks.push(check);
    }

    fn note(&mut self, text: String) {
        if let Some(c) = self.sections.last_mut().and_then(|s| s.checks.last_mut()) {
            c.note = Some(text);
        }
    }
}

/// Maximum of `f` over `items`, or the first error.
fn max_over<I, T, E: std::fmt::Display>(items: I, mut f: impl FnMut(T) -> Result<f64, E>) -> Result<f64, String>
where
    I: IntoIterator<Item = T>,
{
    let mut worst: f64 = 0.0;
    for it in items {
        let r = f(it).map_err(|e| e.to_string())?;
        if r.is_nan() {
            return Ok(f64::NAN);
        }
        worst = worst.max(r);
    }
    Ok(worst)
}

/// A random polynomial of degree `≤ 2` without constant term and with
/// coefficients in `{−0.2, −0.15, …, 0.2}`.
pub fn random_quadratic(names: &[String], rng: &mut impl Rng) -> Expr {
    let mut coef = || rational(rng.gen_range(-4..=4), 20);
    let mut terms = Vec::new();
    for (i, a) in names.iter().enumerate() {
        let c = coef();
        if !c.is_zero() {
            terms.push(Expr::var(a.clone()).scale(&c));
        }
        for b in &names[i..] {
            let c = coef();
            if !c.is_zero() {
                terms.push(Expr::var(a.clone()).mul(&Expr::var(b.clone())).scale(&c));
            }
        }
    }
    if terms.is_empty() {
        return Expr::var(names[0].clone());
    }
    Expr::sum(terms.iter())
}

/// A random quadratic `Σ a_i x_i + Σ A_ij x_i x_j` with `A` positive
/// definite (diagonal in `[0.05, 0.2]`, strictly diagonally dominant), so
/// that level sets are compact and Hamiltonian flows stay bounded.
pub fn random_definite_quadratic(names: &[String], rng: &mut impl Rng) -> Expr {
    let n = names.len();
    let mut terms = Vec::new();
    for (i, a) in names.iter().enumerate() {
        let x = Expr::var(a.clone());
        let lin = rational(rng.gen_range(-4..=4), 20);
        if !lin.is_zero() {
            terms.push(x.scale(&lin));
        }
        terms.push(x.powi(2).scale(&rational(rng.gen_range(1..=4), 20)));
        for b in &names[i + 1..] {
            // |A_ij| = 1/(40 n) keeps every row sum below the diagonal
            let c = rational(rng.gen_range(-1..=1), 20 * n as i64);
            if !c.is_zero() {
                terms.push(x.mul(&Expr::var(b.clone())).scale(&c));
            }
        }
    }
    Expr::sum(terms.iter())
}

/// A random b-form of the given degree with up to `terms` polynomial
/// coefficients in a few chart variables.
pub fn random_bform(chart: &BChart, degree: usize, terms: usize, rng: &mut impl Rng) -> BForm {
    let n = chart.dim();
    let vars: Vec<String> = (0..n.min(4)).map(|_| chart.names()[rng.gen_range(0..n)].clone()).collect();
    let mut out = BForm::zero(n, degree);
    for _ in 0..terms {
        let mut idx: Vec<usize> = Vec::with_capacity(degree);
        while idx.len() < degree {
            let i = rng.gen_range(0..n);
            if !idx.contains(&i) {
                idx.push(i);
            }
        }
        out.add_term(&idx, random_quadratic(&vars, rng));
    }
    out
}

fn lie_section(suite: &mut Suite, pair: &BLieGroupPair, declared: &LieAlgebra<BigRational>) {
    suite.section("lie");
    let n = declared.dim();
    suite.record("antisymmetry", Tol::Exact, n * n * n, Ok(declared.antisymmetry_defect()));
    let (bad, _) = declared.jacobi_defects(0.0);
    suite.record("Jacobi", Tol::Exact, n * n * n, Ok(bad.len() as f64));
    if let Some(&(i, j, k, _)) = bad.first() {
        suite.note(format!("first failing triple ({}, {}, {})", declared.label(i), declared.label(j), declared.label(k)));
    }

    let oracle = structure_constants_from_matrices(pair.g().basis(), pair.g_algebra().labels());
    let mismatches = oracle.map_err(|e| e.to_string()).map(|o| {
        let idx = |l: &str| declared.index_of(l);
        let mut count = 0usize;
        for i in 0..o.dim() {
            for j in 0..o.dim() {
                for k in 0..o.dim() {
                    let same = match (idx(o.label(i)), idx(o.label(j)), idx(o.label(k))) {
                        (Some(a), Some(b), Some(c)) => o.constant(i, j, k) == declared.constant(a, b, c),
                        _ => false,
                    };
                    count += usize::from(!same);
                }
            }
        }
        if o.dim() != n {
            count += 1;
        }
        count as f64
    });
    suite.record("commutator oracle", Tol::Exact, n * n * n, mismatches);

    let h_closed =
        declared.subalgebra(&pair.h_algebra().labels().iter().filter_map(|l| declared.index_of(l)).collect::<Vec<_>>());
    suite.record("subalgebra closure", Tol::Exact, 1, Ok(if h_closed.is_ok() { 0.0 } else { 1.0 }));

    let names = declared.dual_names();
    let mut lp = PoissonBivector::new(names);
    for i in 0..n {
        for j in i + 1..n {
            lp.set(i, j, declared.lie_poisson_coefficient(i, j));
        }
    }
    let pts = box_points(&SampleBox::cube(n, 1.0), 50, suite.opts.seed);
    suite.record("Lie-Poisson Jacobiator", Tol::Num(1e-9), pts.len(), max_over(&pts, |x| lp.jacobi_tensor_max_at(x)));
}

fn bcalc_section(suite: &mut Suite, action: &LiftedAction, spec: &SampleSpec) {
    suite.section("bcalc");
    let seed = suite.opts.seed;
    let sym = SymplecticOptions { seed, ..SymplecticOptions::default() };
    let darboux = max_over(1..=3, |n| {
        let (c, w) = bdarboux_model(n);
        is_b_symplectic(&w, &c, &sym).map(|r| {
            let off = (r.min_abs_pfaffian - 1.0).abs().max((r.max_abs_pfaffian - 1.0).abs());
            if r.verdict() {
                off
            } else {
                f64::INFINITY
            }
        })
    });
    suite.record("b-Darboux models", Tol::Exact, 3 * sym.samples, darboux);

    let cot = action.cotangent_chart(spec);
    let omega = cot.canonical_bsymplectic();
    let report = is_b_symplectic(&omega, cot.chart(), &sym);
    suite.record(
        "canonical form b-symplectic",
        Tol::Exact,
        sym.samples,
        report.map(|r| if r.verdict() && r.closed_exactly == Some(true) { 0.0 } else { 1.0 }).map_err(|e| e.to_string()),
    );
    let normal = omega.frame_matrix_expr().map(|m| {
        let target = canonical_frame_matrix(cot.base_dim());
        let mut bad = 0usize;
        for (e, t) in m.data().iter().zip(target.data()) {
            let ok = e.as_const().is_some_and(|c| crate::scalar::rational_to_f64(c) == *t);
            bad += usize::from(!ok);
        }
        bad as f64
    });
    suite.record("canonical normal form", Tol::Exact, 1, normal.map_err(|e| e.to_string()));

    let pi = invert_to_poisson(&omega, cot.chart());
    let base = cot.base_dim();
    let poisson = pi.map_err(|e| e.to_string()).map(|pi| {
        let expect = Expr::var(action.pair().phi_name());
        let phi = action.phi_index();
        let mut bad = 0usize;
        for i in 0..2 * base {
            for j in i + 1..2 * base {
                let want = if i == phi && j == base + phi {
                    expect.clone()
                } else if j == base + i {
                    Expr::one()
                } else {
                    Expr::zero()
                };
                bad += usize::from(crate::expr::poly_equal(&pi.get(i, j), &want) != Some(true));
            }
        }
        bad as f64
    });
    suite.record("Poisson inversion", Tol::Exact, 1, poisson);

    let mut r = rng(seed, 11);
    let forms = (suite.opts.samples / 10).max(1);
    let dd = max_over(0..forms, |i| -> Result<f64, String> {
        let w = random_bform(cot.chart(), 1 + i % 2, 3, &mut r);
        Ok(match w.b_d(cot.chart()).b_d(cot.chart()).is_exactly_zero() {
            Some(true) => 0.0,
            _ => 1.0,
        })
    });
    suite.record("d∘d", Tol::Exact, forms, dd);
}

fn blift_section(suite: &mut Suite, action: &LiftedAction, spec: &SampleSpec) {
    suite.section("blift");
    let seed = suite.opts.seed;
    let n = suite.opts.samples / 2;
    let pts = action.sample_points(n, seed, spec);
    let ks = action.sample_group(n, seed, spec);
    let k = action.k();
    let mut r = rng(seed, 21);
    let xis: Vec<Vec<f64>> = (0..n).map(|_| uniform_vec(&mut r, k, 1.0)).collect();
    let vs: Vec<Vec<f64>> = (0..n).map(|_| uniform_vec(&mut r, action.dim(), 1.0)).collect();
    let idx: Vec<usize> = (0..n).collect();
    suite.record("moment map", Tol::Num(1e-8), n, max_over(&idx, |&i| action.hamilton_residual(&pts[i], &xis[i])));
    suite.record("moment equivariance", Tol::Num(1e-9), n, max_over(&idx, |&i| action.equivariance_residual(&ks[i], &pts[i])));
    suite.record(
        "action law",
        Tol::Num(1e-9),
        n,
        max_over(&idx, |&i| action.action_law_residual(&ks[i], &ks[(i + 1) % n], &pts[i])),
    );
    suite.record(
        "pairing preservation",
        Tol::Num(1e-9),
        n,
        max_over(&idx, |&i| action.pairing_residual(&ks[i], &pts[i], &vs[i])),
    );
    suite.record(
        "Liouville invariance",
        Tol::Num(1e-9),
        n,
        max_over(&idx, |&i| action.liouville_invariance_residual(&ks[i], &pts[i])),
    );
    suite.record("form invariance", Tol::Num(1e-9), n, max_over(&idx, |&i| action.omega_preservation_residual(&ks[i], &pts[i])));
}

fn connection_sections(suite: &mut Suite, conn: &Connection, label: &str, spec: &SampleSpec) {
    let seed = suite.opts.seed;
    let a = conn.action();
    let k = a.k();
    let n_eq = suite.opts.samples / 2;
    let n_cp = suite.opts.samples;
    let pts = a.sample_points(n_cp, seed, spec);
    let ks = a.sample_group(n_eq, seed, spec);
    let mut r = rng(seed, 31);
    let xis: Vec<Vec<f64>> = (0..n_cp).map(|_| uniform_vec(&mut r, k, 1.0)).collect();
    let base: Vec<Vec<f64>> = (0..n_cp).map(|_| uniform_vec(&mut r, k + 1, 1.0)).collect();
    let vs: Vec<Vec<f64>> = (0..n_cp).map(|_| uniform_vec(&mut r, a.dim(), 1.0)).collect();
    let ws: Vec<Vec<f64>> = (0..n_cp).map(|_| uniform_vec(&mut r, a.dim(), 1.0)).collect();
    let eq: Vec<usize> = (0..n_eq).collect();
    let all: Vec<usize> = (0..n_cp).collect();
    let qp = |i: usize| (&pts[i][..k], pts[i][k]);

    suite.section(format!("connection ({label})"));
    suite.record(
        "reproducing",
        Tol::Num(1e-10),
        n_eq,
        max_over(&eq, |&i| {
            let (q, phi) = qp(i);
            conn.reproducing_residual(q, phi, &xis[i])
        }),
    );
    suite.record(
        "equivariance",
        Tol::Num(1e-10),
        n_eq,
        max_over(&eq, |&i| {
            let (q, phi) = qp(i);
            conn.equivariance_residual(&ks[i], q, phi, &base[i])
        }),
    );
    suite.record(
        "projector idempotence",
        Tol::Num(1e-10),
        n_eq,
        max_over(&eq, |&i| {
            let (q, phi) = qp(i);
            conn.idempotence_residual(q, phi, &base[i])
        }),
    );

    suite.section(format!("minimal coupling ({label})"));
    suite.record(
        "tangent splitting round trip",
        Tol::Num(1e-12),
        n_cp,
        max_over(&all, |&i| {
            let (q, phi) = qp(i);
            conn.phi_theta_roundtrip(q, phi, &base[i])
        }),
    );
    suite.record(
        "tangent splitting equivariance",
        Tol::Num(1e-9),
        n_eq,
        max_over(&eq, |&i| {
            let (q, phi) = qp(i);
            conn.phi_theta_equivariance(&ks[i], q, phi, &base[i])
        }),
    );
    suite.record("cotangent splitting round trip", Tol::Num(1e-12), n_cp, max_over(&all, |&i| conn.psi_theta_roundtrip(&pts[i])));
    suite.record(
        "cotangent splitting equivariance",
        Tol::Num(1e-9),
        n_eq,
        max_over(&eq, |&i| conn.psi_theta_equivariance(&ks[i], &pts[i])),
    );
    suite.record(
        "annihilator projection invariance",
        Tol::Num(1e-12),
        n_eq,
        max_over(&eq, |&i| conn.annihilator_invariance(&ks[i], &pts[i])),
    );
    suite.record("coupling identity", Tol::Num(1e-8), n_cp, max_over(&all, |&i| conn.coupling_residual(&pts[i], &vs[i], &ws[i])));
    let on_z = pts.iter().filter(|x| x[k] == 0.0).count();
    suite.note(format!("{on_z} samples on Z"));
}

fn reduction_section(suite: &mut Suite, pair: &BLieGroupPair, conns: &[Connection], spec: &SampleSpec) {
    suite.section("reduction");
    let seed = suite.opts.seed;
    let red = ReducedPoisson::new(pair, Mode::B);
    let default = Connection::default_for(pair, Mode::B);
    let a = default.action();
    let n = suite.opts.samples / 4;
    let pts = a.sample_points(n.max(1), seed ^ 0x51, spec);

    let reduced: Result<Vec<Vec<f64>>, String> = pts.iter().map(|x| default.reduce_point(x).map_err(|e| e.to_string())).collect();
    let jac = reduced.and_then(|ys| max_over(&ys, |y| red.bivector().jacobi_tensor_max_at(y)));
    suite.record("reduced Jacobiator", Tol::Num(1e-8), pts.len(), jac);
    suite.record("block structure", Tol::Exact, 1, Ok(if red.block_diagonal() { 0.0 } else { 1.0 }));
    suite.record("tangent to Z", Tol::Exact, 1, Ok(if red.tangent_to_z() { 0.0 } else { 1.0 }));
    suite.record(
        "pushforward of canonical structure",
        Tol::Num(1e-8),
        pts.len(),
        max_over(&pts, |x| red.pushforward_residual(&default, x)),
    );

    let names = reduced_names(pair);
    let mut r = rng(seed, 41);
    let ks = a.sample_group(3, seed, spec);
    let pairs = n.max(1);
    let independence = max_over(0..pairs, |i| -> Result<f64, String> {
        let f = random_quadratic(&names, &mut r);
        let g = random_quadratic(&names, &mut r);
        let x = &pts[i % pts.len()];
        let cf = PhaseFunction::Invariant(f.clone()).compile(a).map_err(|e| e.to_string())?;
        let cg = PhaseFunction::Invariant(g.clone()).compile(a).map_err(|e| e.to_string())?;
        let oracle = reduced_bracket_via_invariants(a, &cf, &cg, x, &ks, 1e-8).map_err(|e| e.to_string())?;
        let y = default.reduce_point(x).map_err(|e| e.to_string())?;
        let local = red.bivector().bracket_at(&f, &g, &y).map_err(|e| e.to_string())?;
        let mut worst = (local - oracle).abs();
        for c in conns {
            let v = c.reduced_bracket(&cf, &cg, x).map_err(|e| e.to_string())?;
            worst = worst.max((v - oracle).abs());
        }
        Ok(worst)
    });
    suite.record("connection independence", Tol::Num(1e-8), pairs, independence);
    suite.note(format!("{} connections against the invariant-function oracle", conns.len()));
}

fn dynamics_section(suite: &mut Suite, pair: &BLieGroupPair) {
    suite.section("dynamics");
    let red = ReducedPoisson::new(pair, Mode::B);
    let names = red.names().to_vec();
    let k = pair.dim_h();
    let phi = k;
    let h = Expr::var("p");
    let opts = |h: &Expr| FlowOptions { hamiltonian: Some(h.clone()), phi_index: Some(phi), ..FlowOptions::default() };

    let growth = hamiltonian_vf(red.bivector(), &h).and_then(|vf| {
        let mut x0 = vec![0.1; names.len()];
        x0[phi] = 1.0;
        integrate(&vf, &x0, 1e-3, 1.0, Method::Rk4, &opts(&h))
    });
    suite.record(
        "flow of p reaches e",
        Tol::Num(1e-6),
        1000,
        growth.as_ref().map(|t| (t.last()[phi] - std::f64::consts::E).abs()).map_err(|e| e.to_string()),
    );
    suite.record(
        "energy drift of p",
        Tol::Num(1e-9),
        1000,
        growth.map(|t| t.energy_drift().unwrap_or(0.0)).map_err(|e| e.to_string()),
    );

    let mut r = rng(suite.opts.seed, 51);
    let trials = 3;
    let mut z_bad = 0usize;
    let mut sign_bad = 0usize;
    let mut drift: Result<f64, String> = Ok(0.0);
    for i in 0..trials {
        let hq = random_definite_quadratic(&names, &mut r);
        let mut x0 = uniform_vec(&mut r, names.len(), 0.5);
        x0[phi] = if i == 0 { 0.0 } else { 0.05 + 0.45 * r.gen::<f64>() };
        let run = hamiltonian_vf(red.bivector(), &hq).and_then(|vf| integrate(&vf, &x0, 1e-3, 10.0, Method::Rk4, &opts(&hq)));
        match run {
            Ok(t) => {
                if i == 0 {
                    z_bad += usize::from(t.states.iter().any(|s| s[phi] != 0.0));
                }
                sign_bad += usize::from(t.phi_sign_constant() != Some(true));
                let h0 = t.energy[0].abs();
                if let Ok(d) = &mut drift {
                    *d = d.max(t.energy_drift().unwrap_or(0.0) / (1.0 + h0));
                }
            }
            Err(e) => drift = Err(e.to_string()),
        }
    }
    suite.record("Z invariance", Tol::Exact, 1, Ok(z_bad as f64));
    suite.record("no crossing of Z", Tol::Exact, trials, Ok(sign_bad as f64));
    suite.record("relative energy drift", Tol::Num(1e-6), trials, drift);
}

/// Runs every section for `pair`. Besides b-mode, the default and
/// smooth-deformed connections are also checked in smooth mode.
pub fn run(pair: &BLieGroupPair, opts: &VerifyOptions) -> Result<Report, VerifyError> {
    if opts.samples < 4 {
        return Err(VerifyError::Options(format!("need at least 4 samples, got {}", opts.samples)));
    }
    if let Some(t) = opts.tolerance {
        if !(t > 0.0) {
            return Err(VerifyError::Options(format!("tolerance must be positive, got {t}")));
        }
    }
    let spec = SampleSpec::default();
    let mut suite = Suite { opts, sections: Vec::new() };
    let declared = opts.declared.clone().unwrap_or_else(|| pair.g_algebra().clone());
    lie_section(&mut suite, pair, &declared);

    let action = LiftedAction::new(pair, Mode::B);
    bcalc_section(&mut suite, &action, &spec);
    blift_section(&mut suite, &action, &spec);

    let mut conns: Vec<(String, Connection)> = Vec::new();
    for kind in [ConnectionKind::Default, ConnectionKind::SmoothDeformed, ConnectionKind::BDeformed] {
        match Connection::standard(pair, Mode::B, kind) {
            Ok(c) => conns.push((kind.name().to_string(), c)),
            Err(e) => {
                suite.section(format!("connection ({})", kind.name()));
                suite.record("construction", Tol::Exact, 0, Err(e.to_string()));
            }
        }
    }
    if let Some(d) = &opts.deformation {
        match Connection::deformed(pair, Mode::B, &d.xi, &d.c, d.b_flag) {
            Ok(c) => conns.push(("configured".to_string(), c)),
            Err(e) => {
                suite.section("connection (configured)");
                suite.record("construction", Tol::Exact, 0, Err(e.to_string()));
            }
        }
    }
    for (label, c) in &conns {
        connection_sections(&mut suite, c, label, &spec);
    }
    let only: Vec<Connection> = conns.into_iter().map(|(_, c)| c).collect();
    reduction_section(&mut suite, pair, &only, &spec);

    for kind in [ConnectionKind::Default, ConnectionKind::SmoothDeformed] {
        if let Ok(c) = Connection::standard(pair, Mode::Smooth, kind) {
            connection_sections(&mut suite, &c, &format!("classical, {}", kind.name()), &spec);
        }
    }
    if opts.dynamics {
        dynamics_section(&mut suite, pair);
    }
    Ok(Report { group: pair.name().to_string(), seed: opts.seed, sections: suite.sections })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::declared_algebra;

    fn quick() -> VerifyOptions {
        VerifyOptions { samples: 16, ..VerifyOptions::default() }
    }

    #[test]
    fn se2_passes() {
        let pair = BLieGroupPair::se2();
        let opts = VerifyOptions { declared: Some(declared_algebra("se2", None).unwrap()), ..quick() };
        let r = run(&pair, &opts).unwrap();
        assert!(r.passed(), "{}", r.render());
    }

    #[test]
    fn corrupted_constant_names_jacobi() {
        let pair = BLieGroupPair::se2();
        let declared = declared_algebra("se2", None).unwrap().with_brackets(&["[P1,P2] = J + P1".into()]).unwrap();
        let opts = VerifyOptions { declared: Some(declared), dynamics: false, ..quick() };
        let r = run(&pair, &opts).unwrap();
        assert!(!r.passed());
        assert_eq!(r.failures()[0], "lie: Jacobi");
        assert!(r.render().contains("failed_check: lie: Jacobi"));
    }

    #[test]
    fn report_is_deterministic() {
        let pair = BLieGroupPair::heisenberg_q(1).unwrap();
        let a = run(&pair, &quick()).unwrap().render();
        let b = run(&pair, &quick()).unwrap().render();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_options() {
        let pair = BLieGroupPair::se2();
        assert!(run(&pair, &VerifyOptions { samples: 1, ..quick() }).is_err());
        assert!(run(&pair, &VerifyOptions { tolerance: Some(0.0), ..quick() }).is_err());
    }
}
