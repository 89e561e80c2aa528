//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use blie::bcalc::{BChart, BForm, BFunction};
use blie::blift::Mode;
use blie::dynamics::{hamiltonian_vf, integrate, FlowOptions, Method};
use blie::lie::{declared_algebra, lie_poisson, BLieGroupPair};
use blie::reduction::ReducedPoisson;
use blie::sampling::{rng, uniform_vec};
use blie::verify::{self, random_bform, random_definite_quadratic, Check, Report, VerifyOptions};
use blie::{Expr, Rational};

type Outcome = Result<String, String>;

struct Reports {
    se2: Report,
    galilean: Report,
    heisenberg: Report,
}

impl Reports {
    fn all(&self) -> [&Report; 3] {
        [&self.se2, &self.galilean, &self.heisenberg]
    }
}

fn report(pair: &BLieGroupPair, declared: (&str, Option<usize>)) -> Report {
    let opts = VerifyOptions { declared: Some(declared_algebra(declared.0, declared.1).unwrap()), ..VerifyOptions::default() };
    verify::run(pair, &opts).expect("valid options")
}

/// Finds `section: name` and requires it passed with the given bounds.
fn expect(r: &Report, section: &str, name: &str, tol: f64, min_samples: usize) -> Result<f64, String> {
    let c: &Check = r.check(section, name).ok_or_else(|| format!("{}: no check {section}: {name}", r.group))?;
    if !c.passed || c.residual > tol || c.samples < min_samples {
        return Err(format!(
            "{}: {section}: {name} residual={:.3e} tolerance={tol:.1e} samples={} passed={}",
            r.group, c.residual, c.samples, c.passed
        ));
    }
    Ok(c.residual)
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn blie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blie")).args(args).env_remove(blie_cli::OUT_DIR_ENV).output().expect("run blie")
}

fn config(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn reduced_se2() -> Outcome {
    let out = blie(&["reduce", "--config", &config("se2.toml")]);
    if !out.status.success() {
        return Err(format!("reduce exited with {:?}", out.status.code()));
    }
    let csv = String::from_utf8_lossy(&out.stdout).into_owned();
    let mut lines = csv.lines();
    if lines.next() != Some("left,right,value") {
        return Err("unexpected CSV header".into());
    }
    let nonzero: Vec<&str> = lines.filter(|l| !l.ends_with(",0")).collect();
    if nonzero != ["phi,p,phi"] {
        return Err(format!("nonzero rows {nonzero:?}"));
    }
    let red = ReducedPoisson::new(&BLieGroupPair::se2(), Mode::B);
    let pi = red.bivector();
    let (phi, p) = (pi.index_of("phi").unwrap(), pi.index_of("p").unwrap());
    if pi.get(phi, p) != Expr::var("phi") || pi.nonzero_entries().count() != 1 {
        return Err("symbolic coefficient differs from phi".into());
    }
    Ok("{phi,p} = phi, every other coefficient 0".into())
}

fn coupling(reports: &Reports) -> Outcome {
    let mut worst: f64 = 0.0;
    for r in reports.all() {
        for label in ["default", "smooth-deformed", "b-deformed"] {
            let section = format!("minimal coupling ({label})");
            worst = worst.max(expect(r, &section, "coupling identity", 1e-8, 200)?);
            let on_z = r.check(&section, "coupling identity").and_then(|c| c.note.clone()).unwrap_or_default();
            if on_z.starts_with("0 ") || on_z.is_empty() {
                return Err(format!("{}: {section}: no samples on Z", r.group));
            }
        }
    }
    Ok(format!("max residual {worst:.3e} over 3 groups x 3 connections"))
}

fn equivariance(reports: &Reports) -> Outcome {
    let (mut eq, mut rt): (f64, f64) = (0.0, 0.0);
    for r in reports.all() {
        for label in ["default", "smooth-deformed", "b-deformed"] {
            let section = format!("minimal coupling ({label})");
            for name in ["tangent splitting equivariance", "cotangent splitting equivariance"] {
                eq = eq.max(expect(r, &section, name, 1e-9, 100)?);
            }
            for name in ["tangent splitting round trip", "cotangent splitting round trip"] {
                rt = rt.max(expect(r, &section, name, 1e-12, 100)?);
            }
        }
    }
    Ok(format!("equivariance {eq:.3e}, round trip {rt:.3e}"))
}

fn independence(reports: &Reports) -> Outcome {
    let mut worst: f64 = 0.0;
    for r in reports.all() {
        worst = worst.max(expect(r, "reduction", "connection independence", 1e-8, 50)?);
    }
    Ok(format!("max disagreement {worst:.3e}"))
}

fn lie_exactness(reports: &Reports) -> Outcome {
    let mut lp: f64 = 0.0;
    for r in reports.all() {
        for name in ["antisymmetry", "Jacobi", "commutator oracle"] {
            expect(r, "lie", name, 0.0, 1)?;
        }
        lp = lp.max(expect(r, "lie", "Lie-Poisson Jacobiator", 1e-9, 50)?);
    }
    let pair = BLieGroupPair::se2();
    let t2 = pair.h_algebra();
    if !t2.is_abelian() {
        return Err("T(2) is not abelian".into());
    }
    let t2_exact = declared_algebra("se2", None).unwrap().subalgebra(&[1, 2]).map_err(|e| e.to_string())?;
    let names = t2_exact.dual_names();
    let f = Expr::var(names[0].clone()).mul(&Expr::var(names[1].clone()));
    let g = Expr::var(names[1].clone()).powi(2);
    if lie_poisson(&t2_exact, &f, &g, &[0.3, -0.7]).map_err(|e| e.to_string())? != 0.0 {
        return Err("T(2) Lie-Poisson bracket is nonzero".into());
    }
    Ok(format!("constants exact, Lie-Poisson Jacobiator {lp:.3e}, T(2) block zero"))
}

fn bcalc() -> Outcome {
    let chart = BChart::with_cube(&["x1", "y1", "x2", "y2"], "y1", 1.0).map_err(|e| e.to_string())?;
    let mut r = rng(42, 99);
    for i in 0..200 {
        let w = random_bform(&chart, 1 + i % 2, 3, &mut r);
        if w.b_d(&chart).b_d(&chart).is_exactly_zero() != Some(true) {
            return Err(format!("d∘d ≠ 0 on {w:?}"));
        }
    }
    let d_log = BFunction::new(Rational::from_integer(1.into()), Expr::zero()).d(&chart);
    if d_log != BForm::from_terms(4, 1, vec![(vec![1], Expr::one())]) {
        return Err(format!("d(log|f|) = {d_log:?}"));
    }
    let se2 = report(&BLieGroupPair::se2(), ("se2", None));
    for name in ["b-Darboux models", "canonical form b-symplectic", "canonical normal form", "Poisson inversion"] {
        expect(&se2, "bcalc", name, 0.0, 1)?;
    }
    Ok("d∘d exact on 200 forms, d(log|f|) = df/f, Pfaffians ±1, canonical = normal form".into())
}

fn moment(reports: &Reports) -> Outcome {
    let (mut m, mut e): (f64, f64) = (0.0, 0.0);
    for r in reports.all() {
        m = m.max(expect(r, "blift", "moment map", 1e-8, 100)?);
        e = e.max(expect(r, "blift", "moment equivariance", 1e-9, 100)?);
    }
    Ok(format!("Hamilton residual {m:.3e}, equivariance {e:.3e}"))
}

fn flow_error(dt: f64) -> Result<f64, String> {
    let red = ReducedPoisson::new(&BLieGroupPair::se2(), Mode::B);
    let phi = red.bivector().index_of("phi").unwrap();
    let vf = hamiltonian_vf(red.bivector(), &Expr::var("p")).map_err(|e| e.to_string())?;
    let mut x0 = vec![0.0; red.names().len()];
    x0[phi] = 1.0;
    let t = integrate(&vf, &x0, dt, 1.0, Method::Rk4, &FlowOptions::default()).map_err(|e| e.to_string())?;
    Ok((t.last()[phi] - std::f64::consts::E).abs())
}

fn dynamics() -> Outcome {
    let err = flow_error(1e-3)?;
    if err > 1e-6 {
        return Err(format!("|phi(1) - e| = {err:.3e}"));
    }
    let mut r = rng(42, 77);
    for name in ["se2", "galilean", "heisenberg"] {
        let n = (name == "heisenberg").then_some(1);
        let red = ReducedPoisson::new(&BLieGroupPair::builtin(name, n).unwrap(), Mode::B);
        let names = red.names().to_vec();
        let phi = names.len() - 2;
        for start in [0.0, 0.2, -0.2] {
            let h = random_definite_quadratic(&names, &mut r);
            let mut x0 = uniform_vec(&mut r, names.len(), 0.5);
            x0[phi] = start;
            let vf = hamiltonian_vf(red.bivector(), &h).map_err(|e| e.to_string())?;
            let opts = FlowOptions { phi_index: Some(phi), ..FlowOptions::default() };
            let t = integrate(&vf, &x0, 1e-3, 10.0, Method::Rk4, &opts).map_err(|e| e.to_string())?;
            if start == 0.0 && t.states.iter().any(|s| s[phi] != 0.0) {
                return Err(format!("{name}: left Z"));
            }
            if start != 0.0 && t.phi_sign_constant() != Some(true) {
                return Err(format!("{name}: crossed Z"));
            }
        }
    }
    let ratio = flow_error(0.1)? / flow_error(0.05)?;
    if (ratio - 16.0).abs() > 2.0 {
        return Err(format!("order ratio {ratio:.2}"));
    }
    Ok(format!("|phi(1) - e| = {err:.3e}, Z invariant, no crossing, order ratio {ratio:.2}"))
}

fn tooling() -> Outcome {
    let code = |out: &Output| out.status.code();
    let ok = blie(&["verify", "--config", &config("se2.toml")]);
    if code(&ok) != Some(0) {
        return Err(format!("se2 verify exited {:?}", code(&ok)));
    }
    let bad = blie(&["verify", "--config", &config("se2_corrupted.toml")]);
    let stderr = String::from_utf8_lossy(&bad.stderr);
    if code(&bad) != Some(1) || !stderr.contains("lie: Jacobi") {
        return Err(format!("corrupted verify exited {:?}: {stderr}", code(&bad)));
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let broken = dir.path().join("broken.toml");
    std::fs::write(&broken, "[group]\nbuiltin = \"se2\"\ncolour = 3\n").map_err(|e| e.to_string())?;
    let malformed = blie(&["verify", "--config", &broken.display().to_string()]);
    if code(&malformed) != Some(2) {
        return Err(format!("malformed config exited {:?}", code(&malformed)));
    }

    for (cmd, cfg) in [("verify", "heisenberg.toml"), ("flow", "se2.toml"), ("reduce", "galilean.toml")] {
        let mut runs = Vec::new();
        for i in 0..2 {
            let out = dir.path().join(format!("{cmd}-{i}.out"));
            let o = blie(&[cmd, "--config", &config(cfg), "--seed", "7", "--out", &out.display().to_string()]);
            if code(&o) != Some(0) {
                return Err(format!("{cmd} {cfg} exited {:?}", code(&o)));
            }
            runs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        if runs[0] != runs[1] {
            return Err(format!("{cmd} {cfg}: outputs differ between runs"));
        }
    }
    Ok("exit codes 0/1/2 as specified; verify, flow and reduce outputs byte-identical".into())
}

fn main() {
    let reports = Reports {
        se2: report(&BLieGroupPair::se2(), ("se2", None)),
        galilean: report(&BLieGroupPair::galilean(), ("galilean", None)),
        heisenberg: report(&BLieGroupPair::heisenberg_q(1).unwrap(), ("heisenberg", Some(1))),
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("SE(2) reduced structure", reduced_se2()),
        ("coupling identity", coupling(&reports)),
        ("equivariance and round trips", equivariance(&reports)),
        ("connection independence", independence(&reports)),
        ("Lie-theoretic exactness", lie_exactness(&reports)),
        ("b-calculus", bcalc()),
        ("moment map", moment(&reports)),
        ("dynamics", dynamics()),
        ("tooling", tooling()),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("criterion {}: {name}: pass ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
