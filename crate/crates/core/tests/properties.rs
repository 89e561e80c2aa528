use blie::bcalc::{bdarboux_model, invert_to_poisson, BChart, BForm, BFunction};
use blie::blift::Mode;
use blie::dynamics::{hamiltonian_vf, integrate, FlowOptions, Method};
use blie::lie::{declared_algebra, lie_poisson, lie_poisson_expr, BLieGroupPair};
use blie::reduction::ReducedPoisson;
use blie::sampling::{rng, uniform_vec};
use blie::verify::random_definite_quadratic;
use blie::{Env, Expr, Rational};
use num_traits::One;
use proptest::prelude::*;

const VARS: [&str; 2] = ["x", "y"];

/// Expressions over `x, y` whose denominators stay at least 0.2 away from
/// zero and whose logs see arguments at least 0.2.
fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![Just(Expr::var("x")), Just(Expr::var("y")), (-3i64..=3).prop_map(Expr::int),];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let guard = |e: &Expr| e.mul(e).add(&Expr::parse("1/5").unwrap());
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(&b)),
            (inner.clone(), inner.clone()).prop_map(move |(a, b)| a.div(&guard(&b))),
            (inner.clone(), 1i32..=3).prop_map(|(a, n)| a.powi(n)),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| a.sin().exp()),
            inner.prop_map(move |a| guard(&a).log()),
        ]
    })
}

fn at(x: f64, y: f64) -> Env {
    Env::from_pairs(&[("x", x), ("y", y)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn derivative_matches_central_difference(e in arb_expr(), x in -1.0..1.0f64, y in -1.0..1.0f64, which in 0usize..2) {
        let v = VARS[which];
        let h = 1e-5;
        let shifted = |s: f64| if which == 0 { at(x + s, y) } else { at(x, y + s) };
        let exact = e.diff(v).eval(&at(x, y)).unwrap();
        let fd = (e.eval(&shifted(h)).unwrap() - e.eval(&shifted(-h)).unwrap()) / (2.0 * h);
        prop_assert!((exact - fd).abs() <= 1e-6 * (1.0 + exact.abs()), "{e}: exact {exact}, fd {fd}");
    }
}

proptest! {
    #[test]
    fn print_parse_is_a_fixed_point(e in arb_expr()) {
        let printed = e.to_string();
        let reparsed = Expr::parse(&printed).unwrap();
        prop_assert_eq!(reparsed.to_string(), printed);
    }
}

fn chart() -> BChart {
    BChart::with_cube(&["x1", "y1", "x2", "y2"], "y1", 1.0).unwrap()
}

/// A polynomial of degree `≤ 3` in the chart coordinates.
fn arb_cubic() -> impl Strategy<Value = Expr> {
    prop::collection::vec((-3i64..=3, prop::collection::vec(0usize..4, 0..=3)), 1..=3).prop_map(|monomials| {
        let names = chart().names().to_vec();
        let terms: Vec<Expr> = monomials
            .into_iter()
            .map(|(c, vars)| vars.iter().fold(Expr::int(c), |acc, &i| acc.mul(&Expr::var(names[i].clone()))))
            .collect();
        Expr::sum(terms.iter())
    })
}

fn arb_bform() -> impl Strategy<Value = BForm> {
    (1usize..=2).prop_flat_map(|degree| {
        prop::collection::vec((prop::sample::subsequence(vec![0usize, 1, 2, 3], degree), arb_cubic()), 1..=4)
            .prop_map(move |terms| BForm::from_terms(4, degree, terms))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn d_squared_vanishes(w in arb_bform()) {
        let c = chart();
        prop_assert_eq!(w.b_d(&c).b_d(&c).is_exactly_zero(), Some(true), "{:?}", w);
    }

    #[test]
    fn pairing_is_alternating(w in arb_bform(), seed in any::<u64>()) {
        let c = chart();
        let mut r = rng(seed, 0);
        let x = uniform_vec(&mut r, 4, 1.0);
        let mut vs: Vec<Vec<f64>> = (0..w.degree()).map(|_| uniform_vec(&mut r, 4, 1.0)).collect();
        let a = w.pair_frame(&c, &x, &vs).unwrap();
        if vs.len() == 2 {
            vs.swap(0, 1);
            let b = w.pair_frame(&c, &x, &vs).unwrap();
            prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}

#[test]
fn d_log_f_is_df_over_f() {
    let c = chart();
    let d = BFunction::new(Rational::one(), Expr::zero()).d(&c);
    let df_over_f = BForm::from_terms(4, 1, vec![(vec![1], Expr::one())]);
    assert_eq!(d, df_over_f);

    let u = BFunction::new(Rational::from_integer(2.into()), Expr::parse("x1^2").unwrap());
    let want = BForm::from_terms(4, 1, vec![(vec![1], Expr::int(2)), (vec![0], Expr::parse("2*x1").unwrap())]);
    assert_eq!(u.d(&c).add(&want.neg()).is_exactly_zero(), Some(true));
}

fn arb_quadratic(names: Vec<String>) -> impl Strategy<Value = Expr> {
    let n = names.len();
    prop::collection::vec((-4i64..=4, 0..n, 0..n + 1), 1..=5).prop_map(move |terms| {
        let es: Vec<Expr> = terms
            .into_iter()
            .map(|(c, i, j)| {
                let mono = Expr::int(c).div(&Expr::int(4)).mul(&Expr::var(names[i].clone()));
                if j < n {
                    mono.mul(&Expr::var(names[j].clone()))
                } else {
                    mono
                }
            })
            .collect();
        Expr::sum(es.iter())
    })
}

fn lie_poisson_jacobi(
    name: &str,
    n: Option<usize>,
) -> impl Strategy<Value = (String, Option<usize>, Expr, Expr, Expr, Vec<f64>)> {
    let alg = declared_algebra(name, n).unwrap();
    let names = alg.dual_names();
    let dim = names.len();
    let name = name.to_string();
    (arb_quadratic(names.clone()), arb_quadratic(names.clone()), arb_quadratic(names), prop::collection::vec(-1.0..1.0f64, dim))
        .prop_map(move |(f, g, k, mu)| (name.clone(), n, f, g, k, mu))
}

fn check_lie_poisson_jacobi(name: &str, n: Option<usize>, f: &Expr, g: &Expr, k: &Expr, mu: &[f64]) -> Result<(), TestCaseError> {
    let alg = declared_algebra(name, n).unwrap();
    let names = alg.dual_names();
    let env = Env::from_slices(&names.iter().map(String::as_str).collect::<Vec<_>>(), mu);
    let lp = |a: &Expr, b: &Expr| lie_poisson_expr(&alg, a, b);
    let terms = [lp(&lp(f, g), k), lp(&lp(g, k), f), lp(&lp(k, f), g)];
    let vals: Vec<f64> = terms.iter().map(|t| t.eval(&env).unwrap()).collect();
    let scale = 1.0 + vals.iter().map(|v| v.abs()).sum::<f64>();
    prop_assert!(vals.iter().sum::<f64>().abs() <= 1e-9 * scale);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn lie_poisson_jacobi_se2((name, n, f, g, k, mu) in lie_poisson_jacobi("se2", None)) {
        check_lie_poisson_jacobi(&name, n, &f, &g, &k, &mu)?;
    }

    #[test]
    fn lie_poisson_jacobi_galilean((name, n, f, g, k, mu) in lie_poisson_jacobi("galilean", None)) {
        check_lie_poisson_jacobi(&name, n, &f, &g, &k, &mu)?;
    }

    #[test]
    fn lie_poisson_jacobi_heisenberg((name, n, f, g, k, mu) in lie_poisson_jacobi("heisenberg", Some(2))) {
        check_lie_poisson_jacobi(&name, n, &f, &g, &k, &mu)?;
    }

    #[test]
    fn lie_poisson_is_bilinear(
        (_, _, f, g, k, mu) in lie_poisson_jacobi("galilean", None),
        a in -2.0..2.0f64,
    ) {
        let alg = declared_algebra("galilean", None).unwrap();
        let combo = f.mul(&Expr::from_f64(a)).add(&k);
        let lhs = lie_poisson(&alg, &combo, &g, &mu).unwrap();
        let rhs = a * lie_poisson(&alg, &f, &g, &mu).unwrap() + lie_poisson(&alg, &k, &g, &mu).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn heisenberg_center_is_casimir((_, _, f, _, _, mu) in lie_poisson_jacobi("heisenberg", Some(1))) {
        let alg = declared_algebra("heisenberg", Some(1)).unwrap();
        let z = Expr::var(alg.dual_names()[2].clone());
        prop_assert_eq!(lie_poisson(&alg, &z, &f, &mu).unwrap(), 0.0);
    }

    #[test]
    fn inverted_darboux_models_satisfy_jacobi(
        n in 1usize..=3,
        seed in any::<u64>(),
    ) {
        let (c, w) = bdarboux_model(n);
        let pi = invert_to_poisson(&w, &c).unwrap();
        let names: Vec<&str> = c.name_refs();
        let mut r = rng(seed, 1);
        let cubic = |r: &mut _| {
            let mut acc = Expr::zero();
            for _ in 0..4 {
                let v = uniform_vec(r, 3, 1.0);
                let pick = |u: f64| names[((u + 1.0) * 0.5 * names.len() as f64) as usize % names.len()];
                let mono = Expr::from_f64((v[0] * 4.0).round() / 4.0)
                    .mul(&Expr::var(pick(v[1])))
                    .mul(&Expr::var(pick(v[2])))
                    .mul(&Expr::var(pick(-v[1])));
                acc = acc.add(&mono);
            }
            acc
        };
        let (f, g, k) = (cubic(&mut r), cubic(&mut r), cubic(&mut r));
        let mut x = uniform_vec(&mut r, 2 * n, 2.0);
        let y1 = c.defining();
        x[y1] = x[y1].signum() * (0.05 + 1.95 * x[y1].abs() / 2.0);
        let j = pi.jacobiator_at(&f, &g, &k, &x).unwrap();
        let scale = 1.0 + pi.bracket_at(&pi.bracket_expr(&f, &g), &k, &x).unwrap().abs();
        prop_assert!(j.abs() <= 1e-8 * scale, "jacobiator {j}");
    }
}

fn reduced(name: &str) -> ReducedPoisson {
    let n = (name == "heisenberg").then_some(2);
    ReducedPoisson::new(&BLieGroupPair::builtin(name, n).unwrap(), Mode::B)
}

#[test]
fn energy_is_conserved_for_definite_quadratics() {
    for name in ["se2", "galilean", "heisenberg"] {
        let red = reduced(name);
        let names = red.names().to_vec();
        let phi = names.len() - 2;
        let mut r = rng(7, 3);
        for trial in 0..10 {
            let h = random_definite_quadratic(&names, &mut r);
            let mut x0 = uniform_vec(&mut r, names.len(), 0.5);
            x0[phi] = if trial % 2 == 0 { 0.3 } else { -0.3 };
            let opts = FlowOptions { hamiltonian: Some(h.clone()), phi_index: Some(phi), ..FlowOptions::default() };
            let vf = hamiltonian_vf(red.bivector(), &h).unwrap();
            let t = integrate(&vf, &x0, 1e-3, 10.0, Method::Rk4, &opts).unwrap();
            let drift = t.energy_drift().unwrap();
            assert!(drift <= 1e-6 * (1.0 + t.energy[0].abs()), "{name} trial {trial}: drift {drift} for H = {h}");
            assert_eq!(t.phi_sign_constant(), Some(true), "{name} trial {trial} crossed Z");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn trajectories_starting_on_z_stay_on_z(seed in any::<u64>(), which in 0usize..3, midpoint in any::<bool>()) {
        let name = ["se2", "galilean", "heisenberg"][which];
        let red = reduced(name);
        let names = red.names().to_vec();
        let phi = names.len() - 2;
        let mut r = rng(seed, 5);
        let h = random_definite_quadratic(&names, &mut r);
        let mut x0 = uniform_vec(&mut r, names.len(), 0.5);
        x0[phi] = 0.0;
        let method = if midpoint { Method::Midpoint } else { Method::Rk4 };
        let vf = hamiltonian_vf(red.bivector(), &h).unwrap();
        let t = integrate(&vf, &x0, 1e-2, 2.0, method, &FlowOptions::default()).unwrap();
        prop_assert!(t.states.iter().all(|s| s[phi] == 0.0));
    }
}

fn growth_error(dt: f64) -> f64 {
    let red = reduced("se2");
    let h = Expr::var("p");
    let vf = hamiltonian_vf(red.bivector(), &h).unwrap();
    let x0 = [0.0, 0.0, 1.0, 0.5];
    let t = integrate(&vf, &x0, dt, 1.0, Method::Rk4, &FlowOptions::default()).unwrap();
    (t.last()[2] - std::f64::consts::E).abs()
}

#[test]
fn rk4_is_fourth_order() {
    let ratio = growth_error(0.1) / growth_error(0.05);
    assert!((ratio - 16.0).abs() <= 2.0, "ratio {ratio}");
}

#[test]
fn abelian_block_is_zero() {
    let red = reduced("se2");
    let table: Vec<_> = red.table().into_iter().filter(|e| !e.value.is_zero()).collect();
    assert_eq!(table.len(), 1);
    assert_eq!((table[0].left.as_str(), table[0].right.as_str()), ("phi", "p"));
    assert_eq!(table[0].value, Expr::var("phi"));
}
