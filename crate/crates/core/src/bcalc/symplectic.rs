use super::{BChart, BForm, BcalcError};
use crate::expr::CompiledExpr;
use crate::linalg::{pfaffian, Matrix};
use crate::sampling::{box_points, DEFAULT_SEED};

#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticOptions {
    pub samples: usize,
    pub seed: u64,
    /// Minimum admissible `|Pf|` of the frame matrix.
    pub threshold: f64,
    /// Maximum admissible coefficient of `dω`.
    pub closed_tolerance: f64,
}

impl Default for SymplecticOptions {
    fn default() -> Self {
        SymplecticOptions { samples: 128, seed: DEFAULT_SEED, threshold: 1e-8, closed_tolerance: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BSymplecticReport {
    pub samples: usize,
    /// Samples placed exactly on `Z`.
    pub samples_on_z: usize,
    pub closedness_residual: f64,
    /// `Some(true)` when `dω` vanishes identically as polynomials.
    pub closed_exactly: Option<bool>,
    pub min_abs_pfaffian: f64,
    pub max_abs_pfaffian: f64,
    pub closed: bool,
    pub nondegenerate: bool,
}

impl BSymplecticReport {
    pub fn verdict(&self) -> bool {
        self.closed && self.nondegenerate
    }

    pub fn lines(&self) -> Vec<(String, String)> {
        vec![
            ("samples".into(), self.samples.to_string()),
            ("samples_on_z".into(), self.samples_on_z.to_string()),
            ("closedness_residual".into(), format!("{:.3e}", self.closedness_residual)),
            (
                "closed_exactly".into(),
                match self.closed_exactly {
                    Some(b) => b.to_string(),
                    None => "unknown".into(),
                },
            ),
            ("min_abs_pfaffian".into(), format!("{:.6e}", self.min_abs_pfaffian)),
            ("max_abs_pfaffian".into(), format!("{:.6e}", self.max_abs_pfaffian)),
            ("verdict".into(), self.verdict().to_string()),
        ]
    }
}

/// Sampled evidence that `ω` is closed and of maximal rank as a b-form.
///
/// A quarter of the samples are projected onto `Z` so that the b-frame rank
/// is probed where the classical rank drops.
pub fn is_b_symplectic(omega: &BForm, chart: &BChart, opts: &SymplecticOptions) -> Result<BSymplecticReport, BcalcError> {
    let n = chart.dim();
    if n % 2 == 1 {
        return Err(BcalcError::OddDimension(n));
    }
    if omega.degree() != 2 {
        return Err(BcalcError::Degree(format!("expected a 2-form, got degree {}", omega.degree())));
    }
    let d = omega.b_d(chart);
    let frame = omega.frame_matrix_expr()?;
    let frame_code = CompiledExpr::new(frame.data(), &chart.name_refs())?;
    let d_exprs: Vec<_> = d.terms().map(|(_, c)| c.clone()).collect();
    let d_code = CompiledExpr::new(&d_exprs, &chart.name_refs())?;

    let mut points = box_points(chart.domain(), opts.samples, opts.seed);
    let on_z = opts.samples / 4;
    for p in points.iter_mut().take(on_z) {
        p[chart.defining()] = 0.0;
    }
    let mut resid: f64 = 0.0;
    let mut min_pf = f64::INFINITY;
    let mut max_pf: f64 = 0.0;
    for x in &points {
        for v in d_code.eval_all(x)? {
            resid = resid.max(v.abs());
        }
        let m = Matrix::from_vec(n, n, frame_code.eval_all(x)?);
        let pf = pfaffian(&m).abs();
        min_pf = min_pf.min(pf);
        max_pf = max_pf.max(pf);
    }
    if points.is_empty() {
        min_pf = 0.0;
    }
    Ok(BSymplecticReport {
        samples: points.len(),
        samples_on_z: on_z,
        closedness_residual: resid,
        closed_exactly: d.is_exactly_zero(),
        min_abs_pfaffian: min_pf,
        max_abs_pfaffian: max_pf,
        closed: resid <= opts.closed_tolerance && d.is_exactly_zero() != Some(false),
        nondegenerate: min_pf >= opts.threshold,
    })
}

/// The b-Darboux model `dx₁∧dy₁/y₁ + Σ_{i≥2} dx_i∧dy_i` on coordinates
/// `(x1, y1, …, xn, yn)` with defining coordinate `y1`, on the cube
/// `[-2, 2]^{2n}`.
pub fn bdarboux_model(n: usize) -> (BChart, BForm) {
    assert!(n >= 1, "b-Darboux model needs n >= 1");
    let mut names = Vec::with_capacity(2 * n);
    for i in 1..=n {
        names.push(format!("x{i}"));
        names.push(format!("y{i}"));
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let chart = BChart::with_cube(&refs, "y1", 2.0).expect("model chart is valid");
    let form = BForm::from_terms(2 * n, 2, (0..n).map(|i| (vec![2 * i, 2 * i + 1], crate::Expr::one())));
    (chart, form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Expr;

    #[test]
    fn darboux_models_pass() {
        for n in 1..=3 {
            let (c, w) = bdarboux_model(n);
            let r = is_b_symplectic(&w, &c, &SymplecticOptions::default()).unwrap();
            assert!(r.verdict());
            assert_eq!(r.min_abs_pfaffian, 1.0);
            assert_eq!(r.max_abs_pfaffian, 1.0);
        }
    }

    #[test]
    fn smooth_form_is_degenerate_as_b_form() {
        let c = BChart::with_cube(&["x1", "y1"], "y1", 2.0).unwrap();
        let w = BForm::from_smooth(&c, 2, vec![(vec![0, 1], Expr::one())]);
        assert_eq!(w.coefficient(&[0, 1]).to_string(), "y1");
        let r = is_b_symplectic(&w, &c, &SymplecticOptions::default()).unwrap();
        assert!(r.closed);
        assert!(!r.nondegenerate);
        assert!(!r.verdict());
    }

    #[test]
    fn non_closed_form_is_reported() {
        let (c, _) = bdarboux_model(2);
        let w = BForm::from_terms(4, 2, vec![(vec![0, 1], Expr::var("x1")), (vec![2, 3], Expr::var("y1"))]);
        let r = is_b_symplectic(&w, &c, &SymplecticOptions::default()).unwrap();
        assert!(!r.closed);
        assert!(r.closedness_residual > 0.0);
        assert_eq!(r.closed_exactly, Some(false));
    }

    #[test]
    fn odd_dimension_is_an_error() {
        let c = BChart::with_cube(&["x", "y", "z"], "y", 1.0).unwrap();
        let w = BForm::zero(3, 2);
        assert_eq!(is_b_symplectic(&w, &c, &SymplecticOptions::default()), Err(BcalcError::OddDimension(3)));
    }
}
