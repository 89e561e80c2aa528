//! Hand-written bracket tables of the built-in algebras and a parser for
//! bracket assignments such as `[P1, P2] = J + P1`.

use num_rational::BigRational;
use num_traits::Zero;

use super::algebra::LieAlgebra;
use super::LieError;
use crate::expr::{Expr, Polynomial};
use crate::scalar::rational_int;

fn labels(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn unit(n: usize, k: usize, sign: i64) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero(); n];
    v[k] = rational_int(sign);
    v
}

/// Brackets of the built-in algebras as usually tabulated, independent of
/// any matrix model:
///
/// * `se2`: `[J, P1] = P2`, `[J, P2] = −P1`;
/// * `galilean`: `[J_a, J_b] = ε_abc J_c`, `[J_a, K_b] = ε_abc K_c`,
///   `[J_a, P_b] = ε_abc P_c`, `[K_a, E] = P_a`;
/// * `heisenberg_q(n)`: `[X_i, Y_i] = Z`.
pub fn declared_algebra(name: &str, n: Option<usize>) -> Result<LieAlgebra<BigRational>, LieError> {
    match name {
        "se2" => {
            let mut a = LieAlgebra::abelian(labels(&["J", "P1", "P2"]));
            a.set_bracket(0, 1, &unit(3, 2, 1));
            a.set_bracket(0, 2, &unit(3, 1, -1));
            Ok(a)
        }
        "galilean" => {
            let mut a = LieAlgebra::abelian(labels(&["J1", "J2", "J3", "K1", "K2", "K3", "P1", "P2", "P3", "E"]));
            for (x, y, z) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                for off in [0, 3, 6] {
                    a.set_bracket(x, off + y, &unit(10, off + z, 1));
                }
                for off in [3, 6] {
                    a.set_bracket(y, off + x, &unit(10, off + z, -1));
                }
            }
            for i in 0..3 {
                a.set_bracket(3 + i, 9, &unit(10, 6 + i, 1));
            }
            Ok(a)
        }
        "heisenberg_q" | "heisenberg" => {
            let n = n.unwrap_or(1);
            if n == 0 {
                return Err(LieError::Dimension("heisenberg_q needs n >= 1".into()));
            }
            let name = |b: &str, i: usize| if n == 1 { b.to_string() } else { format!("{b}{i}") };
            let mut l: Vec<String> = (1..=n).map(|i| name("X", i)).collect();
            l.extend((1..=n).map(|i| name("Y", i)));
            l.push("Z".into());
            let mut a = LieAlgebra::abelian(l);
            for i in 0..n {
                a.set_bracket(i, n + i, &unit(2 * n + 1, 2 * n, 1));
            }
            Ok(a)
        }
        other => Err(LieError::UnknownGroup(other.to_string())),
    }
}

impl LieAlgebra<BigRational> {
    /// Parses `[A, B] = <linear combination of labels>`.
    pub fn parse_bracket_assignment(&self, text: &str) -> Result<(usize, usize, Vec<BigRational>), LieError> {
        let bad = |m: &str| LieError::BracketSyntax(format!("{m} in `{text}`"));
        let (lhs, rhs) = text.split_once('=').ok_or_else(|| bad("missing `=`"))?;
        let inner =
            lhs.trim().strip_prefix('[').and_then(|s| s.strip_suffix(']')).ok_or_else(|| bad("left side must be `[A, B]`"))?;
        let (a, b) = inner.split_once(',').ok_or_else(|| bad("left side must be `[A, B]`"))?;
        let idx = |l: &str| self.index_of(l.trim()).ok_or_else(|| LieError::UnknownLabel(l.trim().to_string()));
        let (i, j) = (idx(a)?, idx(b)?);
        if i == j {
            return Err(bad("a bracket of an element with itself is zero"));
        }
        let e = Expr::parse_in(rhs.trim(), &self.labels().iter().map(String::as_str).collect::<Vec<_>>())
            .map_err(|e| bad(&e.to_string()))?;
        let p = Polynomial::from_expr(&e).ok_or_else(|| bad("right side is not linear"))?;
        let mut v = vec![BigRational::zero(); self.dim()];
        for (mono, c) in p.terms() {
            let mut it = mono.iter();
            match (it.next(), it.next()) {
                (Some((name, 1)), None) => v[idx(name)?] = c.clone(),
                (None, None) if c.is_zero() => {}
                _ => return Err(bad("right side is not linear")),
            }
        }
        Ok((i, j, v))
    }

    /// A copy with the given bracket assignments applied.
    pub fn with_brackets(&self, assignments: &[String]) -> Result<LieAlgebra<BigRational>, LieError> {
        let mut out = self.clone();
        for a in assignments {
            let (i, j, v) = self.parse_bracket_assignment(a)?;
            out.set_bracket(i, j, &v);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::BLieGroupPair;

    #[test]
    fn declared_tables_match_matrix_models() {
        let cases = [
            ("se2", None, BLieGroupPair::se2()),
            ("galilean", None, BLieGroupPair::galilean()),
            ("heisenberg_q", Some(1), BLieGroupPair::heisenberg_q(1).unwrap()),
            ("heisenberg_q", Some(3), BLieGroupPair::heisenberg_q(3).unwrap()),
        ];
        for (name, n, pair) in cases {
            let declared = declared_algebra(name, n).unwrap();
            // the group's algebra may list labels in a different order
            let g = pair.g_algebra();
            for i in 0..g.dim() {
                for j in 0..g.dim() {
                    for k in 0..g.dim() {
                        let (di, dj, dk) = (
                            declared.index_of(g.label(i)).unwrap(),
                            declared.index_of(g.label(j)).unwrap(),
                            declared.index_of(g.label(k)).unwrap(),
                        );
                        assert_eq!(g.constant(i, j, k), declared.constant(di, dj, dk), "{name} {i} {j} {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn bracket_assignment_breaks_jacobi() {
        let a = declared_algebra("se2", None).unwrap();
        let (i, j, v) = a.parse_bracket_assignment("[P1,P2] = J + P1").unwrap();
        assert_eq!((i, j), (1, 2));
        assert_eq!(v, vec![rational_int(1), rational_int(1), rational_int(0)]);
        let broken = a.with_brackets(&["[P1, P2] = J + P1".into()]).unwrap();
        assert!(!broken.jacobi_defects(0.0).0.is_empty());
        assert!(a.jacobi_defects(0.0).0.is_empty());
    }

    #[test]
    fn bracket_assignment_errors() {
        let a = declared_algebra("se2", None).unwrap();
        assert!(a.parse_bracket_assignment("[P1,Q] = J").is_err());
        assert!(a.parse_bracket_assignment("P1,P2 = J").is_err());
        assert!(a.parse_bracket_assignment("[P1,P2] = J*P1").is_err());
        assert!(a.parse_bracket_assignment("[P1,P2] = 0").unwrap().2.iter().all(Zero::is_zero));
    }
}
