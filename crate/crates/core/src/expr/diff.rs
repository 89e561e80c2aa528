//! Exact symbolic differentiation.

use std::collections::HashMap;

use super::{Expr, Func, Node};

impl Expr {
    /// Partial derivative with respect to `var`. Shared subtrees are
    /// differentiated once.
    pub fn diff(&self, var: &str) -> Expr {
        let mut memo = HashMap::new();
        self.diff_rec(var, &mut memo)
    }

    /// Gradient with respect to the listed variables.
    pub fn gradient(&self, vars: &[&str]) -> Vec<Expr> {
        vars.iter().map(|v| self.diff(v)).collect()
    }

    fn diff_rec(&self, var: &str, memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(d) = memo.get(&self.ptr_id()) {
            return d.clone();
        }
        let d = match self.node() {
            Node::Var(v) => {
                if v == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Const(_) => Expr::zero(),
            Node::Add(a, b) => a.diff_rec(var, memo).add(&b.diff_rec(var, memo)),
            Node::Sub(a, b) => a.diff_rec(var, memo).sub(&b.diff_rec(var, memo)),
            Node::Mul(a, b) => {
                let da = a.diff_rec(var, memo);
                let db = b.diff_rec(var, memo);
                da.mul(b).add(&a.mul(&db))
            }
            Node::Div(a, b) => {
                let da = a.diff_rec(var, memo);
                let db = b.diff_rec(var, memo);
                if db.is_zero() {
                    da.div(b)
                } else {
                    da.mul(b).sub(&a.mul(&db)).div(&b.powi(2))
                }
            }
            Node::Neg(a) => a.diff_rec(var, memo).neg(),
            Node::Pow(a, n) => {
                let da = a.diff_rec(var, memo);
                Expr::int(i64::from(*n)).mul(&a.powi(n - 1)).mul(&da)
            }
            Node::Apply(f, a) => {
                let da = a.diff_rec(var, memo);
                if da.is_zero() {
                    Expr::zero()
                } else {
                    match f {
                        Func::Sin => a.cos().mul(&da),
                        Func::Cos => a.sin().mul(&da).neg(),
                        Func::Exp => self.mul(&da),
                        Func::Log => da.div(a),
                    }
                }
            }
        };
        memo.insert(self.ptr_id(), d.clone());
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Env;

    #[test]
    fn textbook_derivatives() {
        assert_eq!(Expr::parse("x^2").unwrap().diff("x").to_string(), "2*x");
        assert_eq!(Expr::parse("log(y1)").unwrap().diff("y1").to_string(), "1/y1");
        assert!(Expr::parse("3*sin(2)").unwrap().diff("x").is_zero());
    }

    #[test]
    fn matches_central_difference() {
        let e = Expr::parse("sin(x)*y").unwrap();
        let d = e.diff("x");
        let h = 1e-5;
        let at = |x: f64| e.eval(&Env::from_pairs(&[("x", x), ("y", 2.0)])).unwrap();
        let fd = (at(0.3 + h) - at(0.3 - h)) / (2.0 * h);
        let exact = d.eval(&Env::from_pairs(&[("x", 0.3), ("y", 2.0)])).unwrap();
        assert!((exact - fd).abs() <= 1e-8 * exact.abs());
    }
}
