//! Exact Laurent-polynomial normal form with rational coefficients.
//!
//! Used wherever identities must hold exactly rather than to a tolerance:
//! `d∘d = 0`, vanishing of structure-constant expressions, and reduced
//! bivector coefficients. Negative exponents arise from division by a
//! monomial; cancelling them (`x/x = 1`) removes removable singularities,
//! which is the intended reading for coefficient identities.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Expr, Node};

/// Sorted variable → non-zero exponent.
pub type Monomial = BTreeMap<String, i32>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Polynomial {
    pub fn zero() -> Polynomial {
        Polynomial::default()
    }

    pub fn constant(c: BigRational) -> Polynomial {
        let mut p = Polynomial::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::new(), c);
        }
        p
    }

    pub fn var(name: &str) -> Polynomial {
        let mut m = Monomial::new();
        m.insert(name.to_string(), 1);
        let mut p = Polynomial::zero();
        p.terms.insert(m, BigRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Monomial::new()).cloned(),
            _ => None,
        }
    }

    /// Largest total exponent of a term.
    pub fn degree(&self) -> i32 {
        self.terms.keys().map(|m| m.values().sum()).max().unwrap_or(0)
    }

    /// True when no exponent is negative.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|m| m.values().all(|e| *e > 0))
    }

    /// `(monomial, coefficient)` when there is exactly one term.
    fn single_term(&self) -> Option<(&Monomial, &BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// Reciprocal of a single-term Laurent polynomial.
    pub fn recip(&self) -> Option<Polynomial> {
        let (m, c) = self.single_term()?;
        let inv: Monomial = m.iter().map(|(v, e)| (v.clone(), -e)).collect();
        let mut out = Polynomial::zero();
        out.add_term(inv, c.recip());
        Some(out)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn sub(&self, rhs: &Polynomial) -> Polynomial {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, s: &BigRational) -> Polynomial {
        if s.is_zero() {
            return Polynomial::zero();
        }
        Polynomial { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect() }
    }

    pub fn mul(&self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let mut m = ma.clone();
                for (v, e) in mb {
                    let x = m.entry(v.clone()).or_insert(0);
                    *x += e;
                    if *x == 0 {
                        m.remove(v);
                    }
                }
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        let mut out = Polynomial::constant(BigRational::one());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn diff(&self, var: &str) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            if let Some(&e) = m.get(var) {
                let mut m2 = m.clone();
                if e == 1 {
                    m2.remove(var);
                } else if e == 0 {
                    continue;
                } else {
                    m2.insert(var.to_string(), e - 1);
                }
                out.add_term(m2, c * BigRational::from_integer(e.into()));
            }
        }
        out
    }

    /// Normal form of a Laurent-polynomial expression; `None` if the
    /// expression uses transcendental functions or divides by something other
    /// than a single term.
    pub fn from_expr(e: &Expr) -> Option<Polynomial> {
        Some(match e.node() {
            Node::Var(v) => Polynomial::var(v),
            Node::Const(c) => Polynomial::constant(c.clone()),
            Node::Add(a, b) => Polynomial::from_expr(a)?.add(&Polynomial::from_expr(b)?),
            Node::Sub(a, b) => Polynomial::from_expr(a)?.sub(&Polynomial::from_expr(b)?),
            Node::Mul(a, b) => Polynomial::from_expr(a)?.mul(&Polynomial::from_expr(b)?),
            Node::Div(a, b) => Polynomial::from_expr(a)?.mul(&Polynomial::from_expr(b)?.recip()?),
            Node::Neg(a) => Polynomial::from_expr(a)?.neg(),
            Node::Pow(a, n) if *n >= 0 => Polynomial::from_expr(a)?.pow(*n as u32),
            Node::Pow(a, n) => Polynomial::from_expr(a)?.recip()?.pow(n.unsigned_abs()),
            Node::Apply(..) => return None,
        })
    }

    pub fn to_expr(&self) -> Expr {
        let mut acc = Expr::zero();
        for (m, c) in &self.terms {
            let mut mono = Expr::one();
            for (v, e) in m {
                mono = mono.mul(&Expr::var(v.clone()).powi(*e));
            }
            let negative = c < &BigRational::zero();
            let term = Expr::constant(c.abs()).mul(&mono);
            acc = if negative { acc.sub(&term) } else { acc.add(&term) };
        }
        acc
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// Exact equality of two polynomial expressions; `None` when either side is
/// not polynomial.
pub fn poly_equal(a: &Expr, b: &Expr) -> Option<bool> {
    Some(Polynomial::from_expr(a)? == Polynomial::from_expr(b)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_form_identifies_equal_polynomials() {
        let a = Expr::parse("(x + y)^2 - 2*x*y").unwrap();
        let b = Expr::parse("y^2 + x*x").unwrap();
        assert_eq!(poly_equal(&a, &b), Some(true));
        let c = Expr::parse("(x - y)*(x + y) - x^2 + y^2").unwrap();
        assert!(Polynomial::from_expr(&c).unwrap().is_zero());
        assert_eq!(Polynomial::from_expr(&Expr::parse("x/2").unwrap()).unwrap().degree(), 1);
        assert!(Polynomial::from_expr(&Expr::parse("sin(x)").unwrap()).is_none());
        assert!(Polynomial::from_expr(&Expr::parse("1/(x + 1)").unwrap()).is_none());
        assert!(Polynomial::from_expr(&Expr::parse("1/0").unwrap()).is_none());
        let l = Polynomial::from_expr(&Expr::parse("(1/s)*s*m - y^(-2)*y").unwrap()).unwrap();
        assert_eq!(l.to_string(), "m - y^(-1)");
        assert!(!l.is_polynomial());
    }

    #[test]
    fn derivative_agrees_with_symbolic() {
        let e = Expr::parse("x^3*y - 4*x*y^2 + 7").unwrap();
        let p = Polynomial::from_expr(&e).unwrap();
        let d1 = p.diff("x");
        let d2 = Polynomial::from_expr(&e.diff("x")).unwrap();
        assert_eq!(d1, d2);
    }
}
