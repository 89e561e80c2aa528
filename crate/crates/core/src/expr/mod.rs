//! Scalar expressions over a closed grammar.
//!
//! Nodes are reference counted and immutable, so expressions are cheap to
//! clone and safe to share across threads. The smart constructors only fold
//! constants and absorb `0`/`1`; there is no general simplifier.
//!
//! ```
//! use blie::expr::{Env, Expr};
//!
//! let e = Expr::parse("x*y + sin(x)").unwrap();
//! let d = e.diff("x");
//! let env = Env::from_pairs(&[("x", 0.0), ("y", 3.0)]);
//! assert_eq!(d.eval(&env).unwrap(), 4.0);
//! ```

mod diff;
mod eval;
mod parse;
pub mod poly;
mod print;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub use eval::{CompiledExpr, Env, EvalError};
pub use parse::ParseError;
pub use poly::{poly_equal, Polynomial};

/// Elementary functions of the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        }
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Var(String),
    Const(BigRational),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Pow(Expr, i32),
    Apply(Func, Expr),
}

/// An immutable expression tree.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    fn wrap(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::wrap(Node::Var(name.into()))
    }

    pub fn constant(c: BigRational) -> Expr {
        Expr::wrap(Node::Const(c))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    /// Exact rational constant from an `f64` (every finite float is a
    /// dyadic rational).
    pub fn from_f64(x: f64) -> Expr {
        Expr::constant(BigRational::from_float(x).expect("finite constant"))
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(One::is_one)
    }

    pub fn is_const(&self) -> bool {
        self.as_const().is_some()
    }

    pub fn add(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            _ if self.is_zero() => rhs.clone(),
            _ if rhs.is_zero() => self.clone(),
            _ => Expr::wrap(Node::Add(self.clone(), rhs.clone())),
        }
    }

    pub fn sub(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a - b),
            _ if rhs.is_zero() => self.clone(),
            _ if self.is_zero() => rhs.neg(),
            _ => Expr::wrap(Node::Sub(self.clone(), rhs.clone())),
        }
    }

    pub fn mul(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            _ if self.is_zero() || rhs.is_zero() => Expr::zero(),
            _ if self.is_one() => rhs.clone(),
            _ if rhs.is_one() => self.clone(),
            _ => Expr::wrap(Node::Mul(self.clone(), rhs.clone())),
        }
    }

    /// Division; `c/0` is kept unfolded so that evaluation reports the
    /// domain error.
    pub fn div(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) if !b.is_zero() => Expr::constant(a / b),
            _ if rhs.is_one() => self.clone(),
            _ if self.is_zero() && !rhs.is_zero() => Expr::zero(),
            _ => Expr::wrap(Node::Div(self.clone(), rhs.clone())),
        }
    }

    pub fn neg(&self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::wrap(Node::Neg(self.clone())),
        }
    }

    pub fn powi(&self, n: i32) -> Expr {
        if n == 0 {
            return Expr::one();
        }
        if n == 1 {
            return self.clone();
        }
        if let Some(c) = self.as_const() {
            if n > 0 {
                return Expr::constant(num_traits::pow(c.clone(), n as usize));
            }
            if !c.is_zero() {
                return Expr::constant(num_traits::pow(c.recip(), n.unsigned_abs() as usize));
            }
        }
        Expr::wrap(Node::Pow(self.clone(), n))
    }

    pub fn apply(f: Func, arg: &Expr) -> Expr {
        if let Some(c) = arg.as_const() {
            match f {
                Func::Sin if c.is_zero() => return Expr::zero(),
                Func::Cos if c.is_zero() => return Expr::one(),
                Func::Exp if c.is_zero() => return Expr::one(),
                Func::Log if c.is_one() => return Expr::zero(),
                _ => {}
            }
        }
        Expr::wrap(Node::Apply(f, arg.clone()))
    }

    pub fn sin(&self) -> Expr {
        Expr::apply(Func::Sin, self)
    }

    pub fn cos(&self) -> Expr {
        Expr::apply(Func::Cos, self)
    }

    pub fn exp(&self) -> Expr {
        Expr::apply(Func::Exp, self)
    }

    pub fn log(&self) -> Expr {
        Expr::apply(Func::Log, self)
    }

    pub fn scale(&self, c: &BigRational) -> Expr {
        Expr::constant(c.clone()).mul(self)
    }

    /// Sum of many terms, skipping zeros.
    pub fn sum<'a>(terms: impl IntoIterator<Item = &'a Expr>) -> Expr {
        terms.into_iter().fold(Expr::zero(), |acc, t| acc.add(t))
    }

    /// Free variables in sorted order.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut seen = std::collections::HashSet::new();
        self.collect_vars(&mut out, &mut seen);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>, seen: &mut std::collections::HashSet<usize>) {
        if !seen.insert(self.ptr_id()) {
            return;
        }
        match self.node() {
            Node::Var(v) => {
                out.insert(v.clone());
            }
            Node::Const(_) => {}
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_vars(out, seen);
                b.collect_vars(out, seen);
            }
            Node::Neg(a) | Node::Pow(a, _) | Node::Apply(_, a) => a.collect_vars(out, seen),
        }
    }

    pub fn depends_on(&self, var: &str) -> bool {
        self.free_vars().contains(var)
    }

    /// Simultaneous substitution of variables by expressions.
    pub fn substitute(&self, map: &HashMap<String, Expr>) -> Expr {
        let mut memo = HashMap::new();
        self.subst_rec(map, &mut memo)
    }

    pub fn substitute_one(&self, var: &str, value: &Expr) -> Expr {
        let mut map = HashMap::new();
        map.insert(var.to_string(), value.clone());
        self.substitute(&map)
    }

    fn subst_rec(&self, map: &HashMap<String, Expr>, memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(e) = memo.get(&self.ptr_id()) {
            return e.clone();
        }
        let out = match self.node() {
            Node::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Node::Const(_) => self.clone(),
            Node::Add(a, b) => a.subst_rec(map, memo).add(&b.subst_rec(map, memo)),
            Node::Sub(a, b) => a.subst_rec(map, memo).sub(&b.subst_rec(map, memo)),
            Node::Mul(a, b) => a.subst_rec(map, memo).mul(&b.subst_rec(map, memo)),
            Node::Div(a, b) => a.subst_rec(map, memo).div(&b.subst_rec(map, memo)),
            Node::Neg(a) => a.subst_rec(map, memo).neg(),
            Node::Pow(a, n) => a.subst_rec(map, memo).powi(*n),
            Node::Apply(f, a) => Expr::apply(*f, &a.subst_rec(map, memo)),
        };
        memo.insert(self.ptr_id(), out.clone());
        out
    }

    /// True when the expression contains no `log`, no division and no
    /// negative power whose argument mentions `var`; such expressions are
    /// smooth across `var = 0`.
    pub fn is_regular_in(&self, var: &str) -> bool {
        match self.node() {
            Node::Var(_) | Node::Const(_) => true,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => a.is_regular_in(var) && b.is_regular_in(var),
            Node::Div(a, b) => a.is_regular_in(var) && b.is_regular_in(var) && !b.depends_on(var),
            Node::Neg(a) => a.is_regular_in(var),
            Node::Pow(a, n) => a.is_regular_in(var) && (*n >= 0 || !a.depends_on(var)),
            Node::Apply(Func::Log, a) => a.is_regular_in(var) && !a.depends_on(var),
            Node::Apply(_, a) => a.is_regular_in(var),
        }
    }

    /// Number of distinct nodes (shared subtrees counted once).
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.ptr_id()) {
                continue;
            }
            match e.node() {
                Node::Var(_) | Node::Const(_) => {}
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                Node::Neg(a) | Node::Pow(a, _) | Node::Apply(_, a) => stack.push(a.clone()),
            }
        }
        seen.len()
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<BigRational> for Expr {
    fn from(c: BigRational) -> Expr {
        Expr::constant(c)
    }
}

impl Zero for Expr {
    fn zero() -> Expr {
        Expr::int(0)
    }
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
}

impl One for Expr {
    fn one() -> Expr {
        Expr::int(1)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$method(&self, &rhs)
            }
        }
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$method(self, rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$method(&self, rhs)
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$method(self, &rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_folding_and_absorption() {
        let x = Expr::var("x");
        assert_eq!(Expr::add(&x, &Expr::zero()), x);
        assert_eq!(Expr::mul(&x, &Expr::one()), x);
        assert!(Expr::mul(&x, &Expr::zero()).is_zero());
        assert_eq!(Expr::int(2).add(&Expr::int(3)), Expr::int(5));
        assert_eq!(Expr::zero().sin(), Expr::zero());
        assert_eq!(Expr::zero().cos(), Expr::one());
        assert_eq!(Expr::one().log(), Expr::zero());
        // 1/0 is not folded
        assert!(matches!(Expr::one().div(&Expr::zero()).node(), Node::Div(_, _)));
    }

    #[test]
    fn substitution_and_free_vars() {
        let e = Expr::parse("x*y + sin(z)").unwrap();
        let vars: Vec<_> = e.free_vars().into_iter().collect();
        assert_eq!(vars, ["x", "y", "z"]);
        let s = e.substitute_one("y", &Expr::int(2));
        assert_eq!(s.to_string(), "x*2 + sin(z)");
    }

    #[test]
    fn regularity() {
        assert!(Expr::parse("x^2*sin(y)/3").unwrap().is_regular_in("x"));
        assert!(!Expr::parse("1/x").unwrap().is_regular_in("x"));
        assert!(!Expr::parse("log(x)").unwrap().is_regular_in("x"));
        assert!(Expr::parse("log(y)").unwrap().is_regular_in("x"));
    }
}
