//! Evaluation of expressions.
//!
//! [`CompiledExpr`] lowers a tree (a DAG once shared subtrees are taken into
//! account) to a register program over positional variable slots. Evaluation
//! is generic over [`Scalar`], so the same program yields values or dual
//! numbers.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::{Expr, Func, Node};
use crate::scalar::{rational_to_f64, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of non-positive value {0}")]
    LogDomain(f64),
    #[error("zero raised to negative power {0}")]
    ZeroToNegativePower(i32),
}

/// Variable bindings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Env {
    values: BTreeMap<String, f64>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn from_pairs(pairs: &[(&str, f64)]) -> Env {
        let mut env = Env::new();
        for (k, v) in pairs {
            env.set(k, *v);
        }
        env
    }

    pub fn from_slices(names: &[&str], values: &[f64]) -> Env {
        assert_eq!(names.len(), values.len());
        let mut env = Env::new();
        for (k, v) in names.iter().zip(values) {
            env.set(k, *v);
        }
        env
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.values.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl Expr {
    /// Evaluates in `f64`.
    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        self.eval_with(&|name: &str| env.get(name))
    }

    /// Evaluates in any scalar with a lookup function for variables.
    pub fn eval_with<T: Scalar>(&self, lookup: &dyn Fn(&str) -> Option<T>) -> Result<T, EvalError> {
        let mut memo: HashMap<usize, T> = HashMap::new();
        self.eval_rec(lookup, &mut memo)
    }

    fn eval_rec<T: Scalar>(&self, lookup: &dyn Fn(&str) -> Option<T>, memo: &mut HashMap<usize, T>) -> Result<T, EvalError> {
        if let Some(v) = memo.get(&self.ptr_id()) {
            return Ok(*v);
        }
        let v = match self.node() {
            Node::Var(name) => lookup(name).ok_or_else(|| EvalError::Unbound(name.clone()))?,
            Node::Const(c) => T::lit(rational_to_f64(c)),
            Node::Add(a, b) => a.eval_rec(lookup, memo)? + b.eval_rec(lookup, memo)?,
            Node::Sub(a, b) => a.eval_rec(lookup, memo)? - b.eval_rec(lookup, memo)?,
            Node::Mul(a, b) => a.eval_rec(lookup, memo)? * b.eval_rec(lookup, memo)?,
            Node::Div(a, b) => {
                let x = a.eval_rec(lookup, memo)?;
                div(x, b.eval_rec(lookup, memo)?)?
            }
            Node::Neg(a) => -a.eval_rec(lookup, memo)?,
            Node::Pow(a, n) => powi(a.eval_rec(lookup, memo)?, *n)?,
            Node::Apply(f, a) => apply(*f, a.eval_rec(lookup, memo)?)?,
        };
        memo.insert(self.ptr_id(), v);
        Ok(v)
    }

    /// Compiles against a fixed variable ordering.
    pub fn compile(&self, vars: &[&str]) -> Result<CompiledExpr, EvalError> {
        CompiledExpr::new(std::slice::from_ref(self), vars)
    }
}

#[inline]
fn div<T: Scalar>(x: T, y: T) -> Result<T, EvalError> {
    if y.re() == 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    Ok(x / y)
}

#[inline]
fn powi<T: Scalar>(x: T, n: i32) -> Result<T, EvalError> {
    if n < 0 && x.re() == 0.0 {
        return Err(EvalError::ZeroToNegativePower(n));
    }
    Ok(x.powi(n))
}

#[inline]
fn apply<T: Scalar>(f: Func, x: T) -> Result<T, EvalError> {
    Ok(match f {
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Exp => x.exp(),
        Func::Log => {
            if x.re() <= 0.0 {
                return Err(EvalError::LogDomain(x.re()));
            }
            x.ln()
        }
    })
}

#[derive(Clone, Debug)]
enum Op {
    Slot(usize),
    Const(f64),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Neg(usize),
    Pow(usize, i32),
    Apply(Func, usize),
}

/// A batch of expressions lowered to one shared register program.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    ops: Vec<Op>,
    outputs: Vec<usize>,
    arity: usize,
}

impl CompiledExpr {
    /// Compiles several expressions at once so that common subtrees are
    /// evaluated once. Fails with [`EvalError::Unbound`] if an expression
    /// mentions a variable outside `vars`.
    pub fn new(exprs: &[Expr], vars: &[&str]) -> Result<CompiledExpr, EvalError> {
        let slots: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut b = Builder { ops: Vec::new(), memo: HashMap::new(), consts: HashMap::new(), slots: &slots };
        let outputs = exprs.iter().map(|e| b.lower(e)).collect::<Result<Vec<_>, _>>()?;
        Ok(CompiledExpr { ops: b.ops, outputs, arity: vars.len() })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Evaluates every output at `x`.
    pub fn eval_all<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>, EvalError> {
        assert_eq!(x.len(), self.arity, "compiled expression arity");
        let mut reg: Vec<T> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match *op {
                Op::Slot(i) => x[i],
                Op::Const(c) => T::lit(c),
                Op::Add(a, b) => reg[a] + reg[b],
                Op::Sub(a, b) => reg[a] - reg[b],
                Op::Mul(a, b) => reg[a] * reg[b],
                Op::Div(a, b) => div(reg[a], reg[b])?,
                Op::Neg(a) => -reg[a],
                Op::Pow(a, n) => powi(reg[a], n)?,
                Op::Apply(f, a) => apply(f, reg[a])?,
            };
            reg.push(v);
        }
        Ok(self.outputs.iter().map(|&i| reg[i]).collect())
    }

    /// Evaluates the first output.
    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<T, EvalError> {
        Ok(self.eval_all(x)?[0])
    }
}

struct Builder<'a> {
    ops: Vec<Op>,
    memo: HashMap<usize, usize>,
    consts: HashMap<u64, usize>,
    slots: &'a HashMap<&'a str, usize>,
}

impl Builder<'_> {
    fn push(&mut self, op: Op) -> usize {
        self.ops.push(op);
        self.ops.len() - 1
    }

    fn lower(&mut self, e: &Expr) -> Result<usize, EvalError> {
        if let Some(&r) = self.memo.get(&e.ptr_id()) {
            return Ok(r);
        }
        let r = match e.node() {
            Node::Var(name) => {
                let slot = *self.slots.get(name.as_str()).ok_or_else(|| EvalError::Unbound(name.clone()))?;
                self.push(Op::Slot(slot))
            }
            Node::Const(c) => {
                let v = rational_to_f64(c);
                match self.consts.get(&v.to_bits()) {
                    Some(&r) => r,
                    None => {
                        let r = self.push(Op::Const(v));
                        self.consts.insert(v.to_bits(), r);
                        r
                    }
                }
            }
            Node::Add(a, b) => {
                let (a, b) = (self.lower(a)?, self.lower(b)?);
                self.push(Op::Add(a, b))
            }
            Node::Sub(a, b) => {
                let (a, b) = (self.lower(a)?, self.lower(b)?);
                self.push(Op::Sub(a, b))
            }
            Node::Mul(a, b) => {
                let (a, b) = (self.lower(a)?, self.lower(b)?);
                self.push(Op::Mul(a, b))
            }
            Node::Div(a, b) => {
                let (a, b) = (self.lower(a)?, self.lower(b)?);
                self.push(Op::Div(a, b))
            }
            Node::Neg(a) => {
                let a = self.lower(a)?;
                self.push(Op::Neg(a))
            }
            Node::Pow(a, n) => {
                let a = self.lower(a)?;
                self.push(Op::Pow(a, *n))
            }
            Node::Apply(f, a) => {
                let a = self.lower(a)?;
                self.push(Op::Apply(*f, a))
            }
        };
        self.memo.insert(e.ptr_id(), r);
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Dual;

    #[test]
    fn basic_values() {
        let e = Expr::parse("x*y").unwrap();
        assert_eq!(e.eval(&Env::from_pairs(&[("x", 2.0), ("y", 3.0)])).unwrap(), 6.0);
        let e = Expr::parse("sin(x)").unwrap();
        assert_eq!(e.eval(&Env::from_pairs(&[("x", 0.0)])).unwrap(), 0.0);
        let e = Expr::parse("exp(log(x))").unwrap();
        assert!((e.eval(&Env::from_pairs(&[("x", 2.5)])).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        let env = Env::from_pairs(&[("x", 0.0)]);
        assert_eq!(Expr::parse("1/0").unwrap().eval(&env), Err(EvalError::DivisionByZero));
        assert_eq!(Expr::parse("1/0").unwrap().eval(&Env::new()), Err(EvalError::DivisionByZero));
        assert!(matches!(Expr::parse("log(x)").unwrap().eval(&env), Err(EvalError::LogDomain(_))));
        assert!(matches!(Expr::parse("x^(-1)").unwrap().eval(&env), Err(EvalError::ZeroToNegativePower(-1))));
        assert_eq!(Expr::parse("y").unwrap().eval(&env), Err(EvalError::Unbound("y".into())));
    }

    #[test]
    fn compiled_matches_tree_and_dual_gives_derivative() {
        let e = Expr::parse("x^3*cos(y) + exp(x*y)/(1 + y^2)").unwrap();
        let c = e.compile(&["x", "y"]).unwrap();
        let env = Env::from_pairs(&[("x", 0.4), ("y", -1.3)]);
        assert_eq!(c.eval(&[0.4, -1.3]).unwrap(), e.eval(&env).unwrap());
        let d = c.eval(&[Dual::variable(0.4), Dual::constant(-1.3)]).unwrap();
        let exact = e.diff("x").eval(&env).unwrap();
        assert!((d.eps - exact).abs() < 1e-13);
        assert!(matches!(e.compile(&["x"]), Err(EvalError::Unbound(_))));
    }

    #[test]
    fn f32_evaluation() {
        let e = Expr::parse("x*x + 1/2").unwrap();
        let v: f32 = e.eval_with(&|_| Some(2.0f32)).unwrap();
        assert_eq!(v, 4.5);
    }
}
