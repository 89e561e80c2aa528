//! Canonical printing. The printed form re-parses to the same tree.

use std::fmt;

use num_traits::Signed;

use super::{Expr, Node};

const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn level(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(..) | Node::Sub(..) => ADD,
        Node::Mul(..) | Node::Div(..) => MUL,
        Node::Neg(_) => NEG,
        Node::Pow(..) => POW,
        Node::Const(c) if !c.is_integer() || c.is_negative() => MUL,
        Node::Var(_) | Node::Const(_) | Node::Apply(..) => ATOM,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn is_const_child(e: &Expr) -> bool {
    matches!(e.node(), Node::Const(c) if !c.is_integer() || c.is_negative())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Var(v) => write!(f, "{v}"),
            Node::Const(c) => {
                if c.is_integer() {
                    write!(f, "{}", c.numer())
                } else {
                    write!(f, "{}/{}", c.numer(), c.denom())
                }
            }
            Node::Add(a, b) | Node::Sub(a, b) => {
                let op = if matches!(self.node(), Node::Add(..)) { "+" } else { "-" };
                write_child(f, a, level(a) < ADD || is_const_child(a))?;
                write!(f, " {op} ")?;
                write_child(f, b, level(b) <= ADD || is_const_child(b))
            }
            Node::Mul(a, b) | Node::Div(a, b) => {
                let op = if matches!(self.node(), Node::Mul(..)) { "*" } else { "/" };
                write_child(f, a, level(a) < MUL || is_const_child(a))?;
                write!(f, "{op}")?;
                write_child(f, b, level(b) <= MUL || is_const_child(b))
            }
            Node::Neg(a) => {
                write!(f, "-")?;
                write_child(f, a, level(a) <= NEG || is_const_child(a))
            }
            Node::Pow(a, n) => {
                write_child(f, a, level(a) < ATOM)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            Node::Apply(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(s: &str) -> String {
        let e = Expr::parse(s).unwrap();
        let printed = e.to_string();
        let again = Expr::parse(&printed).unwrap();
        assert_eq!(again, e, "tree changed for {s} -> {printed}");
        assert_eq!(again.to_string(), printed);
        printed
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(roundtrip("x*y+sin(x)"), "x*y + sin(x)");
        assert_eq!(roundtrip("a-(b-c)"), "a - (b - c)");
        assert_eq!(roundtrip("(a-b)-c"), "a - b - c");
        assert_eq!(roundtrip("a/(b*c)"), "a/(b*c)");
        assert_eq!(roundtrip("-(x+y)"), "-(x + y)");
        assert_eq!(roundtrip("(-x)^2"), "(-x)^2");
        assert_eq!(roundtrip("-x^2"), "-x^2");
        assert_eq!(roundtrip("x^(-2)"), "x^(-2)");
        assert_eq!(roundtrip("0.5*x"), "(1/2)*x");
        assert_eq!(roundtrip("x - -3"), "x - (-3)");
        assert_eq!(roundtrip("1/0"), "1/0");
        assert_eq!(roundtrip("(x*y)^3"), "(x*y)^3");
        assert_eq!(roundtrip("exp(log(x))"), "exp(log(x))");
        assert_eq!(roundtrip("2/3"), "2/3");
        assert_eq!(roundtrip("x*-y"), "x*-y");
    }
}
