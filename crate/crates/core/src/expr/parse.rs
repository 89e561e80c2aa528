//! Recursive-descent parser.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' exponent)?
//! exponent:= '-'? integer | '(' '-'? integer ')'
//! atom    := number | ident | func '(' expr ')' | '(' expr ')'
//! func    := 'sin' | 'cos' | 'exp' | 'log'
//! number  := digits ('.' digits)? (('e' | 'E') ('+' | '-')? digits)?
//! ident   := [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! Decimal and scientific literals are converted to exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use thiserror::Error;

use super::{Expr, Func};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown identifier `{name}` at line {line}, column {column}")]
    UnknownIdentifier { name: String, line: usize, column: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, column);
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, line: tl, column: tc });
            i += 1;
            column += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lit: String = chars[start..i].iter().collect();
            let value = parse_number(&lit).ok_or_else(|| ParseError::Syntax {
                line: tl,
                column: tc,
                message: format!("malformed number `{lit}`"),
            })?;
            column += i - start;
            out.push(Token { tok: Tok::Num(value), line: tl, column: tc });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            column += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: tl, column: tc });
            continue;
        }
        return Err(ParseError::Syntax { line: tl, column: tc, message: format!("unexpected character `{c}`") });
    }
    out.push(Token { tok: Tok::End, line, column });
    Ok(out)
}

fn parse_number(lit: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match lit.find(['e', 'E']) {
        Some(p) => (&lit[..p], lit[p + 1..].parse::<i32>().ok()?),
        None => (lit, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(p) => (&mantissa[..p], &mantissa[p + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let ten = BigInt::from(10);
    let scale = exponent - frac_part.len() as i32;
    let value = if scale >= 0 {
        BigRational::from_integer(numer * Pow::pow(&ten, scale as u32))
    } else {
        BigRational::new(numer, Pow::pow(&ten, scale.unsigned_abs()))
    };
    Some(value)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    vars: Option<&'a [&'a str]>,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, tok: &Token, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { line: tok.line, column: tok.column, message: message.into() })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(())
        } else {
            self.error(&t, format!("expected {what}, found {}", describe(&t.tok)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.next();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.next();
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Slash => {
                    self.next();
                    acc = acc.div(&self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.next();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.next();
        let paren = self.peek().tok == Tok::LParen;
        if paren {
            self.next();
        }
        let negative = self.peek().tok == Tok::Minus;
        if negative {
            self.next();
        }
        let t = self.next();
        let n = match &t.tok {
            Tok::Num(v) if v.is_integer() => v.to_integer(),
            _ => return self.error(&t, format!("expected integer exponent, found {}", describe(&t.tok))),
        };
        let n: i32 = match i32::try_from(n) {
            Ok(n) => n,
            Err(_) => return self.error(&t, "exponent out of range"),
        };
        if paren {
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(base.powi(if negative { -n } else { n }))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Num(v) => Ok(Expr::constant(v.clone())),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek().tok == Tok::LParen {
                    let Some(f) = Func::from_name(name) else {
                        return Err(ParseError::UnknownIdentifier { name: name.clone(), line: t.line, column: t.column });
                    };
                    self.next();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::apply(f, &arg));
                }
                if Func::from_name(name).is_some() {
                    return self.error(&t, format!("function `{name}` requires an argument"));
                }
                if let Some(vars) = self.vars {
                    if !vars.contains(&name.as_str()) {
                        return Err(ParseError::UnknownIdentifier { name: name.clone(), line: t.line, column: t.column });
                    }
                }
                Ok(Expr::var(name.clone()))
            }
            other => self.error(&t, format!("expected expression, found {}", describe(other))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number `{v}`"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

fn parse_with(text: &str, vars: Option<&[&str]>) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0, vars };
    let e = p.expr()?;
    let t = p.next();
    if t.tok != Tok::End {
        return p.error(&t, format!("unexpected {}", describe(&t.tok)));
    }
    Ok(e)
}

impl Expr {
    /// Parses an expression; any identifier not followed by `(` is a
    /// variable.
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        parse_with(text, None)
    }

    /// Parses an expression whose variables must come from `vars`.
    pub fn parse_in(text: &str, vars: &[&str]) -> Result<Expr, ParseError> {
        parse_with(text, Some(vars))
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Expr, ParseError> {
        Expr::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Node;

    #[test]
    fn grammar_cases() {
        let e = Expr::parse("x*y + sin(x)").unwrap();
        match e.node() {
            Node::Add(a, b) => {
                assert!(matches!(a.node(), Node::Mul(_, _)));
                assert!(matches!(b.node(), Node::Apply(Func::Sin, _)));
            }
            other => panic!("unexpected tree {other:?}"),
        }
        assert!(matches!(Expr::parse("log(y1)").unwrap().node(), Node::Apply(Func::Log, _)));
        assert!(matches!(Expr::parse("1/0").unwrap().node(), Node::Div(_, _)));
    }

    #[test]
    fn numbers_are_exact() {
        assert_eq!(Expr::parse("0.1").unwrap(), Expr::constant(BigRational::new(1.into(), 10.into())));
        assert_eq!(Expr::parse("2.5e-3").unwrap(), Expr::constant(BigRational::new(1.into(), 400.into())));
        assert_eq!(Expr::parse("1E2").unwrap(), Expr::int(100));
    }

    #[test]
    fn precedence() {
        let e = Expr::parse("-x^2").unwrap();
        assert!(matches!(e.node(), Node::Neg(_)));
        let e = Expr::parse("2^-1").unwrap();
        assert_eq!(e, Expr::constant(BigRational::new(1.into(), 2.into())));
        let e = Expr::parse("a - b - c").unwrap();
        match e.node() {
            Node::Sub(l, _) => assert!(matches!(l.node(), Node::Sub(_, _))),
            _ => panic!(),
        }
    }

    #[test]
    fn errors_carry_position() {
        let err = Expr::parse("x +\n  * y").unwrap_err();
        assert_eq!(err, ParseError::Syntax { line: 2, column: 3, message: "expected expression, found `*`".into() });
        let err = Expr::parse("foo(x)").unwrap_err();
        assert!(matches!(err, ParseError::UnknownIdentifier { ref name, line: 1, column: 1 } if name == "foo"));
        let err = Expr::parse_in("x + z", &["x", "y"]).unwrap_err();
        assert!(matches!(err, ParseError::UnknownIdentifier { ref name, column: 5, .. } if name == "z"));
        assert!(Expr::parse("(x").is_err());
        assert!(Expr::parse("x^1.5").is_err());
        assert!(Expr::parse("sin").is_err());
        assert!(Expr::parse("x $ y").is_err());
    }
}
