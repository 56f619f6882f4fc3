//! Expression language for `f(x)` and `H(a,b)`.
//!
//! ```text
//! expr      := term (('+'|'-') term)*
//! term      := factor (('*'|'/') factor)*
//! factor    := '-' factor | atom ['^' integer]
//! atom      := number | 'sqrt2' | var | name '(' expr ')' | '(' expr ')' | piecewise
//! piecewise := 'piecewise' '{' branch (';' branch)* '}'
//! branch    := pred ':' expr
//! pred      := 'true' | 'rat' '(' var ')' | expr ('<'|'<='|'==') expr
//!            | pred '&&' pred | pred '||' pred | '!' pred | '(' pred ')'
//! ```
//!
//! Numbers are decimal literals and are stored exactly, so `1/3` in exact
//! mode is the rational one third. Named functions are float-only.

mod eval;
mod parser;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::scalar::QSqrt2;

pub use eval::{BivariateExpr, Env, UnivariateExpr};
pub use parser::{parse_expr, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Univariate,
    Bivariate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    A,
    B,
    X,
}

impl Var {
    pub fn name(self) -> char {
        match self {
            Var::A => 'a',
            Var::B => 'b',
            Var::X => 'x',
        }
    }

    fn allowed_in(self, arity: Arity) -> bool {
        match arity {
            Arity::Univariate => self == Var::X,
            Arity::Bivariate => self != Var::X,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Ln,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(QSqrt2),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    /// Ordered branches; the first true guard wins.
    Piecewise(Vec<(Pred, Expr)>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pred {
    True,
    Lt(Expr, Expr),
    Le(Expr, Expr),
    Eq(Expr, Expr),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
    Rational(Var),
}

impl Expr {
    pub fn constant(value: QSqrt2) -> Expr {
        Expr::Const(value)
    }

    /// Whether any node requires float mode.
    pub fn is_float_only(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Call(..) => true,
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
                l.is_float_only() || r.is_float_only()
            }
            Expr::Pow(e, _) | Expr::Neg(e) => e.is_float_only(),
            Expr::Piecewise(branches) => branches.iter().any(|(_, e)| e.is_float_only()),
        }
    }
}

/// Writes a rational as a terminating decimal when it has one.
fn write_decimal(f: &mut fmt::Formatter<'_>, q: &BigRational) -> fmt::Result {
    let mut denom = q.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while denom.is_even() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    if !denom.is_one() {
        return write!(f, "({}/{})", q.numer(), q.denom());
    }
    let digits = twos.max(fives);
    let scaled = q * BigRational::from_integer(num_traits::pow(BigInt::from(10), digits));
    let n = scaled.to_integer();
    if n.is_negative() {
        // Not produced by the parser; keep it re-parseable.
        return write!(f, "(0 - {})", Decimal(&-n, digits));
    }
    write!(f, "{}", Decimal(&n, digits))
}

struct Decimal<'a>(&'a BigInt, usize);

impl fmt::Display for Decimal<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0.to_string();
        if self.1 == 0 {
            return f.write_str(&s);
        }
        let padded = format!("{:0>width$}", s, width = self.1 + 1);
        let (int_part, frac_part) = padded.split_at(padded.len() - self.1);
        write!(f, "{int_part}.{frac_part}")
    }
}

/// Prints a form that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.rational_part().is_zero() && c.surd_part().is_one() {
                    f.write_str("sqrt2")
                } else if c.is_rational() {
                    write_decimal(f, c.rational_part())
                } else {
                    f.write_str("(")?;
                    write_decimal(f, c.rational_part())?;
                    f.write_str(" + ")?;
                    write_decimal(f, c.surd_part())?;
                    f.write_str(" * sqrt2)")
                }
            }
            Expr::Var(v) => write!(f, "{}", v.name()),
            Expr::Add(l, r) => write!(f, "({l} + {r})"),
            Expr::Sub(l, r) => write!(f, "({l} - {r})"),
            Expr::Mul(l, r) => write!(f, "({l} * {r})"),
            Expr::Div(l, r) => write!(f, "({l} / {r})"),
            Expr::Pow(base, n) => match **base {
                Expr::Neg(_) | Expr::Pow(..) => write!(f, "({base})^{n}"),
                _ => write!(f, "{base}^{n}"),
            },
            Expr::Neg(e) => write!(f, "-{e}"),
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
            Expr::Piecewise(branches) => {
                f.write_str("piecewise{")?;
                for (i, (pred, expr)) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{pred} : {expr}")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pred::True => f.write_str("true"),
            Pred::Lt(l, r) => write!(f, "{l} < {r}"),
            Pred::Le(l, r) => write!(f, "{l} <= {r}"),
            Pred::Eq(l, r) => write!(f, "{l} == {r}"),
            Pred::And(l, r) => write!(f, "({l} && {r})"),
            Pred::Or(l, r) => write!(f, "({l} || {r})"),
            Pred::Not(p) => write!(f, "!{p}"),
            Pred::Rational(v) => write!(f, "rat({})", v.name()),
        }
    }
}
