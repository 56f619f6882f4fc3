use std::cmp::Ordering;
use std::fmt;

use super::{parse_expr, Arity, Expr, Func, ParseError, Pred, Var};
use crate::function::{Bivariate, EvalError, Univariate};
use crate::scalar::{Mode, Scalar};

/// Variable bindings for evaluation.
#[derive(Debug, Clone, Default)]
pub struct Env {
    pub a: Option<Scalar>,
    pub b: Option<Scalar>,
    pub x: Option<Scalar>,
}

impl Env {
    pub fn bivariate(a: Scalar, b: Scalar) -> Self {
        Env { a: Some(a), b: Some(b), x: None }
    }

    pub fn univariate(x: Scalar) -> Self {
        Env { x: Some(x), ..Env::default() }
    }

    fn get(&self, var: Var) -> Result<&Scalar, EvalError> {
        let slot = match var {
            Var::A => &self.a,
            Var::B => &self.b,
            Var::X => &self.x,
        };
        slot.as_ref().ok_or(EvalError::UnboundVariable(var.name()))
    }
}

impl Expr {
    /// Evaluates in `mode`. Every bound variable must already be in `mode`.
    /// Only the branch selected by a piecewise guard is evaluated.
    pub fn eval(&self, env: &Env, mode: Mode) -> Result<Scalar, EvalError> {
        match self {
            Expr::Const(c) => match mode {
                Mode::Exact => Ok(Scalar::Exact(c.clone())),
                Mode::Float => Ok(Scalar::Float(c.to_f64())),
            },
            Expr::Var(v) => {
                let value = env.get(*v)?;
                if value.mode() != mode {
                    return Err(EvalError::mode(format!(
                        "variable `{}` is {} but evaluation is in {mode} mode",
                        v.name(),
                        value.mode()
                    )));
                }
                Ok(value.clone())
            }
            Expr::Add(l, r) => Ok(l.eval(env, mode)?.add(&r.eval(env, mode)?)?),
            Expr::Sub(l, r) => Ok(l.eval(env, mode)?.sub(&r.eval(env, mode)?)?),
            Expr::Mul(l, r) => Ok(l.eval(env, mode)?.mul(&r.eval(env, mode)?)?),
            Expr::Div(l, r) => Ok(l.eval(env, mode)?.div(&r.eval(env, mode)?)?),
            Expr::Pow(base, n) => Ok(base.eval(env, mode)?.pow(*n)),
            Expr::Neg(e) => Ok(e.eval(env, mode)?.neg()),
            Expr::Call(func, arg) => {
                if mode == Mode::Exact {
                    return Err(EvalError::mode(format!("{}() is float-only", func.name())));
                }
                let x = arg.eval(env, mode)?.to_f64();
                let y = match func {
                    Func::Exp => x.exp(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Ln if x > 0.0 => x.ln(),
                    Func::Sqrt if x >= 0.0 => x.sqrt(),
                    Func::Ln | Func::Sqrt => return Err(EvalError::Domain { func: func.name(), arg: x }),
                };
                Ok(Scalar::Float(y))
            }
            Expr::Piecewise(branches) => {
                for (guard, value) in branches {
                    if guard.holds(env, mode)? {
                        return value.eval(env, mode);
                    }
                }
                Err(EvalError::NoBranchMatched)
            }
        }
    }
}

impl Pred {
    pub fn holds(&self, env: &Env, mode: Mode) -> Result<bool, EvalError> {
        let cmp = |l: &Expr, r: &Expr| -> Result<Ordering, EvalError> {
            Ok(l.eval(env, mode)?.compare(&r.eval(env, mode)?)?)
        };
        Ok(match self {
            Pred::True => true,
            Pred::Lt(l, r) => cmp(l, r)? == Ordering::Less,
            Pred::Le(l, r) => cmp(l, r)? != Ordering::Greater,
            Pred::Eq(l, r) => cmp(l, r)? == Ordering::Equal,
            Pred::And(l, r) => l.holds(env, mode)? && r.holds(env, mode)?,
            Pred::Or(l, r) => l.holds(env, mode)? || r.holds(env, mode)?,
            Pred::Not(p) => !p.holds(env, mode)?,
            Pred::Rational(v) => {
                let value = env.get(*v)?;
                if mode == Mode::Float || value.mode() == Mode::Float {
                    return Err(EvalError::mode("rat() requires exact mode"));
                }
                value.is_rational()?
            }
        })
    }
}

fn common_mode(a: &Scalar, b: &Scalar) -> Result<Mode, EvalError> {
    if a.mode() != b.mode() {
        return Err(EvalError::mode("arguments a and b are in different modes"));
    }
    Ok(a.mode())
}

/// A parsed `H(a,b)`, evaluated in the mode of its arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateExpr {
    ast: Expr,
}

impl BivariateExpr {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        parse_expr(source, Arity::Bivariate).map(|ast| Self { ast })
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }
}

impl Bivariate for BivariateExpr {
    fn eval(&self, a: &Scalar, b: &Scalar) -> Result<Scalar, EvalError> {
        let mode = common_mode(a, b)?;
        self.ast.eval(&Env::bivariate(a.clone(), b.clone()), mode)
    }
}

impl fmt::Display for BivariateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

/// A parsed `f(x)`, evaluated in the mode of its argument.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateExpr {
    ast: Expr,
}

impl UnivariateExpr {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        parse_expr(source, Arity::Univariate).map(|ast| Self { ast })
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }
}

impl Univariate for UnivariateExpr {
    fn eval(&self, x: &Scalar) -> Result<Scalar, EvalError> {
        self.ast.eval(&Env::univariate(x.clone()), x.mode())
    }
}

impl fmt::Display for UnivariateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}
