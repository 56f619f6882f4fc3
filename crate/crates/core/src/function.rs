//! Evaluable univariate `f(x)` and bivariate `H(a,b)` functions.

use crate::scalar::{Scalar, ScalarError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("no piecewise branch matched")]
    NoBranchMatched,
    #[error("variable `{0}` is not bound")]
    UnboundVariable(char),
    #[error("{func}({arg}) is outside the function's domain")]
    Domain { func: &'static str, arg: f64 },
    #[error("difference quotient evaluated on the diagonal without a derivative")]
    DiagonalUndefined,
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("nested integral did not converge (estimate {value}, error {error})")]
    NonConvergence { value: f64, error: f64 },
}

impl EvalError {
    pub fn mode(msg: impl Into<String>) -> Self {
        EvalError::Scalar(ScalarError::Mode(msg.into()))
    }
}

/// A function `H(a,b)` of two real variables.
pub trait Bivariate: Send + Sync {
    fn eval(&self, a: &Scalar, b: &Scalar) -> Result<Scalar, EvalError>;
}

/// A function `f(x)` of one real variable.
pub trait Univariate: Send + Sync {
    fn eval(&self, x: &Scalar) -> Result<Scalar, EvalError>;
}

impl<F> Bivariate for F
where
    F: Fn(&Scalar, &Scalar) -> Result<Scalar, EvalError> + Send + Sync,
{
    fn eval(&self, a: &Scalar, b: &Scalar) -> Result<Scalar, EvalError> {
        self(a, b)
    }
}

impl<F> Univariate for F
where
    F: Fn(&Scalar) -> Result<Scalar, EvalError> + Send + Sync,
{
    fn eval(&self, x: &Scalar) -> Result<Scalar, EvalError> {
        self(x)
    }
}

impl<T: Bivariate + ?Sized> Bivariate for std::sync::Arc<T> {
    fn eval(&self, a: &Scalar, b: &Scalar) -> Result<Scalar, EvalError> {
        (**self).eval(a, b)
    }
}

impl<T: Univariate + ?Sized> Univariate for std::sync::Arc<T> {
    fn eval(&self, x: &Scalar) -> Result<Scalar, EvalError> {
        (**self).eval(x)
    }
}

fn float_arg(s: &Scalar) -> Result<f64, EvalError> {
    match s {
        Scalar::Float(x) => Ok(*x),
        Scalar::Exact(_) => Err(EvalError::mode("float-only function called with an exact argument")),
    }
}

/// Wraps a plain `f64` closure as a float-only bivariate function.
pub struct FloatBivariate<F>(pub F);

impl<F> Bivariate for FloatBivariate<F>
where
    F: Fn(f64, f64) -> f64 + Send + Sync,
{
    fn eval(&self, a: &Scalar, b: &Scalar) -> Result<Scalar, EvalError> {
        Ok(Scalar::Float((self.0)(float_arg(a)?, float_arg(b)?)))
    }
}

/// Wraps a plain `f64` closure as a float-only univariate function.
pub struct FloatUnivariate<F>(pub F);

impl<F> Univariate for FloatUnivariate<F>
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn eval(&self, x: &Scalar) -> Result<Scalar, EvalError> {
        Ok(Scalar::Float((self.0)(float_arg(x)?)))
    }
}

/// Polynomial `Σ coeffs[n]·xⁿ`, evaluated by Horner's rule in the mode of
/// its coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Scalar>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Scalar>) -> Self {
        Self { coeffs }
    }

    pub fn from_f64(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().copied().map(Scalar::Float).collect())
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn derivative(&self) -> Polynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| {
                let n = Scalar::from_i64(c.mode(), n as i64);
                c.mul(&n).expect("coefficient and index share a mode")
            })
            .collect();
        Polynomial::new(coeffs)
    }
}

impl Univariate for Polynomial {
    fn eval(&self, x: &Scalar) -> Result<Scalar, EvalError> {
        let mut acc = Scalar::zero(x.mode());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x)?.add(c)?;
        }
        Ok(acc)
    }
}
