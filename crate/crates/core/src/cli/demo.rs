//! The three built-in examples, with pinned plans.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::manifest::{CommandKind, CriterionSelection, DemoName, RunManifest};
use super::run::{CliError, Expectation, Input};
use crate::criteria::AlgebraicVariant;
use crate::expr::BivariateExpr;
use crate::function::{Bivariate, EvalError};
use crate::quadrature::{integrate, QuadratureConfig, QuadratureError};
use crate::scalar::{Mode, Scalar};
use crate::series::PowerSeries2D;

/// `H` for the Dirichlet function: zero when `a` and `b` are both rational
/// or both irrational, `±1/(b−a)` otherwise.
pub const DIRICHLET_H: &str =
    "piecewise{ rat(a) && rat(b) : 0 ; !rat(a) && !rat(b) : 0 ; !rat(a) : 1/(b-a) ; true : -1/(b-a) }";

pub const DIRICHLET_POOL: [&str; 9] =
    ["0", "1/4", "1/3", "1/2", "3/4", "1/2*sqrt2", "1/3*sqrt2", "3/4*sqrt2", "1"];

/// `∫₀¹ e^{s²} ds`, from 30 terms of `Σ 1/(n!(2n+1))`.
pub const INTEGRAL_EXP_SQUARED: f64 = 1.4626517459071816;

pub const XEXP_ORDER: usize = 20;

fn exact(text: &str) -> Scalar {
    Scalar::parse_in(Mode::Exact, text).expect("valid demo literal")
}

/// The pinned manifest for a demo.
pub fn manifest(name: DemoName) -> RunManifest {
    let base = RunManifest { command: CommandKind::Demo, demo: Some(name), ..RunManifest::default() };
    match name {
        DemoName::Dirichlet => RunManifest {
            expr: Some(DIRICHLET_H.into()),
            criterion: CriterionSelection::All,
            variant: AlgebraicVariant::Anchored,
            mode: Mode::Exact,
            count: 1000,
            min_gap: 0.0,
            pool: Some(DIRICHLET_POOL.iter().map(|s| exact(s)).collect()),
            constant: Some(exact("1")),
            ..base
        },
        DemoName::AvgExp => RunManifest {
            criterion: CriterionSelection::Integrable,
            seed: 31,
            count: 100,
            constant: Some(Scalar::Float(0.0)),
            ..base
        },
        DemoName::Xexp => RunManifest {
            criterion: CriterionSelection::Summation,
            mode: Mode::Exact,
            count: 1000,
            min_gap: 0.0,
            pool: Some((0..=10).map(|k| Scalar::ratio(k, 10)).collect()),
            constant: Some(exact("0")),
            ..base
        },
    }
}

/// `(1/(b−a)) ∫ₐᵇ e^{s²} ds`, and `e^{a²}` on the diagonal.
pub fn average_exp_squared() -> Arc<dyn Bivariate> {
    let cfg = QuadratureConfig { target_abs_error: 1e-12, ..QuadratureConfig::default() };
    Arc::new(move |a: &Scalar, b: &Scalar| -> Result<Scalar, EvalError> {
        let (Scalar::Float(a), Scalar::Float(b)) = (a, b) else {
            return Err(EvalError::mode("the average of e^(s^2) is float-only"));
        };
        let (lo, hi) = if a <= b { (*a, *b) } else { (*b, *a) };
        if lo == hi {
            return Ok(Scalar::Float((lo * lo).exp()));
        }
        match integrate(|s| Ok((s * s).exp()), lo, hi, &cfg) {
            Ok(r) => Ok(Scalar::Float(r.value / (hi - lo))),
            Err(QuadratureError::NonConvergence { value, error_estimate, .. }) => {
                Err(EvalError::NonConvergence { value, error: error_estimate })
            }
            Err(e) => Err(EvalError::mode(e.to_string())),
        }
    })
}

/// `c_ij = 1/(i+j)!`, the series of the difference quotient of `x·eˣ`.
pub fn xexp_series(order: usize) -> PowerSeries2D {
    let inv_factorial = |n: usize| {
        let f: BigInt = (1..=n as u64).map(BigInt::from).product();
        Scalar::from_rational(Mode::Exact, &BigRational::new(1.into(), f))
    };
    PowerSeries2D::from_fn(order, Mode::Exact, |i, j| inv_factorial(i + j)).expect("indices within order")
}

pub(crate) fn input(name: DemoName, m: &RunManifest) -> Result<(Input, Expectation), CliError> {
    Ok(match name {
        DemoName::Dirichlet => {
            let h = BivariateExpr::parse(m.expr.as_deref().unwrap_or(DIRICHLET_H))?;
            let input = Input { description: format!("H(a,b) = {h}"), h: Arc::new(h), series: None, f: None };
            let reference = Box::new(|x: &Scalar| {
                let rational = x.is_rational().ok()?;
                Some(Scalar::from_i64(Mode::Exact, rational as i64))
            });
            (input, Expectation { reference, tol: 0.0 })
        }
        DemoName::AvgExp => {
            let input = Input {
                h: average_exp_squared(),
                series: None,
                description: "H(a,b) = average of e^(s^2) over [a,b], e^(a^2) on the diagonal".into(),
                f: None,
            };
            let reference = Box::new(|x: &Scalar| (x.to_f64() == 1.0).then_some(Scalar::Float(INTEGRAL_EXP_SQUARED)));
            (input, Expectation { reference, tol: 1e-8 })
        }
        DemoName::Xexp => {
            let series = xexp_series(XEXP_ORDER);
            let series = if m.mode == Mode::Float { series.to_float() } else { series };
            let input = Input {
                description: format!("power series c_ij = 1/(i+j)! of order {XEXP_ORDER}"),
                h: Arc::new(series.clone()),
                series: Some(series),
                f: None,
            };
            let reference = Box::new(|x: &Scalar| {
                let x = x.to_f64();
                Some(Scalar::Float(x * x.exp()))
            });
            (input, Expectation { reference, tol: 1e-12 })
        }
    })
}
