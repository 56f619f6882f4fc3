//! Reconstructing `f` from an accepted `H`, up to an additive constant.
//!
//! Three constructions are offered: `x·H(0,x) + C` from the additivity
//! identity, `∫₀ˣ H(s,s) ds + C` from the integral identity and
//! `Σ c_p x^{p+1} + C` from an anti-diagonal profile. None of them re-checks
//! that `H` is a difference quotient.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::function::{Bivariate, EvalError, Univariate};
use crate::quadrature::{integrate_diagonal, QuadratureConfig, QuadratureError};
use crate::scalar::{Mode, Scalar};

/// Breakpoints of the integral memo are `k / MEMO_STEPS`.
const MEMO_STEPS: usize = 32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecoverError {
    #[error("profile has no coefficient for anti-diagonal {0}")]
    MissingCoefficient(usize),
    #[error("coefficient c_{p} is {found} but the constant is {expected}")]
    Mode { p: usize, expected: Mode, found: Mode },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryKind {
    Algebraic,
    Integral,
    Series,
}

impl fmt::Display for RecoveryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecoveryKind::Algebraic => "algebraic",
            RecoveryKind::Integral => "integral",
            RecoveryKind::Series => "series",
        })
    }
}

/// Integrals over `[k/32, (k+1)/32]`, computed on first use.
struct IntegralMemo {
    segments: Vec<OnceLock<Result<(f64, f64), QuadratureError>>>,
}

impl IntegralMemo {
    fn new() -> Self {
        Self { segments: (0..MEMO_STEPS).map(|_| OnceLock::new()).collect() }
    }
}

#[derive(Clone)]
enum Payload {
    Algebraic(Arc<dyn Bivariate>),
    Integral { h: Arc<dyn Bivariate>, cfg: QuadratureConfig, memo: Arc<IntegralMemo> },
    Series(Vec<Scalar>),
}

/// A reconstructed `f`. Cloning shares the integral memo.
#[derive(Clone)]
pub struct RecoveredFunction {
    constant: Scalar,
    payload: Payload,
}

impl fmt::Debug for RecoveredFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("RecoveredFunction");
        d.field("kind", &self.kind()).field("constant", &self.constant);
        if let Payload::Series(c) = &self.payload {
            d.field("coefficients", c);
        }
        d.finish()
    }
}

impl RecoveredFunction {
    pub fn kind(&self) -> RecoveryKind {
        match self.payload {
            Payload::Algebraic(_) => RecoveryKind::Algebraic,
            Payload::Integral { .. } => RecoveryKind::Integral,
            Payload::Series(_) => RecoveryKind::Series,
        }
    }

    pub fn constant(&self) -> &Scalar {
        &self.constant
    }

    /// Same construction with a different constant.
    pub fn with_constant(&self, constant: Scalar) -> RecoveredFunction {
        RecoveredFunction { constant, payload: self.payload.clone() }
    }

    /// `(c_0, …, c_P)` for the series kind.
    pub fn series_coefficients(&self) -> Option<&[Scalar]> {
        match &self.payload {
            Payload::Series(c) => Some(c),
            _ => None,
        }
    }

    /// Formula in terms of `H`, for reports.
    pub fn formula(&self) -> String {
        match &self.payload {
            Payload::Algebraic(_) => format!("x*H(0,x) + {}", self.constant),
            Payload::Integral { .. } => format!("integral of H(s,s) over [0,x] + {}", self.constant),
            Payload::Series(c) => format!("sum of c_p*x^(p+1) for p <= {} + {}", c.len() - 1, self.constant),
        }
    }

    /// Series export: one `p c_p` line per coefficient, then `C <value>`.
    pub fn series_text(&self) -> Option<String> {
        let coeffs = self.series_coefficients()?;
        let mut out = String::new();
        for (p, c) in coeffs.iter().enumerate() {
            let _ = writeln!(out, "{p} {c}");
        }
        let _ = writeln!(out, "C {}", self.constant);
        Some(out)
    }

    fn check_mode(&self, x: &Scalar) -> Result<(), EvalError> {
        if x.mode() != self.constant.mode() {
            return Err(EvalError::mode(format!(
                "recovered function has a {} constant but x is {}",
                self.constant.mode(),
                x.mode()
            )));
        }
        Ok(())
    }

    fn integral_from_zero(
        h: &dyn Bivariate,
        cfg: &QuadratureConfig,
        memo: &IntegralMemo,
        x: f64,
    ) -> Result<f64, EvalError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(EvalError::Domain { func: "integral recovery", arg: x });
        }
        // each piece gets a share of the budget so the sum stays within it
        let piece_cfg = QuadratureConfig {
            target_abs_error: cfg.target_abs_error / (MEMO_STEPS + 1) as f64,
            ..*cfg
        };
        let integrate = |lo: f64, hi: f64| {
            integrate_diagonal(h, &Scalar::Float(lo), &Scalar::Float(hi), &piece_cfg).map(|(v, e)| (v.to_f64(), e))
        };
        let k = ((x * MEMO_STEPS as f64).floor() as usize).min(MEMO_STEPS);
        let mut total = 0.0;
        for (i, seg) in memo.segments[..k].iter().enumerate() {
            let lo = i as f64 / MEMO_STEPS as f64;
            let hi = (i + 1) as f64 / MEMO_STEPS as f64;
            let (v, _) = seg.get_or_init(|| integrate(lo, hi)).clone().map_err(quadrature_to_eval)?;
            total += v;
        }
        let start = k as f64 / MEMO_STEPS as f64;
        if x > start {
            let (v, _) = integrate(start, x).map_err(quadrature_to_eval)?;
            total += v;
        }
        Ok(total)
    }
}

fn quadrature_to_eval(e: QuadratureError) -> EvalError {
    match e {
        QuadratureError::Eval(e) => e,
        QuadratureError::NonConvergence { value, error_estimate, .. } => {
            EvalError::NonConvergence { value, error: error_estimate }
        }
        QuadratureError::NonFinite { value, .. } => EvalError::NonFinite(value),
        QuadratureError::InvalidInterval { b, .. } => EvalError::Domain { func: "integral recovery", arg: b },
        other => EvalError::mode(other.to_string()),
    }
}

impl Univariate for RecoveredFunction {
    fn eval(&self, x: &Scalar) -> Result<Scalar, EvalError> {
        self.check_mode(x)?;
        match &self.payload {
            Payload::Algebraic(h) => {
                if x.is_zero() {
                    return Ok(self.constant.clone());
                }
                let zero = Scalar::zero(x.mode());
                Ok(x.mul(&h.eval(&zero, x)?)?.add(&self.constant)?)
            }
            Payload::Integral { h, cfg, memo } => {
                let Scalar::Float(xf) = x else {
                    return Err(EvalError::mode("integral recovery runs in float mode only"));
                };
                let v = Self::integral_from_zero(h.as_ref(), cfg, memo, *xf)?;
                Ok(Scalar::Float(v).add(&self.constant)?)
            }
            Payload::Series(coeffs) => {
                let mut acc = Scalar::zero(x.mode());
                for c in coeffs.iter().rev() {
                    acc = acc.mul(x)?.add(c)?;
                }
                Ok(acc.mul(x)?.add(&self.constant)?)
            }
        }
    }
}

/// `f(0) = C`, `f(x) = x·H(0,x) + C` otherwise.
pub fn recover_algebraic(h: Arc<dyn Bivariate>, constant: Scalar) -> RecoveredFunction {
    RecoveredFunction { constant, payload: Payload::Algebraic(h) }
}

/// `f(x) = ∫₀ˣ H(s,s) ds + C`, float mode. Integrals up to each breakpoint
/// `k/32` are cached and shared between clones and threads.
pub fn recover_integral(h: Arc<dyn Bivariate>, constant: Scalar, cfg: QuadratureConfig) -> RecoveredFunction {
    RecoveredFunction {
        constant,
        payload: Payload::Integral { h, cfg, memo: Arc::new(IntegralMemo::new()) },
    }
}

/// `f(x) = Σ_{p ≤ order} c_p x^{p+1} + C`.
pub fn recover_series(
    profile: &BTreeMap<usize, Scalar>,
    constant: Scalar,
    order: usize,
) -> Result<RecoveredFunction, RecoverError> {
    let mut coeffs = Vec::with_capacity(order + 1);
    for p in 0..=order {
        let c = profile.get(&p).ok_or(RecoverError::MissingCoefficient(p))?;
        if c.mode() != constant.mode() {
            return Err(RecoverError::Mode { p, expected: constant.mode(), found: c.mode() });
        }
        coeffs.push(c.clone());
    }
    Ok(RecoveredFunction { constant, payload: Payload::Series(coeffs) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::BivariateExpr;
    use crate::function::FloatBivariate;
    use crate::scalar::QSqrt2;
    use proptest::prelude::*;

    fn h(src: &str) -> Arc<dyn Bivariate> {
        Arc::new(BivariateExpr::parse(src).unwrap())
    }

    fn ex(s: &str) -> Scalar {
        Scalar::exact(s.parse::<QSqrt2>().unwrap())
    }

    #[test]
    fn algebraic_examples() {
        let f = recover_algebraic(h("a + b"), Scalar::ratio(0, 1));
        assert_eq!(f.eval(&ex("1/3")).unwrap(), ex("1/9"));
        let f = recover_algebraic(h("5"), Scalar::ratio(2, 1));
        assert_eq!(f.eval(&ex("1/2")).unwrap(), ex("9/2"));
        assert_eq!(f.eval(&ex("0")).unwrap(), ex("2"));
        assert!(f.eval(&Scalar::Float(0.5)).is_err());
    }

    #[test]
    fn algebraic_at_zero_skips_h() {
        // H(0,0) is undefined here, f(0) must still be C
        let f = recover_algebraic(h("1/(b-a)"), Scalar::ratio(7, 1));
        assert_eq!(f.eval(&ex("0")).unwrap(), ex("7"));
    }

    #[test]
    fn dirichlet_recovery() {
        let dirichlet = "piecewise{ rat(a) && rat(b) : 0 ; !rat(a) && !rat(b) : 0 ; !rat(a) : 1/(b-a) ; true : -1/(b-a) }";
        let f = recover_algebraic(h(dirichlet), Scalar::ratio(1, 1));
        for (x, want) in [("1/3", "1"), ("1", "1"), ("1/2*sqrt2", "0"), ("1/4+1/3*sqrt2", "0")] {
            assert_eq!(f.eval(&ex(x)).unwrap(), ex(want), "x = {x}");
        }
    }

    #[test]
    fn integral_examples() {
        let cfg = QuadratureConfig::default();
        let avg = FloatBivariate(|a: f64, b: f64| if a == b { (a * a).exp() } else { f64::NAN });
        let f = recover_integral(Arc::new(avg), Scalar::Float(0.0), cfg);
        let v = f.eval(&Scalar::Float(1.0)).unwrap().to_f64();
        // Σ 1/(n!(2n+1))
        assert!((v - 1.4626517459071816).abs() < 1e-10, "{v}");
        let f = recover_integral(h("a + b"), Scalar::Float(0.0), cfg);
        for x in [0.1, 0.37, 0.5, 0.99] {
            assert!((f.eval(&Scalar::Float(x)).unwrap().to_f64() - x * x).abs() < 1e-12);
        }
        let f = recover_integral(h("a + b"), Scalar::Float(3.0), cfg);
        assert_eq!(f.eval(&Scalar::Float(0.0)).unwrap(), Scalar::Float(3.0));
        assert!(f.eval(&Scalar::Float(1.5)).is_err());
        assert!(f.eval(&ex("1/2")).is_err());
    }

    #[test]
    fn integral_nonconvergence_surfaces() {
        let cfg = QuadratureConfig::new(1e-12, 2).unwrap();
        let f = recover_integral(Arc::new(FloatBivariate(|a: f64, _b: f64| 1.0 / a.sqrt())), Scalar::Float(0.0), cfg);
        assert!(matches!(f.eval(&Scalar::Float(0.5)), Err(EvalError::NonConvergence { .. })));
    }

    #[test]
    fn integral_memo_is_deterministic_across_threads() {
        let f = recover_integral(h("exp(a*b)"), Scalar::Float(0.0), QuadratureConfig::default());
        let xs: Vec<f64> = (0..=40).map(|k| k as f64 / 40.0).collect();
        let fresh: Vec<f64> = xs
            .iter()
            .map(|&x| {
                let g = recover_integral(h("exp(a*b)"), Scalar::Float(0.0), QuadratureConfig::default());
                g.eval(&Scalar::Float(x)).unwrap().to_f64()
            })
            .collect();
        let threaded: Vec<Vec<f64>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..4)
                .map(|_| s.spawn(|| xs.iter().rev().map(|&x| f.eval(&Scalar::Float(x)).unwrap().to_f64()).collect::<Vec<_>>()))
                .collect();
            handles.into_iter().map(|t| t.join().unwrap()).collect()
        });
        for run in threaded {
            let run: Vec<f64> = run.into_iter().rev().collect();
            assert_eq!(run, fresh);
        }
    }

    #[test]
    fn series_examples() {
        let profile: BTreeMap<usize, Scalar> = [(0, Scalar::ratio(5, 1))].into();
        let f = recover_series(&profile, Scalar::ratio(2, 1), 0).unwrap();
        assert_eq!(f.eval(&ex("1/2")).unwrap(), ex("9/2"));
        assert_eq!(f.series_text().unwrap(), "0 5/1\nC 2/1\n");
        assert_eq!(
            recover_series(&BTreeMap::new(), Scalar::ratio(0, 1), 0).unwrap_err(),
            RecoverError::MissingCoefficient(0)
        );
        assert!(recover_series(&profile, Scalar::Float(0.0), 0).is_err());
    }

    #[test]
    fn series_xexp_truncation() {
        let mut fact = 1.0f64;
        let profile: BTreeMap<usize, Scalar> = (0..=20)
            .map(|p| {
                if p > 0 {
                    fact *= p as f64;
                }
                (p, Scalar::Float(1.0 / fact))
            })
            .collect();
        let f = recover_series(&profile, Scalar::Float(0.0), 20).unwrap();
        // tail Σ_{p>20} x^{p+1}/p! is below e/21! on [0,1]
        let bound = std::f64::consts::E / 51_090_942_171_709_440_000.0;
        for k in 0..=10 {
            let x = k as f64 / 10.0;
            let err = (f.eval(&Scalar::Float(x)).unwrap().to_f64() - x * x.exp()).abs();
            assert!(err <= bound + 4.0 * f64::EPSILON * x * x.exp() + 1e-300, "x = {x}: {err}");
        }
    }

    proptest! {
        #[test]
        fn constant_shift(c1 in -50i64..50, c2 in -50i64..50, num in 0i64..=64) {
            let x = Scalar::ratio(num, 64);
            let f1 = recover_algebraic(h("a^2 + a*b + b^2 - 3"), Scalar::ratio(c1, 3));
            let f2 = f1.with_constant(Scalar::ratio(c2, 3));
            let d = f1.eval(&x).unwrap().sub(&f2.eval(&x).unwrap()).unwrap();
            prop_assert_eq!(d, Scalar::ratio(c1 - c2, 3));

            let profile: BTreeMap<usize, Scalar> = (0..4).map(|p| (p, Scalar::ratio(p as i64 + 1, 2))).collect();
            let g1 = recover_series(&profile, Scalar::ratio(c1, 3), 3).unwrap();
            let g2 = g1.with_constant(Scalar::ratio(c2, 3));
            let d = g1.eval(&x).unwrap().sub(&g2.eval(&x).unwrap()).unwrap();
            prop_assert_eq!(d, Scalar::ratio(c1 - c2, 3));
        }

        #[test]
        fn integral_constant_shift(c1 in -4.0f64..4.0, c2 in -4.0f64..4.0, x in 0.0f64..=1.0) {
            let f1 = recover_integral(h("a + b"), Scalar::Float(c1), QuadratureConfig::default());
            let f2 = f1.with_constant(Scalar::Float(c2));
            let d = f1.eval(&Scalar::Float(x)).unwrap().to_f64() - f2.eval(&Scalar::Float(x)).unwrap().to_f64();
            prop_assert!((d - (c1 - c2)).abs() <= 4.0 * f64::EPSILON * (c1.abs() + c2.abs() + 1.0));
        }
    }
}
