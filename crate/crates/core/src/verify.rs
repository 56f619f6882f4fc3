//! Forward construction `DQ_f`, round trips and the partial-derivative
//! identity `∂ₐDQ_f + ∂_bDQ_f = DQ_{f′}`.

use std::sync::Arc;

use crate::criteria::{CriterionError, CriterionKind, CriterionReport, ReportBuilder, SamplePoint};
use crate::function::{Bivariate, EvalError, Polynomial, Univariate};
use crate::sampling::{gen_pairs, SamplingPlan};
use crate::scalar::{Mode, Scalar, Tolerance};
use crate::series::{PowerSeries2D, SeriesError};

/// Default step for the central differences.
pub const DEFAULT_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("step {step} needs pairs at least {} apart, but min_gap is {min_gap}", 4.0 * step)]
    StepTooLarge { step: f64, min_gap: f64 },
    #[error("{0}")]
    Mode(String),
    #[error(transparent)]
    Criterion(#[from] CriterionError),
}

/// `DQ_f`, extended symmetrically off the diagonal and by `f′` on it.
#[derive(Clone)]
pub struct DQView {
    f: Arc<dyn Univariate>,
    df: Option<Arc<dyn Univariate>>,
}

pub fn dq_of(f: Arc<dyn Univariate>, df: Option<Arc<dyn Univariate>>) -> DQView {
    DQView { f, df }
}

impl Bivariate for DQView {
    fn eval(&self, a: &Scalar, b: &Scalar) -> Result<Scalar, EvalError> {
        let (lo, hi) = match a.compare(b)? {
            std::cmp::Ordering::Less => (a, b),
            std::cmp::Ordering::Greater => (b, a),
            std::cmp::Ordering::Equal => {
                return match &self.df {
                    Some(df) => df.eval(a),
                    None => Err(EvalError::DiagonalUndefined),
                };
            }
        };
        Ok(self.f.eval(hi)?.sub(&self.f.eval(lo)?)?.div(&hi.sub(lo)?)?)
    }
}

/// The series of `DQ_p` for a polynomial `p = Σ a_n xⁿ`: `c_ij = a_{i+j+1}`.
pub fn polynomial_dq_series(p: &Polynomial) -> Result<PowerSeries2D, SeriesError> {
    let coeffs = p.coeffs();
    let mode = coeffs.first().map(Scalar::mode).unwrap_or(Mode::Exact);
    let order = coeffs.len().saturating_sub(2);
    PowerSeries2D::from_fn(order, mode, |i, j| {
        coeffs.get(i + j + 1).cloned().unwrap_or_else(|| Scalar::zero(mode))
    })
}

/// Compares `DQ_f` with `H` on sampled pairs. `f` is typically a recovered
/// function; the residual `DQ_f(a,b) − H(a,b)` is judged against
/// `max(|DQ_f|, |H|)`.
pub fn roundtrip_check<H, F>(h: &H, f: &F, plan: &SamplingPlan, tol: &Tolerance) -> Result<CriterionReport, CriterionError>
where
    H: Bivariate + ?Sized,
    F: Univariate + ?Sized,
{
    let mut report = ReportBuilder::for_plan(CriterionKind::Roundtrip, plan, *tol);
    for (index, (a, b)) in gen_pairs(plan)?.into_iter().enumerate() {
        let sample = || -> Result<(Scalar, f64), EvalError> {
            let dq = f.eval(&b)?.sub(&f.eval(&a)?)?.div(&b.sub(&a)?)?;
            let hv = h.eval(&a, &b)?;
            let reference = dq.to_f64().abs().max(hv.to_f64().abs());
            Ok((dq.sub(&hv)?, reference))
        };
        match sample() {
            Ok((residual, reference)) => report.record(index, SamplePoint::Pair { a, b }, residual, reference),
            Err(e) => report.record_inconclusive(index, e),
        }
    }
    Ok(report.finish())
}

/// One central-difference evaluation of the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialsSample {
    /// `∂ₐDQ_f + ∂_bDQ_f` by central differences with step `h`.
    pub approx: f64,
    /// `DQ_{f′}(a,b)`.
    pub target: f64,
    /// The same sum with step `2h`.
    pub approx_double_step: f64,
    /// `max |f|` over the points used, for the rounding estimate.
    pub f_scale: f64,
}

impl PartialsSample {
    pub fn residual(&self) -> f64 {
        self.approx - self.target
    }

    /// Error budget of the difference scheme: a Richardson estimate of the
    /// `O(h²)` truncation error plus cancellation in the quotients.
    pub fn allowance(&self, a: f64, b: f64, h: f64) -> f64 {
        let truncation = (self.approx_double_step - self.approx).abs() / 3.0;
        let rounding = 16.0 * f64::EPSILON * self.f_scale / (h * (b - a));
        2.0 * truncation + rounding
    }
}

fn float_of(s: Scalar) -> Result<f64, EvalError> {
    match s {
        Scalar::Float(x) => Ok(x),
        Scalar::Exact(_) => Err(EvalError::mode("the partials identity runs in float mode only")),
    }
}

/// Evaluates both sides of the identity at `a < b` with step `h`.
pub fn partials_sample<F, D>(f: &F, df: &D, a: f64, b: f64, h: f64) -> Result<PartialsSample, EvalError>
where
    F: Univariate + ?Sized,
    D: Univariate + ?Sized,
{
    let mut scale: f64 = 0.0;
    let mut fx = |x: f64| -> Result<f64, EvalError> {
        let v = float_of(f.eval(&Scalar::Float(x))?)?;
        scale = scale.max(v.abs());
        Ok(v)
    };
    let (fa, fb) = (fx(a)?, fx(b)?);
    let mut sum = |step: f64| -> Result<f64, EvalError> {
        let (fap, fam, fbp, fbm) = (fx(a + step)?, fx(a - step)?, fx(b + step)?, fx(b - step)?);
        let q = |x: f64, fxv: f64, y: f64, fyv: f64| (fyv - fxv) / (y - x);
        let da = (q(a + step, fap, b, fb) - q(a - step, fam, b, fb)) / (2.0 * step);
        let db = (q(a, fa, b + step, fbp) - q(a, fa, b - step, fbm)) / (2.0 * step);
        Ok(da + db)
    };
    let approx = sum(h)?;
    let approx_double_step = sum(2.0 * h)?;
    let target = (float_of(df.eval(&Scalar::Float(b))?)? - float_of(df.eval(&Scalar::Float(a))?)?) / (b - a);
    Ok(PartialsSample { approx, target, approx_double_step, f_scale: scale })
}

/// Checks `∂ₐDQ_f + ∂_bDQ_f = DQ_{f′}` on float pairs with central
/// differences of step `h`. A sample passes when the residual is within
/// `tol` of `|DQ_{f′}|` plus the scheme's own error allowance; the largest
/// allowance used is noted in the report.
pub fn partials_identity_check<F, D>(
    f: &F,
    df: &D,
    plan: &SamplingPlan,
    h: f64,
    tol: &Tolerance,
) -> Result<CriterionReport, VerifyError>
where
    F: Univariate + ?Sized,
    D: Univariate + ?Sized,
{
    if plan.mode != Mode::Float {
        return Err(VerifyError::Mode("the partials identity runs in float mode only".into()));
    }
    if !(h.is_finite() && h > 0.0) || plan.min_gap < 4.0 * h {
        return Err(VerifyError::StepTooLarge { step: h, min_gap: plan.min_gap });
    }
    let mut report = ReportBuilder::for_plan(CriterionKind::PartialsIdentity, plan, *tol);
    let mut widest: f64 = 0.0;
    for (index, (a, b)) in gen_pairs(plan).map_err(CriterionError::from)?.into_iter().enumerate() {
        let (af, bf) = (a.to_f64(), b.to_f64());
        match partials_sample(f, df, af, bf, h) {
            Ok(s) => {
                let allowance = s.allowance(af, bf, h);
                widest = widest.max(allowance);
                let r = s.residual();
                let passed = r.abs() <= tol.abs_tol + tol.rel_tol * s.target.abs() + allowance;
                report.record_outcome(index, SamplePoint::Pair { a, b }, Scalar::Float(r), passed);
            }
            Err(e) => report.record_inconclusive(index, e),
        }
    }
    report.note(format!("step {h:e}, largest difference-scheme allowance {widest:e}"));
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::{run_algebraic, run_integrable, run_matrix, summation_check, AlgebraicVariant, Verdict};
    use crate::expr::{BivariateExpr, UnivariateExpr};
    use crate::quadrature::QuadratureConfig;
    use crate::recover::{recover_algebraic, recover_integral, recover_series};
    use proptest::prelude::*;

    fn u(src: &str) -> Arc<dyn Univariate> {
        Arc::new(UnivariateExpr::parse(src).unwrap())
    }

    #[test]
    fn dq_examples() {
        let sq = dq_of(u("x^2"), None);
        let (q1, q3) = (Scalar::ratio(1, 4), Scalar::ratio(3, 4));
        assert_eq!(sq.eval(&q1, &q3).unwrap(), Scalar::ratio(1, 1));
        assert_eq!(sq.eval(&q3, &q1).unwrap(), Scalar::ratio(1, 1));
        assert!(matches!(sq.eval(&q1, &q1), Err(EvalError::DiagonalUndefined)));
        let cube = dq_of(u("x^3"), Some(u("3*x^2")));
        let half = Scalar::ratio(1, 2);
        assert_eq!(cube.eval(&half, &half).unwrap(), Scalar::ratio(3, 4));
    }

    #[test]
    fn polynomial_series() {
        // p = 1 + 2x + 3x² + 4x³: c_00 = 2, c_10 = c_01 = 3, c_ij = 4 on p = 2
        let p = Polynomial::new((1..=4).map(|n| Scalar::ratio(n, 1)).collect());
        let s = polynomial_dq_series(&p).unwrap();
        assert_eq!(s.order(), 2);
        assert_eq!(s.get(0, 0), Scalar::ratio(2, 1));
        assert_eq!(s.get(0, 1), Scalar::ratio(3, 1));
        assert_eq!(s.get(1, 1), Scalar::ratio(4, 1));
        let (a, b) = (Scalar::ratio(1, 5), Scalar::ratio(2, 3));
        let dq = dq_of(Arc::new(p), None);
        assert_eq!(s.eval(&a, &b).unwrap(), dq.eval(&a, &b).unwrap());
    }

    #[test]
    fn roundtrip_examples() {
        let h = BivariateExpr::parse("a*b").unwrap();
        let f = recover_algebraic(Arc::new(h.clone()), Scalar::Float(0.0));
        let r = roundtrip_check(&h, &f, &SamplingPlan::float(9, 32), &Tolerance::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Reject);
        let h = BivariateExpr::parse("a^2 + a*b + b^2").unwrap();
        let f = recover_algebraic(Arc::new(h.clone()), Scalar::Float(0.0));
        let r = roundtrip_check(&h, &f, &SamplingPlan::float(9, 32), &Tolerance::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Accept);
    }

    #[test]
    fn partials_examples() {
        let plan = SamplingPlan::float(4, 32).with_min_gap(0.01);
        let tol = Tolerance::new(1e-6, 0.0).unwrap();
        let r = partials_identity_check(&*u("x^3"), &*u("3*x^2"), &plan, 1e-4, &tol).unwrap();
        assert_eq!(r.verdict, Verdict::Accept);
        assert!(r.max_residual <= 1e-6);
        let r = partials_identity_check(&*u("5*x"), &*u("5"), &plan, 1e-4, &tol).unwrap();
        assert_eq!(r.verdict, Verdict::Accept);
        assert!(r.max_residual <= 1e-6);
        let r = partials_identity_check(&*u("exp(x)"), &*u("exp(x)"), &plan, 1e-4, &Tolerance::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Accept, "{r:?}");
        assert!(r.max_residual <= 1e-6);
        // a wrong derivative is caught
        let r = partials_identity_check(&*u("exp(x)"), &*u("exp(x) + x"), &plan, 1e-4, &Tolerance::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Reject);
    }

    #[test]
    fn partials_step_guard() {
        let plan = SamplingPlan::float(4, 8).with_min_gap(1e-3);
        assert!(matches!(
            partials_identity_check(&*u("x"), &*u("1"), &plan, 1e-3, &Tolerance::default()),
            Err(VerifyError::StepTooLarge { .. })
        ));
    }

    #[test]
    fn halving_step_is_second_order() {
        for (f, df) in [("exp(2*x)", "2*exp(2*x)"), ("sin(3*x)", "3*cos(3*x)")] {
            let (f, df) = (u(f), u(df));
            let max_res = |h: f64| -> f64 {
                gen_pairs(&SamplingPlan::float(12, 32).with_min_gap(0.1))
                    .unwrap()
                    .iter()
                    .map(|(a, b)| partials_sample(&*f, &*df, a.to_f64(), b.to_f64(), h).unwrap().residual().abs())
                    .fold(0.0, f64::max)
            };
            let ratio = max_res(1e-3) / max_res(5e-4);
            assert!((3.5..=4.5).contains(&ratio), "{ratio}");
        }
    }

    fn poly_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-2.0f64..2.0, 1..=7)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn polynomial_dq_passes_every_criterion(coeffs in poly_strategy(), seed in 0u64..1000) {
            let p = Polynomial::from_f64(&coeffs);
            let dq = dq_of(Arc::new(p.clone()), Some(Arc::new(p.derivative())));
            let plan = SamplingPlan::float(seed, 64);
            let tol = Tolerance::default();
            for variant in [AlgebraicVariant::Triple, AlgebraicVariant::Anchored] {
                prop_assert_eq!(run_algebraic(&dq, &plan, &tol, variant).unwrap().verdict, Verdict::Accept);
            }
            prop_assert_eq!(run_matrix(&dq, &plan, &tol).unwrap().verdict, Verdict::Accept);
            let r = run_integrable(&dq, &plan, &tol, &QuadratureConfig::default()).unwrap();
            prop_assert_eq!(r.verdict, Verdict::Accept, "{:?}", r);
        }

        #[test]
        fn symmetric_extension(coeffs in poly_strategy(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assume!(a != b);
            let dq = dq_of(Arc::new(Polynomial::from_f64(&coeffs)), None);
            let (x, y) = (Scalar::Float(a), Scalar::Float(b));
            prop_assert_eq!(dq.eval(&x, &y).unwrap(), dq.eval(&y, &x).unwrap());
        }

        // f(0) = 0 polynomials are recovered by all three constructions
        #[test]
        fn recoveries_agree(tail in prop::collection::vec(-2.0f64..2.0, 1..=6)) {
            let mut coeffs = vec![0.0];
            coeffs.extend(tail);
            let p = Polynomial::from_f64(&coeffs);
            let dq: Arc<dyn Bivariate> = Arc::new(dq_of(Arc::new(p.clone()), Some(Arc::new(p.derivative()))));
            let cfg = QuadratureConfig::default();
            let zero = Scalar::Float(0.0);
            let series = polynomial_dq_series(&p).unwrap();
            let profile = summation_check(&series, &Tolerance::default()).profile;
            let recovered = [
                recover_algebraic(dq.clone(), zero.clone()),
                recover_integral(dq.clone(), zero.clone(), cfg),
                recover_series(&profile, zero, series.order()).unwrap(),
            ];
            for k in 0..=32 {
                let x = Scalar::Float(k as f64 / 32.0);
                let want = p.eval(&x).unwrap().to_f64();
                for g in &recovered {
                    let got = g.eval(&x).unwrap().to_f64();
                    prop_assert!((got - want).abs() <= 10.0 * cfg.target_abs_error, "{:?} at {}: {} vs {}", g.kind(), k, got, want);
                }
            }
        }
    }
}
