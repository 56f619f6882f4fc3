//! Chord against integrated diagonal: `(b−a)H(a,b) = ∫ₐᵇ H(s,s) ds`.

use super::{check_increasing, CriterionError, CriterionKind, CriterionReport, ReportBuilder, SamplePoint};
use crate::function::Bivariate;
use crate::quadrature::{integrate_diagonal, QuadratureConfig, QuadratureError};
use crate::sampling::{gen_pairs, SamplingPlan};
use crate::scalar::{Mode, Scalar, Tolerance};

/// Residual terms for one pair.
struct Terms {
    residual: f64,
    chord: f64,
    integral: f64,
    quad_error: f64,
}

fn terms<H: Bivariate + ?Sized>(h: &H, a: &Scalar, b: &Scalar, cfg: &QuadratureConfig) -> Result<Terms, CriterionError> {
    let chord = h.eval(a, b)?.mul(&b.sub(a)?)?.to_f64();
    let (integral, quad_error) = integrate_diagonal(h, a, b, cfg)?;
    let integral = integral.to_f64();
    Ok(Terms { residual: chord - integral, chord, integral, quad_error })
}

/// `(b−a)H(a,b) − ∫ₐᵇ H(s,s) ds` and the quadrature error estimate, for
/// float points `0 ≤ a < b ≤ 1`.
pub fn integrable_residual<H: Bivariate + ?Sized>(
    h: &H,
    a: &Scalar,
    b: &Scalar,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64), CriterionError> {
    check_increasing(&[a, b], "0 ≤ a < b ≤ 1")?;
    if a.mode() != Mode::Float {
        return Err(CriterionError::Mode("the integral check runs in float mode only".into()));
    }
    terms(h, a, b, cfg).map(|t| (t.residual, t.quad_error))
}

/// Samples the integral identity over float pairs.
///
/// A sample passes when the residual is within tolerance of
/// `max(|(b−a)H|, |∫|)` and the quadrature error estimate is too. It fails
/// when the residual exceeds the tolerance by more than the quadrature
/// error, and is inconclusive in between or when quadrature does not
/// converge.
pub fn run_integrable<H: Bivariate + ?Sized>(
    h: &H,
    plan: &SamplingPlan,
    tol: &Tolerance,
    cfg: &QuadratureConfig,
) -> Result<CriterionReport, CriterionError> {
    if plan.mode != Mode::Float {
        return Err(CriterionError::Mode("the integral check runs in float mode only".into()));
    }
    let mut report = ReportBuilder::for_plan(CriterionKind::Integrable, plan, *tol);
    for (index, (a, b)) in gen_pairs(plan)?.into_iter().enumerate() {
        let t = match terms(h, &a, &b, cfg) {
            Ok(t) => t,
            Err(CriterionError::Quadrature(QuadratureError::NonConvergence { error_estimate, .. })) => {
                report.record_inconclusive(index, format!("quadrature did not converge (error {error_estimate:e})"));
                continue;
            }
            Err(e) => {
                report.record_inconclusive(index, e);
                continue;
            }
        };
        let reference = t.chord.abs().max(t.integral.abs());
        let budget = tol.abs_tol + tol.rel_tol * reference;
        let point = SamplePoint::Pair { a, b };
        if t.residual.abs() <= budget && t.quad_error <= budget {
            report.record_outcome(index, point, Scalar::Float(t.residual), true);
        } else if t.residual.abs() - t.quad_error > budget || t.residual.is_nan() {
            report.record_outcome(index, point, Scalar::Float(t.residual), false);
        } else {
            report.record_inconclusive(
                index,
                format!("residual {:e} within quadrature error {:e}", t.residual, t.quad_error),
            );
        }
    }
    Ok(report.finish())
}
