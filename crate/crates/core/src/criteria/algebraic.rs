//! Chord additivity: `H(a,c)(c−a) = H(a,b)(b−a) + H(b,c)(c−b)`.
//!
//! Residuals are kept in cleared-denominator form so near-diagonal samples
//! do not divide small float errors by small gaps.

use serde::{Deserialize, Serialize};

use super::{check_increasing, max_abs, CriterionError, CriterionKind, CriterionReport, ReportBuilder, SamplePoint};
use crate::function::Bivariate;
use crate::sampling::{gen_pairs, gen_triples, SamplingPlan};
use crate::scalar::{Scalar, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraicVariant {
    /// All triples `0 ≤ a < b < c ≤ 1`.
    Triple,
    /// Triples anchored at `a = 0`, i.e. pairs `0 < b < c ≤ 1`.
    Anchored,
}

/// Residual and the largest term, used as the reference magnitude.
fn triple_terms<H: Bivariate + ?Sized>(
    h: &H,
    a: &Scalar,
    b: &Scalar,
    c: &Scalar,
) -> Result<(Scalar, f64), CriterionError> {
    let long = h.eval(a, c)?.mul(&c.sub(a)?)?;
    let left = h.eval(a, b)?.mul(&b.sub(a)?)?;
    let right = h.eval(b, c)?.mul(&c.sub(b)?)?;
    let residual = long.sub(&left)?.sub(&right)?;
    Ok((residual, max_abs(&[&long, &left, &right])))
}

/// `H(a,c)(c−a) − H(a,b)(b−a) − H(b,c)(c−b)` for `0 ≤ a < b < c ≤ 1`.
pub fn algebraic_residual_triple<H: Bivariate + ?Sized>(
    h: &H,
    a: &Scalar,
    b: &Scalar,
    c: &Scalar,
) -> Result<Scalar, CriterionError> {
    check_increasing(&[a, b, c], "0 ≤ a < b < c ≤ 1")?;
    triple_terms(h, a, b, c).map(|(r, _)| r)
}

/// `H(0,c)·c − H(0,b)·b − H(b,c)(c−b)` for `0 < b < c ≤ 1`.
pub fn algebraic_residual_anchored<H: Bivariate + ?Sized>(
    h: &H,
    b: &Scalar,
    c: &Scalar,
) -> Result<Scalar, CriterionError> {
    check_anchored(b, c)?;
    triple_terms(h, &Scalar::zero(b.mode()), b, c).map(|(r, _)| r)
}

fn check_anchored(b: &Scalar, c: &Scalar) -> Result<(), CriterionError> {
    check_increasing(&[b, c], "0 < b < c ≤ 1")?;
    if b.is_zero() {
        return Err(CriterionError::Domain("0 < b < c ≤ 1".into()));
    }
    Ok(())
}

/// Samples the additivity identity over `plan`.
pub fn run_algebraic<H: Bivariate + ?Sized>(
    h: &H,
    plan: &SamplingPlan,
    tol: &Tolerance,
    variant: AlgebraicVariant,
) -> Result<CriterionReport, CriterionError> {
    match variant {
        AlgebraicVariant::Triple => {
            let mut report = ReportBuilder::for_plan(CriterionKind::Algebraic, plan, *tol);
            for (index, (a, b, c)) in gen_triples(plan)?.into_iter().enumerate() {
                match triple_terms(h, &a, &b, &c) {
                    Ok((residual, reference)) => {
                        report.record(index, SamplePoint::Triple { a, b, c }, residual, reference)
                    }
                    Err(e) => report.record_inconclusive(index, e),
                }
            }
            Ok(report.finish())
        }
        AlgebraicVariant::Anchored => {
            let mut report = ReportBuilder::for_plan(CriterionKind::Anchored, plan, *tol);
            let zero = Scalar::zero(plan.mode);
            let pairs = gen_pairs(plan)?;
            let skipped = pairs.iter().filter(|(b, _)| b.is_zero()).count();
            for (index, (b, c)) in pairs.into_iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                match triple_terms(h, &zero, &b, &c) {
                    Ok((residual, reference)) => {
                        report.record(index, SamplePoint::Triple { a: zero.clone(), b, c }, residual, reference)
                    }
                    Err(e) => report.record_inconclusive(index, e),
                }
            }
            if skipped > 0 {
                report.note(format!("{skipped} pairs with b = 0 skipped (anchored form needs b > 0)"));
            }
            Ok(report.finish())
        }
    }
}
