//! Recognition tests for difference quotients.
//!
//! Every check samples the quantifiers of its identity with a
//! [`SamplingPlan`](crate::sampling::SamplingPlan) and reduces the per-sample
//! residuals into a [`CriterionReport`]. A report only says `accept` when
//! every sample was evaluated and passed; any failing sample makes it
//! `reject`, and otherwise any sample that could not be evaluated makes it
//! `inconclusive`.

mod algebraic;
mod integrable;
mod matrix;
mod summation;

use serde::{Deserialize, Serialize};

use crate::function::EvalError;
use crate::quadrature::QuadratureError;
use crate::sampling::{excluded_pool_values, SamplingError, SamplingPlan};
use crate::scalar::{Mode, Scalar, ScalarError, Tolerance};

pub use algebraic::{
    algebraic_residual_anchored, algebraic_residual_triple, run_algebraic, AlgebraicVariant,
};
pub use integrable::{integrable_residual, run_integrable};
pub use matrix::{
    canonical_null_vector, chord_matrix, matrix_diagnostics, matrix_diagnostics_with, run_matrix,
    ChordMatrix, MatrixDiagnostics,
};
pub use summation::{absolute_convergence_probe, summation_check, ConvergenceProbe, SummationOutcome};

/// Notes kept verbatim per report; further ones are only counted.
const MAX_NOTES: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CriterionError {
    #[error("points must satisfy {0}")]
    Domain(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("mode error: {0}")]
    Mode(String),
}

impl From<ScalarError> for CriterionError {
    fn from(e: ScalarError) -> Self {
        CriterionError::Eval(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionKind {
    Algebraic,
    Anchored,
    Matrix,
    Integrable,
    Summation,
    Roundtrip,
    PartialsIdentity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject,
    Inconclusive,
}

impl Verdict {
    /// Reject dominates inconclusive, which dominates accept.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Reject, _) | (_, Reject) => Reject,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Accept,
        }
    }
}

/// The sample a witness refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplePoint {
    Pair { a: Scalar, b: Scalar },
    Triple { a: Scalar, b: Scalar, c: Scalar },
    /// Two coefficients `c_ij` on anti-diagonal `p` that disagree.
    AntiDiagonal { p: usize, first: (usize, usize), second: (usize, usize) },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub index: usize,
    pub point: SamplePoint,
    pub residual: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: CriterionKind,
    pub verdict: Verdict,
    pub mode: Mode,
    pub samples_checked: usize,
    pub inconclusive_samples: usize,
    /// Largest `|residual|`, rounded to a double in exact mode.
    pub max_residual: f64,
    /// Exact mode only: whether every residual was exactly zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub all_exactly_zero: Option<bool>,
    /// The failing sample with the largest residual when rejecting,
    /// otherwise the sample with the largest residual.
    pub witness: Option<Witness>,
    pub tolerance: Tolerance,
    pub notes: Vec<String>,
}

/// Accumulates samples in order; ties keep the earliest index.
pub(crate) struct ReportBuilder {
    criterion: CriterionKind,
    mode: Mode,
    tolerance: Tolerance,
    samples: usize,
    inconclusive: usize,
    max_residual: f64,
    all_zero: bool,
    worst: Option<Witness>,
    worst_failure: Option<(f64, Witness)>,
    notes: Vec<String>,
    dropped_notes: usize,
}

impl ReportBuilder {
    pub(crate) fn new(criterion: CriterionKind, mode: Mode, tolerance: Tolerance) -> Self {
        Self {
            criterion,
            mode,
            tolerance,
            samples: 0,
            inconclusive: 0,
            max_residual: 0.0,
            all_zero: true,
            worst: None,
            worst_failure: None,
            notes: Vec::new(),
            dropped_notes: 0,
        }
    }

    /// Builder for a run over `plan`, noting any pool values it skips.
    pub(crate) fn for_plan(criterion: CriterionKind, plan: &SamplingPlan, tolerance: Tolerance) -> Self {
        let mut b = Self::new(criterion, plan.mode, tolerance);
        let skipped = excluded_pool_values(plan);
        if !skipped.is_empty() {
            let list: Vec<String> = skipped.iter().map(|s| s.to_string()).collect();
            b.note(format!("pool values outside [0,1] skipped: {}", list.join(", ")));
        }
        b
    }

    pub(crate) fn note(&mut self, note: impl Into<String>) {
        if self.notes.len() < MAX_NOTES {
            self.notes.push(note.into());
        } else {
            self.dropped_notes += 1;
        }
    }

    /// Records an evaluated residual with its reference magnitude.
    pub(crate) fn record(&mut self, index: usize, point: SamplePoint, residual: Scalar, reference: f64) {
        let passed = self.tolerance.passes(&residual, reference);
        self.record_outcome(index, point, residual, passed);
    }

    pub(crate) fn record_outcome(&mut self, index: usize, point: SamplePoint, residual: Scalar, passed: bool) {
        self.samples += 1;
        let magnitude = residual.to_f64().abs();
        if !residual.is_zero() {
            self.all_zero = false;
        }
        let witness = || Witness { index, point: point.clone(), residual: residual.clone() };
        // NaN residuals count as the worst possible.
        let larger = |current: f64| magnitude > current || (magnitude.is_nan() && !current.is_nan());
        if self.worst.is_none() || larger(self.max_residual) {
            self.max_residual = magnitude;
            self.worst = Some(witness());
        }
        if !passed {
            let replace = match &self.worst_failure {
                None => true,
                Some((m, _)) => larger(*m),
            };
            if replace {
                self.worst_failure = Some((magnitude, witness()));
            }
        }
    }

    pub(crate) fn record_inconclusive(&mut self, index: usize, why: impl std::fmt::Display) {
        self.samples += 1;
        self.inconclusive += 1;
        self.note(format!("sample {index}: {why}"));
    }

    pub(crate) fn finish(mut self) -> CriterionReport {
        let verdict = if self.worst_failure.is_some() {
            Verdict::Reject
        } else if self.inconclusive > 0 {
            Verdict::Inconclusive
        } else if self.samples == 0 {
            self.note("no samples were checked");
            Verdict::Inconclusive
        } else {
            Verdict::Accept
        };
        if self.dropped_notes > 0 {
            self.notes.push(format!("{} further notes omitted", self.dropped_notes));
        }
        let evaluated = self.samples - self.inconclusive;
        let witness = match self.worst_failure {
            Some((_, w)) => Some(w),
            None => self.worst,
        };
        CriterionReport {
            criterion: self.criterion,
            verdict,
            mode: self.mode,
            samples_checked: self.samples,
            inconclusive_samples: self.inconclusive,
            max_residual: self.max_residual,
            all_exactly_zero: (self.mode == Mode::Exact).then_some(self.all_zero && evaluated > 0),
            witness,
            tolerance: self.tolerance,
            notes: self.notes,
        }
    }
}

/// Checks `a < b` (and `b < c`) within `[0, 1]`.
pub(crate) fn check_increasing(points: &[&Scalar], what: &str) -> Result<(), CriterionError> {
    let mode = points[0].mode();
    if points.iter().any(|p| p.mode() != mode) {
        return Err(CriterionError::Mode("points are in different modes".into()));
    }
    let zero = Scalar::zero(mode);
    let one = Scalar::one(mode);
    let le = |x: &Scalar, y: &Scalar| x.compare(y).map(|o| o.is_le()).unwrap_or(false);
    let lt = |x: &Scalar, y: &Scalar| x.compare(y).map(|o| o.is_lt()).unwrap_or(false);
    let ok = le(&zero, points[0])
        && points.windows(2).all(|w| lt(w[0], w[1]))
        && le(points[points.len() - 1], &one);
    if ok {
        Ok(())
    } else {
        Err(CriterionError::Domain(what.to_string()))
    }
}

fn max_abs(values: &[&Scalar]) -> f64 {
    values.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_combination() {
        use Verdict::*;
        assert_eq!(Accept.combine(Accept), Accept);
        assert_eq!(Accept.combine(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.combine(Reject), Reject);
    }

    #[test]
    fn builder_tie_break_and_witness() {
        let mut b = ReportBuilder::new(CriterionKind::Algebraic, Mode::Float, Tolerance::default());
        let pt = |x: f64| SamplePoint::Pair { a: Scalar::Float(0.0), b: Scalar::Float(x) };
        b.record(0, pt(0.1), Scalar::Float(0.5), 0.0);
        b.record(1, pt(0.2), Scalar::Float(-0.5), 0.0);
        b.record(2, pt(0.3), Scalar::Float(0.0), 0.0);
        let r = b.finish();
        assert_eq!(r.verdict, Verdict::Reject);
        assert_eq!(r.witness.unwrap().index, 0);
        assert_eq!(r.max_residual, 0.5);
    }

    #[test]
    fn empty_and_inconclusive() {
        let r = ReportBuilder::new(CriterionKind::Matrix, Mode::Float, Tolerance::default()).finish();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let mut b = ReportBuilder::new(CriterionKind::Matrix, Mode::Exact, Tolerance::default());
        b.record(0, SamplePoint::Pair { a: Scalar::ratio(0, 1), b: Scalar::ratio(1, 1) }, Scalar::ratio(0, 1), 0.0);
        b.record_inconclusive(1, "boom");
        let r = b.finish();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.inconclusive_samples, 1);
        assert_eq!(r.all_exactly_zero, Some(true));
    }
}
