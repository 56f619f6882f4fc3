//! Power-series test: `Σ c_ij aⁱ bʲ` is a difference quotient exactly when
//! `c_ij` is constant along every anti-diagonal `i + j = p`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CriterionKind, CriterionReport, ReportBuilder, SamplePoint};
use crate::scalar::{Mode, Scalar, Tolerance};
use crate::series::PowerSeries2D;

type Index = (usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct SummationOutcome {
    pub report: CriterionReport,
    /// Per anti-diagonal value `c_p`: the common value in exact mode, the
    /// mean in float mode.
    pub profile: BTreeMap<usize, Scalar>,
}

/// Compares every pair of coefficients on each anti-diagonal.
///
/// Each anti-diagonal is one sample; its residual is the largest pairwise
/// difference and its witness the pair realising it. Exact series need
/// equality, float series `|c − c'| ≤ abs_tol + rel_tol·max(|c|, |c'|)`.
pub fn summation_check(series: &PowerSeries2D, tol: &Tolerance) -> SummationOutcome {
    let mode = series.mode();
    let mut report = ReportBuilder::new(CriterionKind::Summation, mode, *tol);
    let mut profile = BTreeMap::new();
    for p in 0..=series.order() {
        let diag = series.anti_diagonal(p);
        // (difference, first index, second index, passed)
        let mut worst: Option<(Scalar, Index, Index, bool)> = None;
        for x in 0..diag.len() {
            for y in x + 1..diag.len() {
                let (ix, cx) = &diag[x];
                let (iy, cy) = &diag[y];
                let diff = cx.sub(cy).expect("coefficients share the series mode");
                let reference = cx.to_f64().abs().max(cy.to_f64().abs());
                let passed = tol.passes(&diff, reference);
                let replace = match &worst {
                    None => true,
                    // a failure outranks any pass; then larger differences win
                    Some((d, _, _, ok)) => {
                        (*ok && !passed)
                            || (*ok == passed && diff.to_f64().abs() > d.to_f64().abs())
                    }
                };
                if replace {
                    worst = Some((diff, *ix, *iy, passed));
                }
            }
        }
        let (residual, first, second, passed) = match worst {
            Some(w) => w,
            // p = 0 has a single coefficient
            None => (Scalar::zero(mode), diag[0].0, diag[0].0, true),
        };
        report.record_outcome(p, SamplePoint::AntiDiagonal { p, first, second }, residual, passed);
        profile.insert(p, diagonal_value(&diag, mode));
    }
    SummationOutcome { report: report.finish(), profile }
}

fn diagonal_value(diag: &[((usize, usize), Scalar)], mode: Mode) -> Scalar {
    match mode {
        Mode::Exact => diag[0].1.clone(),
        Mode::Float => Scalar::Float(diag.iter().map(|(_, c)| c.to_f64()).sum::<f64>() / diag.len() as f64),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceProbe {
    Plausible,
    Implausible,
    Unknown,
}

/// Heuristic look at whether `Σ |c_ij|` converges on the closed unit square.
///
/// With `S_p = Σ_{i+j=p} |c_ij|`, convergence at `a = b = 1` means `S_p → 0`
/// summably. The probe inspects the ratios `S_{p+1}/S_p` over the upper half
/// of the orders: a last ratio of at least 1 is implausible, a last ratio
/// at most 0.9 or a ratio sequence that is not increasing is plausible, and
/// anything else is unknown. Fewer than eight orders is always unknown.
pub fn absolute_convergence_probe(series: &PowerSeries2D) -> ConvergenceProbe {
    let order = series.order();
    if order < 8 {
        return ConvergenceProbe::Unknown;
    }
    let sums: Vec<f64> = (0..=order)
        .map(|p| series.anti_diagonal(p).iter().map(|(_, c)| c.to_f64().abs()).sum())
        .collect();
    let tail: Vec<f64> = sums[order / 2..].iter().copied().filter(|s| *s != 0.0).collect();
    if tail.len() < 2 {
        return if tail.is_empty() { ConvergenceProbe::Plausible } else { ConvergenceProbe::Unknown };
    }
    if tail.iter().any(|s| !s.is_finite()) {
        return ConvergenceProbe::Implausible;
    }
    let ratios: Vec<f64> = tail.windows(2).map(|w| w[1] / w[0]).collect();
    let (first, last) = (ratios[0], ratios[ratios.len() - 1]);
    if last >= 1.0 {
        ConvergenceProbe::Implausible
    } else if last <= 0.9 || last <= first {
        ConvergenceProbe::Plausible
    } else {
        ConvergenceProbe::Unknown
    }
}
