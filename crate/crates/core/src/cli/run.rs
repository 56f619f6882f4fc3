//! Executing a manifest.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use super::demo;
use super::manifest::{
    exit_code, CommandKind, CriterionSelection, RecoverySummary, RunManifest, RunReport, SeriesSummary,
    TableEntry,
};
use crate::criteria::{
    absolute_convergence_probe, run_algebraic, run_integrable, run_matrix, summation_check, AlgebraicVariant,
    CriterionError, CriterionReport, Verdict,
};
use crate::expr::{BivariateExpr, ParseError, UnivariateExpr};
use crate::function::{Bivariate, Univariate};
use crate::recover::{recover_algebraic, recover_integral, recover_series, RecoverError, RecoveredFunction, RecoveryKind};
use crate::scalar::{Mode, Scalar, ScalarError};
use crate::series::{PowerSeries2D, SeriesError};
use crate::verify::{dq_of, partials_identity_check, roundtrip_check, VerifyError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Scalar(#[from] ScalarError),
    #[error("series file: {0}")]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Criterion(#[from] CriterionError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Recover(#[from] RecoverError),
    #[error("{0}")]
    Io(String),
}

/// A finished run: the report plus the recovered-function file, if any.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub function_file: Option<String>,
}

type UnivariatePair = (Arc<dyn Univariate>, Option<Arc<dyn Univariate>>);
type ReferenceFn = Box<dyn Fn(&Scalar) -> Option<Scalar>>;

/// The function under test.
pub(crate) struct Input {
    pub h: Arc<dyn Bivariate>,
    pub series: Option<PowerSeries2D>,
    pub description: String,
    /// `f` and `f′` when `H` was built as `DQ_f`.
    pub f: Option<UnivariatePair>,
}

/// Reference values a demo must reproduce.
pub(crate) struct Expectation {
    pub reference: ReferenceFn,
    pub tol: f64,
}

pub fn execute(manifest: &RunManifest) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let mut outcome = match manifest.command {
        CommandKind::Demo => {
            let name = manifest.demo.ok_or_else(|| CliError::Usage("demo manifest without a demo name".into()))?;
            let (input, expectation) = demo::input(name, manifest)?;
            run_pipeline(manifest, input, true, Some(expectation))?
        }
        CommandKind::Check => run_pipeline(manifest, load_input(manifest)?, false, None)?,
        CommandKind::Recover => run_pipeline(manifest, load_input(manifest)?, true, None)?,
        CommandKind::Verify => run_verify(manifest)?,
    };
    if manifest.timing {
        outcome.report.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(outcome)
}

fn load_input(m: &RunManifest) -> Result<Input, CliError> {
    match (&m.expr, &m.series) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either --expr or --series, not both".into())),
        (None, None) => Err(CliError::Usage("one of --expr or --series is required".into())),
        (Some(src), None) => {
            let h = BivariateExpr::parse(src)?;
            Ok(Input { description: format!("H(a,b) = {h}"), h: Arc::new(h), series: None, f: None })
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            let series = PowerSeries2D::parse(&text)?;
            let series = match (series.mode(), m.mode) {
                (Mode::Exact, Mode::Float) => series.to_float(),
                (Mode::Float, Mode::Exact) => {
                    return Err(CliError::Usage("series file has float coefficients but --mode is exact".into()))
                }
                _ => series,
            };
            Ok(Input {
                description: format!("power series of order {} from {}", series.order(), path.display()),
                h: Arc::new(series.clone()),
                series: Some(series),
                f: None,
            })
        }
    }
}

enum Check {
    Algebraic(AlgebraicVariant),
    Matrix,
    Integrable,
    Summation,
}

fn select_checks(m: &RunManifest, input: &Input, notes: &mut Vec<String>) -> Result<Vec<Check>, CliError> {
    let float = m.mode == Mode::Float;
    let has_diagonal = input.f.as_ref().is_none_or(|(_, df)| df.is_some());
    Ok(match m.criterion {
        CriterionSelection::Algebraic => vec![Check::Algebraic(m.variant)],
        CriterionSelection::Matrix => vec![Check::Matrix],
        CriterionSelection::Integrable => {
            if !float {
                return Err(CliError::Usage("the integrable criterion needs --mode float".into()));
            }
            vec![Check::Integrable]
        }
        CriterionSelection::Summation => {
            if input.series.is_none() {
                return Err(CliError::Usage("the summation criterion needs --series".into()));
            }
            vec![Check::Summation]
        }
        CriterionSelection::All => {
            let mut checks = vec![
                Check::Algebraic(AlgebraicVariant::Triple),
                Check::Algebraic(AlgebraicVariant::Anchored),
                Check::Matrix,
            ];
            if !float {
                notes.push("integrable criterion skipped: it runs in float mode only".into());
            } else if !has_diagonal {
                notes.push("integrable criterion skipped: H(s,s) needs --deriv".into());
            } else {
                checks.push(Check::Integrable);
            }
            if input.series.is_some() {
                checks.push(Check::Summation);
            }
            checks
        }
    })
}

fn run_checks(
    m: &RunManifest,
    input: &Input,
    notes: &mut Vec<String>,
) -> Result<(Vec<CriterionReport>, Option<SeriesSummary>), CliError> {
    let plan = m.plan();
    let mut reports = Vec::new();
    let mut summary = None;
    for check in select_checks(m, input, notes)? {
        let report = match check {
            Check::Algebraic(v) => run_algebraic(&*input.h, &plan, &m.tolerance, v)?,
            Check::Matrix => run_matrix(&*input.h, &plan, &m.tolerance)?,
            Check::Integrable => run_integrable(&*input.h, &plan, &m.tolerance, &m.quadrature)?,
            Check::Summation => {
                let series = input.series.as_ref().expect("checked by select_checks");
                let out = summation_check(series, &m.tolerance);
                summary = Some(SeriesSummary {
                    order: series.order(),
                    profile: out.profile,
                    convergence: absolute_convergence_probe(series),
                });
                out.report
            }
        };
        reports.push(report);
    }
    Ok((reports, summary))
}

fn recovery_kind(m: &RunManifest, input: &Input) -> RecoveryKind {
    match m.criterion {
        CriterionSelection::Summation => RecoveryKind::Series,
        CriterionSelection::Integrable => RecoveryKind::Integral,
        CriterionSelection::All if input.series.is_some() => RecoveryKind::Series,
        _ => RecoveryKind::Algebraic,
    }
}

/// Points at which the recovered function is tabulated: the pool in exact
/// mode, `k/10` in float mode.
fn table_points(m: &RunManifest) -> Vec<Scalar> {
    match m.mode {
        Mode::Exact => {
            let mut pool = m.plan().exact_pool.unwrap_or_default();
            pool.sort_by(|x, y| x.compare(y).expect("pool is exact"));
            pool.dedup();
            pool
        }
        Mode::Float => (0..=10).map(|k| Scalar::Float(k as f64 / 10.0)).collect(),
    }
}

fn tabulate(f: &RecoveredFunction, points: &[Scalar], expectation: Option<&Expectation>) -> (Vec<TableEntry>, f64) {
    let mut worst: f64 = 0.0;
    let table = points
        .iter()
        .map(|x| {
            let mut entry = TableEntry {
                x: x.clone(),
                value: None,
                approx: None,
                error: None,
                reference: None,
                abs_error: None,
            };
            match f.eval(x) {
                Ok(v) => {
                    if let Some(r) = expectation.and_then(|e| (e.reference)(x)) {
                        let err = match v.sub(&r) {
                            Ok(d) => d.to_f64().abs(),
                            Err(_) => (v.to_f64() - r.to_f64()).abs(),
                        };
                        worst = worst.max(err);
                        entry.reference = Some(r);
                        entry.abs_error = Some(err);
                    }
                    if v.mode() == Mode::Exact {
                        entry.approx = Some(v.to_f64());
                    }
                    entry.value = Some(v);
                }
                Err(e) => {
                    worst = f64::INFINITY;
                    entry.error = Some(e.to_string());
                }
            }
            entry
        })
        .collect();
    (table, worst)
}

fn function_file_text(f: &RecoveredFunction, input: &Input, table: &[TableEntry]) -> String {
    if let Some(text) = f.series_text() {
        return text;
    }
    let mut out = String::new();
    let _ = writeln!(out, "# f(x) = {}", f.formula());
    let _ = writeln!(out, "# {}", input.description);
    for e in table {
        match &e.value {
            Some(v) => {
                let _ = writeln!(out, "{} {}", e.x, v);
            }
            None => {
                let _ = writeln!(out, "{} error", e.x);
            }
        }
    }
    out
}

pub(crate) fn run_pipeline(
    m: &RunManifest,
    input: Input,
    recover: bool,
    expectation: Option<Expectation>,
) -> Result<RunOutcome, CliError> {
    let mut notes = Vec::new();
    let (criteria, series) = run_checks(m, &input, &mut notes)?;
    let mut verdict = criteria.iter().fold(Verdict::Accept, |v, r| v.combine(r.verdict));
    if criteria.is_empty() {
        verdict = Verdict::Inconclusive;
    }
    let mut recovery = None;
    let mut roundtrip = None;
    let mut function_file = None;
    if recover && verdict == Verdict::Reject {
        notes.push("input rejected: nothing recovered".into());
    } else if recover {
        let constant = m.constant_or_zero();
        let f = match recovery_kind(m, &input) {
            RecoveryKind::Algebraic => recover_algebraic(input.h.clone(), constant),
            RecoveryKind::Integral => recover_integral(input.h.clone(), constant, m.quadrature),
            RecoveryKind::Series => {
                let s = series.as_ref().expect("series recovery follows a summation check");
                recover_series(&s.profile, constant, s.order)?
            }
        };
        let rt = roundtrip_check(&*input.h, &f, &m.plan(), &m.tolerance)?;
        verdict = verdict.combine(rt.verdict);
        roundtrip = Some(rt);
        let (table, worst) = tabulate(&f, &table_points(m), expectation.as_ref());
        if let Some(e) = &expectation {
            if worst > e.tol {
                notes.push(format!("recovered values miss the reference by {worst:e} (allowed {:e})", e.tol));
                verdict = verdict.combine(Verdict::Reject);
            }
        }
        let text = function_file_text(&f, &input, &table);
        function_file = Some(text);
        recovery = Some(RecoverySummary {
            kind: f.kind(),
            constant: f.constant().clone(),
            formula: f.formula(),
            function_file: m.function_out.clone(),
            table,
        });
    }
    let report = RunReport {
        tool: format!("diffquot {}", env!("CARGO_PKG_VERSION")),
        manifest: m.clone(),
        input: input.description,
        verdict,
        exit_code: exit_code(verdict),
        criteria,
        series,
        recovery,
        roundtrip,
        notes,
        wall_time_ms: None,
    };
    Ok(RunOutcome { report, function_file })
}

fn run_verify(m: &RunManifest) -> Result<RunOutcome, CliError> {
    if m.series.is_some() {
        return Err(CliError::Usage("verify takes --expr for f, not --series".into()));
    }
    let src = m.expr.as_ref().ok_or_else(|| CliError::Usage("verify needs --expr for f(x)".into()))?;
    let f: Arc<dyn Univariate> = Arc::new(UnivariateExpr::parse(src)?);
    let df: Option<Arc<dyn Univariate>> = match &m.deriv {
        Some(d) => Some(Arc::new(UnivariateExpr::parse(d)?)),
        None => None,
    };
    let description = match &m.deriv {
        Some(d) => format!("H = DQ of f(x) = {src}, with f'(x) = {d}"),
        None => format!("H = DQ of f(x) = {src}"),
    };
    let input = Input {
        h: Arc::new(dq_of(f.clone(), df.clone())),
        series: None,
        description,
        f: Some((f.clone(), df.clone())),
    };
    let mut outcome = run_pipeline(m, input, false, None)?;
    let report = &mut outcome.report;
    match (&df, m.mode) {
        (Some(df), Mode::Float) => {
            let r = partials_identity_check(&*f, &**df, &m.plan(), m.step, &m.tolerance)?;
            report.verdict = report.verdict.combine(r.verdict);
            report.criteria.push(r);
        }
        (Some(_), Mode::Exact) => report.notes.push("partials identity skipped: it runs in float mode only".into()),
        (None, _) => report.notes.push("partials identity skipped: no --deriv given".into()),
    }
    report.exit_code = exit_code(report.verdict);
    Ok(outcome)
}
