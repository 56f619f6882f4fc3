//! Run manifests and the JSON report.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::criteria::{AlgebraicVariant, ConvergenceProbe, CriterionReport, Verdict};
use crate::quadrature::QuadratureConfig;
use crate::recover::RecoveryKind;
use crate::sampling::SamplingPlan;
use crate::scalar::{Mode, Scalar, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Check,
    Recover,
    Verify,
    Demo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DemoName {
    /// Dirichlet function, exact mode
    Dirichlet,
    /// Average value of e^(x^2), integral test
    AvgExp,
    /// Series of x*e^x
    Xexp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CriterionSelection {
    Algebraic,
    Matrix,
    Integrable,
    Summation,
    All,
}

/// Everything needed to reproduce a run. Missing fields take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunManifest {
    pub command: CommandKind,
    pub demo: Option<DemoName>,
    /// `H` in `a, b`, or `f` in `x` for `verify`.
    pub expr: Option<String>,
    pub series: Option<PathBuf>,
    /// `f′` in `x`, for `verify`.
    pub deriv: Option<String>,
    pub criterion: CriterionSelection,
    pub variant: AlgebraicVariant,
    pub seed: u64,
    pub count: usize,
    pub min_gap: f64,
    pub mode: Mode,
    pub pool: Option<Vec<Scalar>>,
    pub tolerance: Tolerance,
    pub quadrature: QuadratureConfig,
    pub constant: Option<Scalar>,
    /// Central-difference step for the partials identity.
    pub step: f64,
    pub out: Option<PathBuf>,
    pub function_out: Option<PathBuf>,
    pub timing: bool,
}

pub const DEFAULT_COUNT: usize = 128;

/// Used in exact mode when no pool is given.
pub const DEFAULT_POOL: [&str; 9] =
    ["0", "1/4", "1/3", "1/2", "2/3", "3/4", "1/2*sqrt2", "1/3*sqrt2", "1"];

impl Default for RunManifest {
    fn default() -> Self {
        Self {
            command: CommandKind::Check,
            demo: None,
            expr: None,
            series: None,
            deriv: None,
            criterion: CriterionSelection::All,
            variant: AlgebraicVariant::Triple,
            seed: 1,
            count: DEFAULT_COUNT,
            min_gap: 1e-3,
            mode: Mode::Float,
            pool: None,
            tolerance: Tolerance::default(),
            quadrature: QuadratureConfig::default(),
            constant: None,
            step: crate::verify::DEFAULT_STEP,
            out: None,
            function_out: None,
            timing: false,
        }
    }
}

impl RunManifest {
    pub fn plan(&self) -> SamplingPlan {
        let plan = match self.mode {
            Mode::Float => SamplingPlan::float(self.seed, self.count),
            Mode::Exact => {
                let pool = self.pool.clone().unwrap_or_else(|| {
                    DEFAULT_POOL.iter().map(|s| Scalar::parse_in(Mode::Exact, s).expect("valid pool literal")).collect()
                });
                SamplingPlan { seed: self.seed, ..SamplingPlan::exact(pool, self.count) }
            }
        };
        plan.with_min_gap(self.min_gap)
    }

    pub fn constant_or_zero(&self) -> Scalar {
        self.constant.clone().unwrap_or_else(|| Scalar::zero(self.mode))
    }
}

/// Coefficient profile and convergence probe of a series input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub order: usize,
    pub profile: BTreeMap<usize, Scalar>,
    pub convergence: ConvergenceProbe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub x: Scalar,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverySummary {
    pub kind: RecoveryKind,
    pub constant: Scalar,
    pub formula: String,
    pub function_file: Option<PathBuf>,
    pub table: Vec<TableEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub manifest: RunManifest,
    pub input: String,
    pub verdict: Verdict,
    pub exit_code: i32,
    pub criteria: Vec<CriterionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesSummary>,
    pub recovery: Option<RecoverySummary>,
    pub roundtrip: Option<CriterionReport>,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serialisable");
        s.push('\n');
        s
    }
}

pub fn exit_code(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::Accept => 0,
        Verdict::Reject => 1,
        Verdict::Inconclusive => 2,
    }
}
