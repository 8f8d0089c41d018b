//! Experiment reports: a structured JSON object or CSV with one row per
//! trial and summary footer rows. Reports contain no timestamps or
//! environment data, so equal configurations produce byte-identical output.

use super::{Stats, TrialOutcome};
use crate::scalar::Scalar;
use serde::Serialize;

/// A number with its float value and, in exact mode, its exact rational text.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct NumText {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

impl NumText {
    pub fn from_scalar<T: Scalar>(x: &T) -> Self {
        Self {
            value: x.to_f64(),
            exact: x.exact_str(),
        }
    }

    pub fn from_f64(value: f64) -> Self {
        Self { value, exact: None }
    }

    pub fn with_exact(value: f64, exact: Option<String>) -> Self {
        Self { value, exact }
    }
}

/// The semantic configuration a report depends on. Execution parameters that
/// cannot change results (worker count, output format) are deliberately
/// absent: every reported number is reproducible from this echo alone.
#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub instance_source: String,
    pub instance_digest: String,
    pub instance_kind: String,
    pub num_items: usize,
    pub num_bins: usize,
    pub algorithm: String,
    pub mode: String,
    pub trials: u64,
    pub master_seed: u64,
    pub t: usize,
    pub arithmetic: String,
    pub budget: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerItemExpectation {
    pub item: usize,
    pub expectation: NumText,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<NumText>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactSection {
    pub expectation: NumText,
    pub opt: NumText,
    pub opt_kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_item: Option<Vec<PerItemExpectation>>,
    pub enumerated_sequences: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct McSection {
    pub trials: u64,
    pub mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci99_half_width: Option<f64>,
    pub opt: NumText,
    pub opt_kind: String,
    pub opt_conservative: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_stderr: Option<f64>,
}

impl McSection {
    pub fn from_stats(
        stats: &Stats,
        ratio: Option<&Stats>,
        opt: NumText,
        opt_kind: &str,
        conservative: bool,
    ) -> Self {
        Self {
            trials: stats.trials,
            mean: stats.mean,
            stderr: stats.stderr,
            ci99_half_width: stats.ci99_half_width,
            opt,
            opt_kind: opt_kind.to_string(),
            opt_conservative: conservative,
            ratio_mean: ratio.map(|r| r.mean),
            ratio_stderr: ratio.and_then(|r| r.stderr),
        }
    }
}

/// One bound comparison: the bound factor, the absolute reference it implies
/// (factor times the offline optimum), the measured quantity, and the margin.
/// `pass` is `None` for context-only entries such as asymptotic constants.
#[derive(Clone, Debug, Serialize)]
pub struct BoundEntry {
    pub name: String,
    pub bound: NumText,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

impl BoundEntry {
    pub fn context(name: &str, value: f64) -> Self {
        Self {
            name: name.to_string(),
            bound: NumText::from_f64(value),
            reference: None,
            measured: None,
            margin: None,
            pass: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaCheckEntry {
    pub name: String,
    pub pass: bool,
    pub details: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub config: ConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSection>,
    pub bounds: Vec<BoundEntry>,
    pub lemma_checks: Vec<LemmaCheckEntry>,
    /// Per-trial rows for the CSV format; not part of the JSON object.
    #[serde(skip)]
    pub trial_outcomes: Vec<TrialOutcome>,
}

impl ExperimentReport {
    pub fn all_bounds_pass(&self) -> bool {
        self.bounds.iter().all(|b| b.pass != Some(false))
            && self.lemma_checks.iter().all(|c| c.pass)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(format!("unknown format `{other}` (expected json or csv)")),
        }
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn fmt_opt_bool(x: Option<bool>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// Serializes a report. JSON carries the structured object; CSV carries one
/// row per trial followed by `#`-prefixed summary footer rows.
pub fn write_report(report: &ExperimentReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(report).expect("report serialization");
            bytes.push(b'\n');
            bytes
        }
        ReportFormat::Csv => {
            let mut out = String::new();
            out.push_str("trial,seed_stream,perm_digest,value,opt,ratio\n");
            for trial in &report.trial_outcomes {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    trial.index,
                    trial.seed_stream,
                    trial.perm_digest,
                    trial.value,
                    trial.opt,
                    fmt_opt(trial.ratio),
                ));
            }
            let c = &report.config;
            out.push_str(&format!(
                "# config instance={} digest={} kind={} n={} m={} algorithm={} mode={} trials={} seed={} t={} arithmetic={} budget={}\n",
                c.instance_source,
                c.instance_digest,
                c.instance_kind,
                c.num_items,
                c.num_bins,
                c.algorithm,
                c.mode,
                c.trials,
                c.master_seed,
                c.t,
                c.arithmetic,
                c.budget,
            ));
            if let Some(exact) = &report.exact {
                out.push_str(&format!(
                    "# exact expectation={} exact_text={} opt={} opt_kind={} ratio={}\n",
                    exact.expectation.value,
                    exact.expectation.exact.as_deref().unwrap_or("NA"),
                    exact.opt.value,
                    exact.opt_kind,
                    fmt_opt(exact.ratio),
                ));
                if let Some(per_item) = &exact.per_item {
                    for item in per_item {
                        out.push_str(&format!(
                            "# per_item item={} expectation={} bound={} pass={}\n",
                            item.item,
                            item.expectation.value,
                            fmt_opt(item.lower_bound.as_ref().map(|b| b.value)),
                            fmt_opt_bool(item.pass),
                        ));
                    }
                }
            }
            if let Some(mc) = &report.mc {
                out.push_str(&format!(
                    "# mc trials={} mean={} stderr={} ci99={} opt={} opt_kind={} conservative={} ratio_mean={}\n",
                    mc.trials,
                    mc.mean,
                    fmt_opt(mc.stderr),
                    fmt_opt(mc.ci99_half_width),
                    mc.opt.value,
                    mc.opt_kind,
                    mc.opt_conservative,
                    fmt_opt(mc.ratio_mean),
                ));
            }
            for bound in &report.bounds {
                out.push_str(&format!(
                    "# bound name={} bound={} reference={} measured={} margin={} pass={}\n",
                    bound.name,
                    bound.bound.value,
                    fmt_opt(bound.reference),
                    fmt_opt(bound.measured),
                    fmt_opt(bound.margin),
                    fmt_opt_bool(bound.pass),
                ));
            }
            for check in &report.lemma_checks {
                out.push_str(&format!(
                    "# check name={} pass={} details={}\n",
                    check.name, check.pass, check.details
                ));
            }
            out.into_bytes()
        }
    }
}
