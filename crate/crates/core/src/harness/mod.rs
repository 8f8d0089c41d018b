//! Experiment engine: exact enumeration, Monte Carlo estimation, finite-n
//! bound checks, verification suites, and reproducible reports.

pub mod bounds;
mod exact;
mod mc;
mod report;
pub mod suites;
mod trace;

pub use exact::{
    exact_expectation_gap, exact_expectation_knapsack, exact_gap_expectations, GapExactResult,
    KnapsackExactResult,
};
pub use mc::{
    derive_trial_rng, gap_opt_reference, knapsack_opt_reference, mc_estimate, verify_lemma2,
    Lemma2Report, McRequest, McResult, OptKind, OptReference,
};
pub use report::{
    write_report, BoundEntry, ConfigEcho, ExactSection, ExperimentReport, LemmaCheckEntry,
    McSection, NumText, PerItemExpectation, ReportFormat,
};
pub use trace::{gap_run_trace_json, knapsack_run_trace_json, trace_trial};

use crate::model::{InstanceFile, ModelError};
use crate::offline::{fractional_greedy, solve_integral_gap_bruteforce, OfflineError};
use crate::online_gap::{GapAlgorithm, OnlineError};
use crate::online_knapsack::knapsack_sample_len;
use crate::scalar::{Rat, Scalar};
use bounds::{
    fractional_knapsack_constant, infeasible_constant, lemma3_bound_rat, random_gap_constant,
    theorem2_bound_rat,
};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("bad arguments: {0}")]
    BadArguments(String),
    #[error("enumeration would visit {required} states, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Online(#[from] OnlineError),
    #[error(transparent)]
    Offline(#[from] OfflineError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Default enumeration budget (number of visited states) when neither the
/// CLI flag nor the environment variable overrides it.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Sample statistics with the normal-approximation 99% confidence interval.
#[derive(Clone, Debug, PartialEq)]
pub struct Stats {
    pub mean: f64,
    /// Undefined for a single trial.
    pub stderr: Option<f64>,
    /// `2.576 x stderr`.
    pub ci99_half_width: Option<f64>,
    pub trials: u64,
}

impl Stats {
    pub fn from_values(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "statistics need at least one value");
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let (stderr, ci99_half_width) = if values.len() >= 2 {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
            let stderr = (var / k).sqrt();
            (Some(stderr), Some(2.576 * stderr))
        } else {
            (None, None)
        };
        Self {
            mean,
            stderr,
            ci99_half_width,
            trials: values.len() as u64,
        }
    }
}

/// One Monte Carlo trial, exactly reproducible from the master seed and its
/// index.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub index: u64,
    /// ChaCha stream id of the derived generator (equals the index).
    pub seed_stream: u64,
    pub perm_digest: String,
    pub value: f64,
    pub opt: f64,
    /// `value / opt`, absent when the reference optimum is zero.
    pub ratio: Option<f64>,
}

/// Which simulator an experiment runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgorithmChoice {
    Gap(GapAlgorithm),
    FractionalKnapsack,
}

impl FromStr for AlgorithmChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "fractional-knapsack" {
            return Ok(Self::FractionalKnapsack);
        }
        GapAlgorithm::from_str(s).map(Self::Gap)
    }
}

impl std::fmt::Display for AlgorithmChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Gap(alg) => alg.fmt(f),
            Self::FractionalKnapsack => f.write_str("fractional-knapsack"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Mc,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Self::Exact),
            "mc" => Ok(Self::Mc),
            other => Err(format!("unknown mode `{other}` (expected exact or mc)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Mc => "mc",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arithmetic {
    Float,
    Rational,
}

impl FromStr for Arithmetic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "float" => Ok(Self::Float),
            "rational" => Ok(Self::Rational),
            other => Err(format!(
                "unknown arithmetic `{other}` (expected float or rational)"
            )),
        }
    }
}

impl std::fmt::Display for Arithmetic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Float => "float",
            Self::Rational => "rational",
        })
    }
}

/// Semantic experiment configuration; the report is a pure function of it
/// (plus the instance bytes it names).
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    /// Echoed instance provenance: a file path or a generator spec string.
    pub source_label: String,
    pub algorithm: AlgorithmChoice,
    pub mode: Mode,
    pub trials: u64,
    pub master_seed: u64,
    pub t_override: Option<usize>,
    pub arithmetic: Arithmetic,
    /// Worker threads; affects scheduling only, never results.
    pub workers: Option<usize>,
    pub budget: u64,
}

/// Runs a computation on a dedicated pool of `workers` threads, or on the
/// global pool when no count is given. Worker count affects scheduling only;
/// every harness result is deterministic regardless.
pub fn with_workers<R: Send>(
    workers: Option<usize>,
    run: impl FnOnce() -> Result<R, HarnessError> + Send,
) -> Result<R, HarnessError> {
    match workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Runs an experiment and assembles the report: expectation or Monte Carlo
/// statistics, bound comparisons, and lemma-level checks.
pub fn run_experiment(
    instance: &InstanceFile,
    config: &ExperimentConfig,
) -> Result<ExperimentReport, HarnessError> {
    with_workers(config.workers, || match config.arithmetic {
        Arithmetic::Float => run_typed::<f64>(instance, config),
        Arithmetic::Rational => run_typed::<Rat>(instance, config),
    })
}

fn resolve_t(config: &ExperimentConfig, n: usize) -> Result<usize, HarnessError> {
    if let Some(t) = config.t_override {
        if !(1..n).contains(&t) {
            return Err(HarnessError::BadArguments(format!(
                "t override {t} outside [1, {}]",
                n.saturating_sub(1)
            )));
        }
        return Ok(t);
    }
    Ok(match config.algorithm {
        AlgorithmChoice::Gap(_) => n / 2,
        AlgorithmChoice::FractionalKnapsack => knapsack_sample_len(n),
    })
}

fn config_echo(instance: &InstanceFile, config: &ExperimentConfig, t: usize) -> ConfigEcho {
    ConfigEcho {
        instance_source: config.source_label.clone(),
        instance_digest: instance.digest(),
        instance_kind: instance.kind().to_string(),
        num_items: instance.num_items(),
        num_bins: instance.num_bins(),
        algorithm: config.algorithm.to_string(),
        mode: config.mode.to_string(),
        trials: config.trials,
        master_seed: config.master_seed,
        t,
        arithmetic: config.arithmetic.to_string(),
        budget: config.budget,
    }
}

/// Pass rule shared by the exact paths: exact nonnegativity of the margin in
/// rational mode, a small absolute-plus-relative slack in float mode.
fn exact_pass<T: Scalar>(measured: &T, reference: &T) -> bool {
    reference.le_abs(measured) || reference.le_rel(measured)
}

fn gap_bound_entries<T: Scalar>(
    algorithm: GapAlgorithm,
    n: usize,
    t: usize,
    opt: &T,
    measured: Option<&T>,
) -> Result<Vec<BoundEntry>, HarnessError> {
    let mut entries = Vec::new();
    if t >= 1 && t < n {
        let factor = lemma3_bound_rat(n, t)?;
        let (name, factor) = match algorithm {
            GapAlgorithm::Infeasible => ("lemma3-finite-n", factor),
            GapAlgorithm::Random => ("lemma3-half-finite-n", factor / Rat::from_u128(2)),
            // No finite-n guarantee is claimed for the two halves alone.
            GapAlgorithm::Feasible | GapAlgorithm::Imitative => ("", Rat::from_u128(0)),
        };
        if !name.is_empty() {
            let reference = T::from_rat(&factor) * opt.clone();
            let (measured_f, margin, pass) = match measured {
                Some(m) => (
                    Some(m.to_f64()),
                    Some(m.to_f64() - reference.to_f64()),
                    Some(exact_pass(m, &reference)),
                ),
                None => (None, None, None),
            };
            entries.push(BoundEntry {
                name: name.to_string(),
                bound: NumText::from_scalar(&factor),
                reference: Some(reference.to_f64()),
                measured: measured_f,
                margin,
                pass,
            });
        }
    }
    entries.push(BoundEntry::context(
        "constant-1-minus-ln2",
        infeasible_constant(),
    ));
    entries.push(BoundEntry::context(
        "constant-half-1-minus-ln2",
        random_gap_constant(),
    ));
    Ok(entries)
}

fn knapsack_bound_entry<T: Scalar>(
    n: usize,
    t: usize,
    opt: &T,
    measured: Option<&T>,
) -> Result<Vec<BoundEntry>, HarnessError> {
    let mut entries = Vec::new();
    if t >= 1 && t < n {
        let factor = theorem2_bound_rat(n, t)?;
        let reference = T::from_rat(&factor) * opt.clone();
        let (measured_f, margin, pass) = match measured {
            Some(m) => (
                Some(m.to_f64()),
                Some(m.to_f64() - reference.to_f64()),
                Some(exact_pass(m, &reference)),
            ),
            None => (None, None, None),
        };
        entries.push(BoundEntry {
            name: "theorem2-finite-n".to_string(),
            bound: NumText::from_scalar(&factor),
            reference: Some(reference.to_f64()),
            measured: measured_f,
            margin,
            pass,
        });
    }
    entries.push(BoundEntry::context(
        "constant-1-over-e",
        fractional_knapsack_constant(),
    ));
    Ok(entries)
}

fn run_typed<T: Scalar>(
    instance: &InstanceFile,
    config: &ExperimentConfig,
) -> Result<ExperimentReport, HarnessError> {
    let n = instance.num_items();
    let t = resolve_t(config, n)?;
    let echo = config_echo(instance, config, t);

    match (config.mode, config.algorithm) {
        (Mode::Exact, AlgorithmChoice::Gap(alg)) => {
            let owned;
            let gap = match instance {
                InstanceFile::Gap(inst) => inst,
                InstanceFile::Knapsack(ks) => {
                    owned = ks.to_gap();
                    &owned
                }
            };
            let result = exact_gap_expectations::<T>(gap, t, config.budget)?;
            let expectation = match alg {
                GapAlgorithm::Infeasible => result.infeasible.clone(),
                GapAlgorithm::Feasible => result.feasible.clone(),
                GapAlgorithm::Imitative => result.imitative.clone(),
                GapAlgorithm::Random => result.random.clone(),
            };
            let (_, opt) = solve_integral_gap_bruteforce(gap, config.budget)?;
            let opt_t = T::from_rat(&opt);
            let ratio = (opt.to_f64() > 0.0).then(|| expectation.to_f64() / opt.to_f64());
            let bounds = gap_bound_entries(alg, n, t, &opt_t, Some(&expectation))?;
            let lemma_checks = vec![LemmaCheckEntry {
                name: "coupling".to_string(),
                pass: result.coupling_holds,
                details: format!(
                    "v(y) + v(z) >= v(x) over {} enumerated sequences",
                    result.enumerated_sequences
                ),
            }];
            Ok(ExperimentReport {
                config: echo,
                exact: Some(ExactSection {
                    expectation: NumText::from_scalar(&expectation),
                    opt: NumText::with_exact(opt.to_f64(), Some(opt.to_string())),
                    opt_kind: OptKind::IntegralBruteforce.as_str().to_string(),
                    ratio,
                    per_item: None,
                    enumerated_sequences: result.enumerated_sequences,
                }),
                mc: None,
                bounds,
                lemma_checks,
                trial_outcomes: Vec::new(),
            })
        }
        (Mode::Exact, AlgorithmChoice::FractionalKnapsack) => {
            let InstanceFile::Knapsack(ks) = instance else {
                return Err(HarnessError::Config(
                    "fractional-knapsack requires a knapsack instance".into(),
                ));
            };
            let result = exact_expectation_knapsack::<T>(ks, t, config.budget)?;
            let greedy = fractional_greedy::<T>(ks);
            let opt = greedy.objective.clone();
            let ratio = (opt.to_f64() > 0.0).then(|| result.expected_value.to_f64() / opt.to_f64());
            let bounds = knapsack_bound_entry(n, t, &opt, Some(&result.expected_value))?;
            let factor = (t >= 1 && t < n)
                .then(|| theorem2_bound_rat(n, t))
                .transpose()?;
            let mut per_item_pass = true;
            let per_item: Vec<PerItemExpectation> = (0..n)
                .map(|j| {
                    let expectation = &result.per_item[j];
                    let (lower_bound, pass) = match &factor {
                        Some(f) => {
                            let bound = T::from_rat(f) * greedy.fraction(j).clone();
                            let ok = exact_pass(expectation, &bound);
                            per_item_pass &= ok;
                            (Some(NumText::from_scalar(&bound)), Some(ok))
                        }
                        None => (None, None),
                    };
                    PerItemExpectation {
                        item: j,
                        expectation: NumText::from_scalar(expectation),
                        lower_bound,
                        pass,
                    }
                })
                .collect();
            let lemma_checks = vec![
                LemmaCheckEntry {
                    name: "alg5-feasibility".to_string(),
                    pass: result.feasible_always,
                    details: format!(
                        "packed size within capacity on {} sequences",
                        result.enumerated_sequences
                    ),
                },
                LemmaCheckEntry {
                    name: "lemma4-per-item".to_string(),
                    pass: per_item_pass,
                    details: "E[x_j] >= greedy fraction times the finite-n factor".to_string(),
                },
            ];
            Ok(ExperimentReport {
                config: echo,
                exact: Some(ExactSection {
                    expectation: NumText::from_scalar(&result.expected_value),
                    opt: NumText::from_scalar(&opt),
                    opt_kind: OptKind::FractionalGreedy.as_str().to_string(),
                    ratio,
                    per_item: Some(per_item),
                    enumerated_sequences: result.enumerated_sequences,
                }),
                mc: None,
                bounds,
                lemma_checks,
                trial_outcomes: Vec::new(),
            })
        }
        (Mode::Mc, algorithm) => {
            let req = McRequest {
                algorithm,
                trials: config.trials,
                master_seed: config.master_seed,
                t_override: Some(t),
                budget: config.budget,
            };
            let result = mc_estimate::<T>(instance, &req)?;
            let opt_text = NumText::with_exact(result.opt.value, result.opt.exact.clone());
            let mc_section = McSection::from_stats(
                &result.value_stats,
                result.ratio_stats.as_ref(),
                opt_text,
                result.opt.kind.as_str(),
                result.opt.conservative,
            );

            // Statistical pass rule: the bound is refuted only if the mean
            // lies more than four standard errors below the reference.
            let mut bounds = match algorithm {
                AlgorithmChoice::Gap(alg) => {
                    let opt_t = T::from_f64_lossless(result.opt.value);
                    gap_bound_entries(alg, n, t, &opt_t, None)?
                }
                AlgorithmChoice::FractionalKnapsack => {
                    let opt_t = T::from_f64_lossless(result.opt.value);
                    knapsack_bound_entry(n, t, &opt_t, None)?
                }
            };
            for entry in &mut bounds {
                if let Some(reference) = entry.reference {
                    let mean = result.value_stats.mean;
                    entry.measured = Some(mean);
                    entry.margin = Some(mean - reference);
                    entry.pass = result
                        .value_stats
                        .stderr
                        .map(|se| mean + 4.0 * se >= reference);
                }
            }
            let lemma_checks = vec![LemmaCheckEntry {
                name: "per-trial-invariants".to_string(),
                pass: result.violations == 0,
                details: match &result.first_violation {
                    None => format!("0 violations in {} trials", config.trials),
                    Some(first) => format!(
                        "{} violations in {} trials; first: {first}",
                        result.violations, config.trials
                    ),
                },
            }];
            Ok(ExperimentReport {
                config: echo,
                exact: None,
                mc: Some(mc_section),
                bounds,
                lemma_checks,
                trial_outcomes: result.outcomes,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_uniform_gap, GapGenRanges, KnapsackInstance};
    use num_bigint::BigInt;

    fn rat(x: i64) -> Rat {
        Rat::from_integer(BigInt::from(x))
    }

    fn tiny_gap_file() -> InstanceFile {
        InstanceFile::Gap(gen_uniform_gap(5, 2, 3, &GapGenRanges::small_integer()).unwrap())
    }

    fn base_config(mode: Mode, algorithm: AlgorithmChoice) -> ExperimentConfig {
        ExperimentConfig {
            source_label: "test".to_string(),
            algorithm,
            mode,
            trials: 400,
            master_seed: 9,
            t_override: None,
            arithmetic: Arithmetic::Rational,
            workers: None,
            budget: DEFAULT_BUDGET,
        }
    }

    #[test]
    fn stats_of_single_value() {
        let s = Stats::from_values(&[3.5]);
        assert_eq!(s.mean, 3.5);
        assert!(s.stderr.is_none());
    }

    #[test]
    fn stats_ci_is_proportional_to_stderr() {
        let s = Stats::from_values(&[1.0, 2.0, 3.0, 4.0]);
        let stderr = s.stderr.unwrap();
        assert!((s.ci99_half_width.unwrap() - 2.576 * stderr).abs() < 1e-12);
    }

    #[test]
    fn exact_gap_report_has_bound_and_coupling() {
        let file = tiny_gap_file();
        let config = base_config(Mode::Exact, AlgorithmChoice::Gap(GapAlgorithm::Random));
        let report = run_experiment(&file, &config).unwrap();
        let exact = report.exact.as_ref().unwrap();
        assert!(exact.expectation.exact.is_some());
        let bound = report
            .bounds
            .iter()
            .find(|b| b.name == "lemma3-half-finite-n")
            .unwrap();
        assert_eq!(bound.pass, Some(true));
        assert!(report
            .lemma_checks
            .iter()
            .any(|c| c.name == "coupling" && c.pass));
        assert!(report.all_bounds_pass());
    }

    #[test]
    fn exact_knapsack_report_has_per_item_bounds() {
        let inst = KnapsackInstance::new(
            rat(1),
            vec![rat(3), rat(2), rat(1)],
            vec![rat(1), rat(1), rat(1)],
        )
        .unwrap();
        let file = InstanceFile::Knapsack(inst);
        let config = base_config(Mode::Exact, AlgorithmChoice::FractionalKnapsack);
        let report = run_experiment(&file, &config).unwrap();
        let exact = report.exact.unwrap();
        assert_eq!(exact.expectation.exact.as_deref(), Some("11/6"));
        let per_item = exact.per_item.unwrap();
        assert_eq!(per_item.len(), 3);
        assert_eq!(per_item[0].pass, Some(true));
    }

    #[test]
    fn reports_are_reproducible_across_worker_counts() {
        let file = tiny_gap_file();
        let mut config = base_config(Mode::Mc, AlgorithmChoice::Gap(GapAlgorithm::Infeasible));
        config.arithmetic = Arithmetic::Float;
        config.workers = Some(1);
        let a = run_experiment(&file, &config).unwrap();
        config.workers = Some(4);
        let b = run_experiment(&file, &config).unwrap();
        let bytes_a = write_report(&a, ReportFormat::Json);
        let bytes_b = write_report(&b, ReportFormat::Json);
        assert_eq!(bytes_a, bytes_b);
        let csv_a = write_report(&a, ReportFormat::Csv);
        let csv_b = write_report(&b, ReportFormat::Csv);
        assert_eq!(csv_a, csv_b);
    }

    #[test]
    fn mc_report_carries_trials_in_csv() {
        let file = tiny_gap_file();
        let mut config = base_config(Mode::Mc, AlgorithmChoice::Gap(GapAlgorithm::Feasible));
        config.trials = 25;
        config.arithmetic = Arithmetic::Float;
        let report = run_experiment(&file, &config).unwrap();
        let csv = String::from_utf8(write_report(&report, ReportFormat::Csv)).unwrap();
        let data_rows = csv.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(data_rows, 26); // header + one row per trial
        assert!(csv.lines().any(|l| l.starts_with("# mc ")));
    }

    #[test]
    fn t_override_is_validated() {
        let file = tiny_gap_file();
        let mut config = base_config(Mode::Exact, AlgorithmChoice::Gap(GapAlgorithm::Infeasible));
        config.t_override = Some(5);
        assert!(matches!(
            run_experiment(&file, &config),
            Err(HarnessError::BadArguments(_))
        ));
    }
}
