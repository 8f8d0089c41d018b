//! Command-line front end: instance generation, offline solving, simulation
//! experiments, and verification suites.
//!
//! Exit codes: 0 on success, 1 on runtime errors or failed checks, 2 on
//! usage errors. Standard output carries human-readable summaries; all
//! machine-readable data goes to the `--out` path.

mod spec;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rogap::harness::{
    self, suites, write_report, AlgorithmChoice, Arithmetic, ExperimentConfig, Mode, ReportFormat,
};
use rogap::model::{load_instance, save_instance, InstanceFile};
use rogap::offline::{
    fractional_greedy, solve_fractional_gap, solve_integral_gap_bruteforce,
    solve_integral_knapsack_bruteforce,
};
use rogap::{Rat, Scalar};
use serde::Deserialize;
use spec::{build_instance, parse_gen_spec, parse_kv, GenKind};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        Self::Runtime(e.into())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Parser)]
#[command(
    name = "rogap",
    version,
    about = "Online generalized assignment and fractional knapsack in the random-order model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file from a seeded generator
    Generate(GenerateArgs),
    /// Solve an instance offline (fractional relaxation or exhaustive integral)
    Solve(SolveArgs),
    /// Run a simulation experiment and write a report
    Run(Box<RunArgs>),
    /// Run a named verification suite
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Uniform random assignment instance
    #[arg(long)]
    gap: bool,
    /// Knapsack instance from a standard family
    #[arg(long)]
    knapsack: bool,
    /// Unit-size, unit-capacity instance with i.i.d. values
    #[arg(long = "unit-iid")]
    unit_iid: bool,
    /// Generator parameters (e.g. n=6 m=2 vmax=10)
    #[arg(value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    seed: u64,
    /// Output path for the instance file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file path
    instance: PathBuf,
    /// Which optimum: fractional | integral
    #[arg(long)]
    which: String,
    /// Enumeration budget for the integral solver (default from ROGAP_BUDGET)
    #[arg(long)]
    budget: Option<u64>,
    /// Arithmetic for the fractional LP: float | rational
    #[arg(long, default_value = "float")]
    arithmetic: String,
    /// Write the solution as JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct RunArgs {
    /// Instance file path
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Generator spec, e.g. gap:n=6,m=2,seed=1
    #[arg(long = "gen")]
    gen_spec: Option<String>,
    /// Full experiment configuration file (JSON); exclusive with other flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// infeasible-gap | feasible-gap | imitative-gap | random-gap | fractional-knapsack
    #[arg(long)]
    algorithm: Option<String>,
    /// exact | mc
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sampling-phase override (defaults: n/2 for assignment, n/e for knapsack)
    #[arg(long)]
    t: Option<usize>,
    /// float | rational
    #[arg(long)]
    arithmetic: Option<String>,
    /// json | csv
    #[arg(long)]
    format: Option<String>,
    /// Report output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (never changes results)
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    /// Write the round-by-round trace of one derived trial (for replays)
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Trial index to trace (default 0)
    #[arg(long, default_value_t = 0)]
    trace_trial: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// lemma2 | lemma4 | coupling | feasibility | eq1
    suite: String,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (never changes results)
    #[arg(long)]
    workers: Option<usize>,
}

/// Experiment configuration file contents (`run --config`).
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfigFile {
    /// Instance path or generator spec string.
    instance: String,
    algorithm: String,
    mode: Option<String>,
    trials: Option<u64>,
    seed: Option<u64>,
    t: Option<usize>,
    arithmetic: Option<String>,
    format: Option<String>,
    out: Option<String>,
    workers: Option<usize>,
    budget: Option<u64>,
    trace: Option<String>,
    trace_trial: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(checks_failed) => {
            if checks_failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Generate(args) => cmd_generate(args).map(|()| false),
        Command::Solve(args) => cmd_solve(args).map(|()| false),
        Command::Run(args) => cmd_run(*args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn default_budget() -> u64 {
    std::env::var("ROGAP_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(harness::DEFAULT_BUDGET)
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let kind = match (args.gap, args.knapsack, args.unit_iid) {
        (true, false, false) => GenKind::Gap,
        (false, true, false) => GenKind::Knapsack,
        (false, false, true) => GenKind::UnitIid,
        _ => {
            return Err(usage(
                "exactly one of --gap, --knapsack, --unit-iid is required",
            ))
        }
    };
    let entries = parse_kv(&args.params)?;
    let instance = build_instance(kind, &entries, args.seed)?;
    let bytes = save_instance(&instance);
    std::fs::write(&args.out, &bytes).with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} ({}, n={}, m={}) digest {}",
        args.out.display(),
        instance.kind(),
        instance.num_items(),
        instance.num_bins(),
        instance.digest()
    );
    Ok(())
}

fn load_instance_file(path: &Path) -> Result<InstanceFile, CliError> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(load_instance(&bytes)?)
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let instance = load_instance_file(&args.instance)?;
    let budget = args.budget.unwrap_or_else(default_budget);
    let arithmetic: Arithmetic = args.arithmetic.parse().map_err(usage)?;
    let mut solution_json = serde_json::Map::new();
    solution_json.insert("which".into(), args.which.clone().into());

    match args.which.as_str() {
        "fractional" => match &instance {
            InstanceFile::Knapsack(ks) => {
                let greedy = fractional_greedy::<Rat>(ks);
                println!(
                    "fractional optimum {} (exact {})",
                    greedy.objective.to_f64(),
                    greedy.objective
                );
                solution_json.insert("objective".into(), greedy.objective.to_f64().into());
                solution_json.insert(
                    "objective_exact".into(),
                    greedy.objective.to_string().into(),
                );
                let fractions: Vec<String> = (0..ks.num_items())
                    .map(|j| greedy.fraction(j).to_string())
                    .collect();
                solution_json.insert("fractions".into(), fractions.into());
            }
            InstanceFile::Gap(gap) => {
                let items: Vec<usize> = (0..gap.num_items()).collect();
                let (objective, exact, entries) = match arithmetic {
                    Arithmetic::Rational => {
                        let sol = solve_fractional_gap::<Rat>(gap, &items)?;
                        let entries = primal_strings(gap.num_bins(), gap.num_items(), |i, j| {
                            sol.primal.get(i, j).to_string()
                        });
                        (
                            sol.objective.to_f64(),
                            Some(sol.objective.to_string()),
                            entries,
                        )
                    }
                    Arithmetic::Float => {
                        let sol = solve_fractional_gap::<f64>(gap, &items)?;
                        let entries = primal_strings(gap.num_bins(), gap.num_items(), |i, j| {
                            sol.primal.get(i, j).to_string()
                        });
                        (sol.objective, None, entries)
                    }
                };
                match &exact {
                    Some(text) => println!("fractional optimum {objective} (exact {text})"),
                    None => println!("fractional optimum {objective}"),
                }
                solution_json.insert("objective".into(), objective.into());
                if let Some(text) = exact {
                    solution_json.insert("objective_exact".into(), text.into());
                }
                solution_json.insert("assignment".into(), entries.into());
            }
        },
        "integral" => {
            let (value, bins): (Rat, Option<Vec<Option<usize>>>) = match &instance {
                InstanceFile::Knapsack(ks) => {
                    (solve_integral_knapsack_bruteforce(ks, budget)?, None)
                }
                InstanceFile::Gap(gap) => {
                    let (assignment, value) = solve_integral_gap_bruteforce(gap, budget)?;
                    let bins = (0..gap.num_items()).map(|j| assignment.bin_of(j)).collect();
                    (value, Some(bins))
                }
            };
            println!("integral optimum {} (exact {})", value.to_f64(), value);
            solution_json.insert("objective".into(), value.to_f64().into());
            solution_json.insert("objective_exact".into(), value.to_string().into());
            if let Some(bins) = bins {
                solution_json.insert(
                    "bins".into(),
                    bins.into_iter()
                        .map(|b| match b {
                            Some(i) => serde_json::Value::from(i),
                            None => serde_json::Value::Null,
                        })
                        .collect::<Vec<_>>()
                        .into(),
                );
            }
        }
        other => {
            return Err(usage(format!(
                "--which must be fractional or integral, got `{other}`"
            )))
        }
    }

    if let Some(out) = &args.out {
        let mut bytes = serde_json::to_vec_pretty(&serde_json::Value::Object(solution_json))
            .expect("solution serialization");
        bytes.push(b'\n');
        std::fs::write(out, bytes).with_context(|| format!("writing {}", out.display()))?;
        println!("solution written to {}", out.display());
    }
    Ok(())
}

fn primal_strings(m: usize, n: usize, get: impl Fn(usize, usize) -> String) -> Vec<Vec<String>> {
    (0..m)
        .map(|i| (0..n).map(|j| get(i, j)).collect())
        .collect()
}

struct ResolvedRun {
    instance: InstanceFile,
    source_label: String,
    config: ExperimentConfig,
    format: ReportFormat,
    out: Option<PathBuf>,
    trace: Option<PathBuf>,
    trace_trial: u64,
}

fn resolve_run(args: RunArgs) -> Result<ResolvedRun, CliError> {
    let args = if let Some(config_path) = &args.config {
        let flags_set = args.instance.is_some()
            || args.gen_spec.is_some()
            || args.algorithm.is_some()
            || args.mode.is_some()
            || args.trials.is_some()
            || args.seed.is_some()
            || args.t.is_some()
            || args.arithmetic.is_some()
            || args.format.is_some()
            || args.out.is_some()
            || args.workers.is_some()
            || args.budget.is_some();
        if flags_set {
            return Err(usage("--config is exclusive with other run flags"));
        }
        let bytes = std::fs::read(config_path)
            .with_context(|| format!("reading {}", config_path.display()))?;
        let file: RunConfigFile =
            serde_json::from_slice(&bytes).map_err(|e| usage(format!("bad config file: {e}")))?;
        let is_spec = file.instance.contains(':');
        RunArgs {
            instance: (!is_spec).then(|| PathBuf::from(&file.instance)),
            gen_spec: is_spec.then(|| file.instance.clone()),
            config: None,
            algorithm: Some(file.algorithm),
            mode: file.mode,
            trials: file.trials,
            seed: file.seed,
            t: file.t,
            arithmetic: file.arithmetic,
            format: file.format,
            out: file.out.map(PathBuf::from),
            workers: file.workers,
            budget: file.budget,
            trace: file.trace.map(PathBuf::from),
            trace_trial: file.trace_trial.unwrap_or(0),
        }
    } else {
        args
    };

    let (instance, source_label) = match (&args.instance, &args.gen_spec) {
        (Some(path), None) => (load_instance_file(path)?, path.display().to_string()),
        (None, Some(genspec)) => (parse_gen_spec(genspec)?, genspec.clone()),
        _ => return Err(usage("exactly one of --instance or --gen is required")),
    };
    let algorithm: AlgorithmChoice = args
        .algorithm
        .as_deref()
        .ok_or_else(|| usage("--algorithm is required"))?
        .parse()
        .map_err(usage)?;
    let mode: Mode = args
        .mode
        .as_deref()
        .unwrap_or("mc")
        .parse()
        .map_err(usage)?;
    let arithmetic: Arithmetic = args
        .arithmetic
        .as_deref()
        .unwrap_or("float")
        .parse()
        .map_err(usage)?;
    let format: ReportFormat = args
        .format
        .as_deref()
        .unwrap_or("json")
        .parse()
        .map_err(usage)?;
    let trials = args.trials.unwrap_or(1000);
    if mode == Mode::Mc && trials == 0 {
        return Err(usage("mc mode requires trials >= 1"));
    }
    let config = ExperimentConfig {
        source_label: source_label.clone(),
        algorithm,
        mode,
        trials,
        master_seed: args.seed.unwrap_or(0),
        t_override: args.t,
        arithmetic,
        workers: args.workers,
        budget: args.budget.unwrap_or_else(default_budget),
    };
    Ok(ResolvedRun {
        instance,
        source_label,
        config,
        format,
        out: args.out,
        trace: args.trace,
        trace_trial: args.trace_trial,
    })
}

fn cmd_run(args: RunArgs) -> Result<bool, CliError> {
    let resolved = resolve_run(args)?;
    let report = harness::run_experiment(&resolved.instance, &resolved.config)?;

    let mut summary = String::new();
    let c = &report.config;
    let _ = writeln!(
        summary,
        "instance {} ({}, n={}, m={}) algorithm={} mode={} t={} arithmetic={}",
        resolved.source_label,
        c.instance_kind,
        c.num_items,
        c.num_bins,
        c.algorithm,
        c.mode,
        c.t,
        c.arithmetic
    );
    if let Some(exact) = &report.exact {
        let exact_text = exact
            .expectation
            .exact
            .as_deref()
            .map(|t| format!(" (exact {t})"))
            .unwrap_or_default();
        let _ = writeln!(
            summary,
            "exact expectation {}{} over {} sequences; opt {} ({}); ratio {}",
            exact.expectation.value,
            exact_text,
            exact.enumerated_sequences,
            exact.opt.value,
            exact.opt_kind,
            exact
                .ratio
                .map(|r| r.to_string())
                .unwrap_or_else(|| "NA".into())
        );
    }
    if let Some(mc) = &report.mc {
        let _ = writeln!(
            summary,
            "mc mean {} over {} trials (stderr {}); opt {} ({}{}); ratio mean {}",
            mc.mean,
            mc.trials,
            mc.stderr
                .map(|s| s.to_string())
                .unwrap_or_else(|| "NA".into()),
            mc.opt.value,
            mc.opt_kind,
            if mc.opt_conservative {
                ", conservative"
            } else {
                ""
            },
            mc.ratio_mean
                .map(|r| r.to_string())
                .unwrap_or_else(|| "NA".into())
        );
    }
    for bound in &report.bounds {
        let verdict = match bound.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "info",
        };
        let _ = writeln!(
            summary,
            "bound {}: factor={} reference={} measured={} margin={} [{verdict}]",
            bound.name,
            bound.bound.value,
            bound
                .reference
                .map(|v| v.to_string())
                .unwrap_or_else(|| "NA".into()),
            bound
                .measured
                .map(|v| v.to_string())
                .unwrap_or_else(|| "NA".into()),
            bound
                .margin
                .map(|v| v.to_string())
                .unwrap_or_else(|| "NA".into()),
        );
    }
    for check in &report.lemma_checks {
        let _ = writeln!(
            summary,
            "check {}: {} ({})",
            check.name,
            if check.pass { "PASS" } else { "FAIL" },
            check.details
        );
    }
    print!("{summary}");

    if let Some(out) = &resolved.out {
        let bytes = write_report(&report, resolved.format);
        std::fs::write(out, &bytes).with_context(|| format!("writing {}", out.display()))?;
        println!("report written to {}", out.display());
    }
    if let Some(trace_path) = &resolved.trace {
        let bytes = match resolved.config.arithmetic {
            Arithmetic::Float => harness::trace_trial::<f64>(
                &resolved.instance,
                resolved.config.algorithm,
                report.config.t,
                resolved.config.master_seed,
                resolved.trace_trial,
            )?,
            Arithmetic::Rational => harness::trace_trial::<rogap::Rat>(
                &resolved.instance,
                resolved.config.algorithm,
                report.config.t,
                resolved.config.master_seed,
                resolved.trace_trial,
            )?,
        };
        std::fs::write(trace_path, &bytes)
            .with_context(|| format!("writing {}", trace_path.display()))?;
        println!(
            "trace of trial {} written to {}",
            resolved.trace_trial,
            trace_path.display()
        );
    }
    Ok(!report.all_bounds_pass())
}

fn cmd_verify(args: VerifyArgs) -> Result<bool, CliError> {
    if !["lemma2", "lemma4", "coupling", "feasibility", "eq1"].contains(&args.suite.as_str()) {
        return Err(usage(format!(
            "unknown suite `{}` (expected lemma2, lemma4, coupling, feasibility, or eq1)",
            args.suite
        )));
    }
    let report = harness::with_workers(args.workers, || match args.suite.as_str() {
        "lemma2" => suites::suite_lemma2(args.trials, args.seed),
        "lemma4" => suites::suite_lemma4(args.trials, args.seed),
        "coupling" => suites::suite_coupling(args.trials, args.seed),
        "feasibility" => suites::suite_feasibility(args.trials, args.seed),
        _ => suites::suite_eq1(args.trials, args.seed),
    })?;
    println!("{}", report.summary());
    Ok(!report.pass())
}
