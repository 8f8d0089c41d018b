//! Seeded Monte Carlo estimation with order-independent reproducibility.
//!
//! Every trial derives its own generator from the master seed and the trial
//! index via the counter-based ChaCha stream mechanism, so results are
//! identical for any worker count and any execution order. Aggregation runs
//! in trial-index order.

use super::bounds::harmonic;
use super::{AlgorithmChoice, HarnessError, Stats, TrialOutcome};
use crate::model::{check_feasibility, GapInstance, InstanceFile, KnapsackInstance, Permutation};
use crate::offline::{
    fractional_greedy, solve_fractional_gap, solve_integral_gap_bruteforce,
    solve_integral_knapsack_bruteforce, OfflineError,
};
use crate::online_gap::{run_gap, select_bin, GapAlgorithm, GapOracle, RandomTape};
use crate::online_knapsack::{run_fractional_knapsack_cached, KnapsackOracle};
use crate::scalar::{Rat, Scalar};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

/// Counter-based per-trial generator: same master key, distinct stream.
pub fn derive_trial_rng(master_seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// How the denominator of reported ratios was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptKind {
    /// Exhaustive integral optimum.
    IntegralBruteforce,
    /// Exact optimum of the fractional relaxation (the right reference for
    /// the fractional knapsack algorithm).
    FractionalGreedy,
    /// LP upper bound used when the exhaustive search exceeds the budget;
    /// ratios against it are conservative.
    LpUpperBound,
}

impl OptKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::IntegralBruteforce => "integral-bruteforce",
            Self::FractionalGreedy => "fractional-greedy",
            Self::LpUpperBound => "lp-upper-bound",
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptReference {
    pub value: f64,
    pub exact: Option<String>,
    pub kind: OptKind,
    pub conservative: bool,
}

#[derive(Clone, Debug)]
pub struct McResult {
    pub value_stats: Stats,
    pub ratio_stats: Option<Stats>,
    pub opt: OptReference,
    pub outcomes: Vec<TrialOutcome>,
    /// Count of per-trial invariant violations (feasibility for the feasible
    /// algorithms, removable overflow for the infeasible one).
    pub violations: u64,
    pub first_violation: Option<String>,
}

pub struct McRequest {
    pub algorithm: AlgorithmChoice,
    pub trials: u64,
    pub master_seed: u64,
    pub t_override: Option<usize>,
    pub budget: u64,
}

/// Offline reference value for an assignment instance: exhaustive when the
/// budget allows, otherwise the LP upper bound flagged as conservative.
pub fn gap_opt_reference<T: Scalar>(
    inst: &GapInstance,
    budget: u64,
) -> Result<OptReference, HarnessError> {
    match solve_integral_gap_bruteforce(inst, budget) {
        Ok((_, value)) => Ok(OptReference {
            value: value.to_f64(),
            exact: Some(value.to_string()),
            kind: OptKind::IntegralBruteforce,
            conservative: false,
        }),
        Err(OfflineError::BudgetExceeded { .. }) => {
            let items: Vec<usize> = (0..inst.num_items()).collect();
            let sol = solve_fractional_gap::<T>(inst, &items)?;
            Ok(OptReference {
                value: sol.objective.to_f64(),
                exact: sol.objective.exact_str(),
                kind: OptKind::LpUpperBound,
                conservative: true,
            })
        }
        Err(e) => Err(e.into()),
    }
}

/// Reference for the fractional knapsack algorithm: the exact fractional
/// optimum.
pub fn knapsack_opt_reference(inst: &KnapsackInstance) -> OptReference {
    let greedy = fractional_greedy::<Rat>(inst);
    OptReference {
        value: greedy.objective.to_f64(),
        exact: Some(greedy.objective.to_string()),
        kind: OptKind::FractionalGreedy,
        conservative: false,
    }
}

/// Integral reference for assignment algorithms running on a knapsack
/// instance.
pub fn knapsack_integral_opt_reference<T: Scalar>(
    inst: &KnapsackInstance,
    budget: u64,
) -> Result<OptReference, HarnessError> {
    match solve_integral_knapsack_bruteforce(inst, budget) {
        Ok(value) => Ok(OptReference {
            value: value.to_f64(),
            exact: Some(value.to_string()),
            kind: OptKind::IntegralBruteforce,
            conservative: false,
        }),
        Err(OfflineError::BudgetExceeded { .. }) => {
            let gap = inst.to_gap();
            let items: Vec<usize> = (0..inst.num_items()).collect();
            let sol = solve_fractional_gap::<T>(&gap, &items)?;
            Ok(OptReference {
                value: sol.objective.to_f64(),
                exact: sol.objective.exact_str(),
                kind: OptKind::LpUpperBound,
                conservative: true,
            })
        }
        Err(e) => Err(e.into()),
    }
}

const TRIAL_CHUNK: usize = 256;

struct TrialRecord {
    outcome: TrialOutcome,
    violation: Option<String>,
}

fn gap_trial<T: Scalar>(
    oracle: &mut GapOracle<'_, T>,
    algorithm: GapAlgorithm,
    index: u64,
    master_seed: u64,
    t: usize,
    opt: &OptReference,
) -> Result<TrialRecord, HarnessError> {
    let inst = oracle.instance();
    let n = inst.num_items();
    let mut rng = derive_trial_rng(master_seed, index);
    let perm = Permutation::sample(n, &mut rng);
    let tape = RandomTape::sample_with_t(n, t, &mut rng);
    let run = run_gap(algorithm, oracle, &perm, &tape, false)?;

    let violation = match algorithm {
        GapAlgorithm::Infeasible => {
            let report = check_feasibility::<T>(&run.assignment, inst)?;
            let mut bad = None;
            for bin in 0..inst.num_bins() {
                if !report.satisfies_c1[bin] && report.overflow_items[bin].is_empty() {
                    bad = Some(format!(
                        "bin {bin} overflow not removable (instance {}, perm {}, tape {})",
                        inst.digest(),
                        perm.digest(),
                        tape.digest()
                    ));
                }
            }
            bad
        }
        _ => {
            let report = check_feasibility::<T>(&run.assignment, inst)?;
            if report.is_feasible() {
                None
            } else {
                Some(format!(
                    "infeasible output (instance {}, perm {}, tape {})",
                    inst.digest(),
                    perm.digest(),
                    tape.digest()
                ))
            }
        }
    };

    let value = run.value.to_f64();
    let ratio = (opt.value > 0.0).then(|| value / opt.value);
    Ok(TrialRecord {
        outcome: TrialOutcome {
            index,
            seed_stream: index,
            perm_digest: perm.digest(),
            value,
            opt: opt.value,
            ratio,
        },
        violation,
    })
}

fn knapsack_trial<T: Scalar>(
    oracle: &mut KnapsackOracle<'_, T>,
    index: u64,
    master_seed: u64,
    t: usize,
    opt: &OptReference,
) -> Result<TrialRecord, HarnessError> {
    let inst = oracle.instance();
    let n = inst.num_items();
    let mut rng = derive_trial_rng(master_seed, index);
    let perm = Permutation::sample(n, &mut rng);
    let run = run_fractional_knapsack_cached(oracle, &perm, t, false)?;
    let capacity = T::from_rat(inst.capacity());
    let violation = if run.packed_size.le_abs(&capacity) {
        None
    } else {
        Some(format!(
            "packed size above capacity (instance {}, perm {})",
            inst.digest(),
            perm.digest()
        ))
    };
    let value = run.value.to_f64();
    let ratio = (opt.value > 0.0).then(|| value / opt.value);
    Ok(TrialRecord {
        outcome: TrialOutcome {
            index,
            seed_stream: index,
            perm_digest: perm.digest(),
            value,
            opt: opt.value,
            ratio,
        },
        violation,
    })
}

/// Runs `trials` independent trials. The result is a pure function of the
/// request; worker count only changes the execution schedule.
pub fn mc_estimate<T: Scalar>(
    instance: &InstanceFile,
    req: &McRequest,
) -> Result<McResult, HarnessError> {
    if req.trials == 0 {
        return Err(HarnessError::BadArguments("trials must be >= 1".into()));
    }
    let n = instance.num_items();
    let indices: Vec<u64> = (0..req.trials).collect();

    let (opt, records): (OptReference, Vec<TrialRecord>) = match (&req.algorithm, instance) {
        (AlgorithmChoice::FractionalKnapsack, InstanceFile::Knapsack(inst)) => {
            let t = req
                .t_override
                .unwrap_or_else(|| crate::online_knapsack::knapsack_sample_len(n));
            validate_t(t, n)?;
            let opt = knapsack_opt_reference(inst);
            let records = indices
                .par_chunks(TRIAL_CHUNK)
                .map(|chunk| {
                    let mut oracle = KnapsackOracle::<T>::new(inst);
                    chunk
                        .iter()
                        .map(|&i| knapsack_trial(&mut oracle, i, req.master_seed, t, &opt))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .flatten()
                .collect();
            (opt, records)
        }
        (AlgorithmChoice::FractionalKnapsack, InstanceFile::Gap(_)) => {
            return Err(HarnessError::Config(
                "fractional-knapsack requires a knapsack instance".into(),
            ));
        }
        (AlgorithmChoice::Gap(alg), file) => {
            let owned_gap;
            let (gap, opt) = match file {
                InstanceFile::Gap(inst) => (inst, gap_opt_reference::<T>(inst, req.budget)?),
                InstanceFile::Knapsack(ks) => {
                    owned_gap = ks.to_gap();
                    let opt = knapsack_integral_opt_reference::<T>(ks, req.budget)?;
                    (&owned_gap, opt)
                }
            };
            let t = req.t_override.unwrap_or(n / 2);
            validate_t(t, n)?;
            let alg = *alg;
            let records = indices
                .par_chunks(TRIAL_CHUNK)
                .map(|chunk| {
                    let mut oracle = GapOracle::<T>::new(gap);
                    chunk
                        .iter()
                        .map(|&i| gap_trial(&mut oracle, alg, i, req.master_seed, t, &opt))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .flatten()
                .collect();
            (opt, records)
        }
    };

    let mut outcomes = Vec::with_capacity(records.len());
    let mut violations = 0u64;
    let mut first_violation = None;
    for record in records {
        if let Some(v) = record.violation {
            violations += 1;
            first_violation.get_or_insert(v);
        }
        outcomes.push(record.outcome);
    }
    let values: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
    let value_stats = Stats::from_values(&values);
    let ratio_stats = if outcomes.iter().all(|o| o.ratio.is_some()) {
        let ratios: Vec<f64> = outcomes.iter().map(|o| o.ratio.unwrap()).collect();
        Some(Stats::from_values(&ratios))
    } else {
        None
    };
    Ok(McResult {
        value_stats,
        ratio_stats,
        opt,
        outcomes,
        violations,
        first_violation,
    })
}

fn validate_t(t: usize, n: usize) -> Result<(), HarnessError> {
    if t > n {
        return Err(HarnessError::BadArguments(format!(
            "sampling length {t} exceeds {n} rounds"
        )));
    }
    Ok(())
}

/// Outcome of the sampled overflow-probability check for one
/// `(instance, round, bin)` cell.
#[derive(Clone, Debug)]
pub struct Lemma2Report {
    pub ell: usize,
    pub bin: usize,
    pub t: usize,
    pub trials: u64,
    pub bound: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub pass: bool,
    pub revealed_digest: String,
}

/// Estimates the probability that the *tentative* loads of rounds
/// `t+1..ell-1` exceed the capacity of one bin, for a fixed revealed set
/// `Q_{ell-1}`, and compares it against `sum_{k=t+1}^{ell-1} 1/k` plus four
/// standard errors.
///
/// Tentative loads count every selected item regardless of acceptance, which
/// is exactly the quantity the bound controls.
pub fn verify_lemma2(
    inst: &GapInstance,
    ell: usize,
    bin: usize,
    trials: u64,
    master_seed: u64,
    t_override: Option<usize>,
) -> Result<Lemma2Report, HarnessError> {
    let n = inst.num_items();
    let t = t_override.unwrap_or(n / 2);
    if !(t < ell && ell <= n) {
        return Err(HarnessError::BadArguments(format!(
            "round {ell} must satisfy t = {t} < ell <= n = {n}"
        )));
    }
    if bin >= inst.num_bins() {
        return Err(HarnessError::BadArguments(format!(
            "bin {bin} out of range for {} bins",
            inst.num_bins()
        )));
    }
    if trials == 0 {
        return Err(HarnessError::BadArguments("trials must be >= 1".into()));
    }

    // Fix the revealed set Q_{ell-1} from the master seed.
    let mut rng = derive_trial_rng(master_seed, u64::MAX);
    let base = Permutation::sample(n, &mut rng);
    let revealed_set: Vec<usize> = base.as_slice()[..ell - 1].to_vec();

    let cap: f64 = inst.data::<f64>().caps[bin];
    let mut overflows = 0u64;
    let mut oracle = GapOracle::<f64>::new(inst);
    for trial in 0..trials {
        let mut rng = derive_trial_rng(master_seed, trial);
        // Random arrival order of the fixed revealed set.
        let order = Permutation::sample(ell - 1, &mut rng);
        let mut revealed: Vec<usize> = Vec::with_capacity(ell - 1);
        let mut tentative_load = 0.0f64;
        for k in 1..ell {
            let item = revealed_set[order.item_at(k - 1)];
            let pos = revealed.binary_search(&item).expect_err("distinct items");
            revealed.insert(pos, item);
            if k <= t {
                continue;
            }
            let row = oracle.frac_row(&revealed, item)?;
            let draw: f64 = rng.random();
            if select_bin(&row, &draw)? == Some(bin) {
                tentative_load += oracle.data().size(bin, item);
            }
        }
        if tentative_load > cap {
            overflows += 1;
        }
    }

    let bound = if ell >= t + 2 {
        harmonic(ell - 1) - harmonic(t)
    } else {
        0.0
    };
    let empirical = overflows as f64 / trials as f64;
    let stderr = (empirical * (1.0 - empirical) / trials as f64).sqrt();
    let pass = empirical <= bound + 4.0 * stderr;
    Ok(Lemma2Report {
        ell,
        bin,
        t,
        trials,
        bound,
        empirical,
        stderr,
        pass,
        revealed_digest: crate::util::short_digest(
            revealed_set
                .iter()
                .map(|j| j.to_string())
                .collect::<Vec<_>>()
                .join(",")
                .as_bytes(),
        ),
    })
}
