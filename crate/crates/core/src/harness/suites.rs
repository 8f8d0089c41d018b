//! Named verification suites. Each suite builds a deterministic corpus from
//! its master seed, runs the corresponding battery, and reports failures with
//! enough detail (instance digest, permutation, tape) to replay them.

use super::bounds::{lemma3_bound_rat, theorem2_bound_rat};
use super::exact::{exact_expectation_knapsack, exact_gap_expectations};
use super::mc::{derive_trial_rng, verify_lemma2};
use super::HarnessError;
use crate::model::{
    check_feasibility, gen_knapsack_family, gen_uniform_gap, FamilyParams, GapGenRanges,
    GapInstance, KnapsackFamily, KnapsackInstance, Permutation,
};
use crate::offline::{fractional_greedy, solve_integral_gap_bruteforce};
use crate::online_gap::{run_coupled_gap, GapOracle, RandomTape};
use crate::online_knapsack::{run_fractional_knapsack_cached, verify_eq1, KnapsackOracle};
use crate::scalar::{Rat, Scalar};
use num_bigint::BigInt;
use rand::Rng;
use rayon::prelude::*;

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub cases: u64,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        if self.pass() {
            format!("{}: PASS ({} cases)", self.suite, self.cases)
        } else {
            format!(
                "{}: FAIL ({} of {} cases)\n{}",
                self.suite,
                self.failures.len(),
                self.cases,
                self.failures.join("\n")
            )
        }
    }
}

const MAX_REPORTED_FAILURES: usize = 16;

fn cap_failures(failures: &mut Vec<String>) {
    if failures.len() > MAX_REPORTED_FAILURES {
        let extra = failures.len() - MAX_REPORTED_FAILURES;
        failures.truncate(MAX_REPORTED_FAILURES);
        failures.push(format!("... and {extra} more"));
    }
}

/// Small-integer assignment corpus used by the exact suites.
fn tiny_gap_corpus(count: usize, master_seed: u64, sizes: &[(usize, usize)]) -> Vec<GapInstance> {
    (0..count)
        .map(|i| {
            let (n, m) = sizes[i % sizes.len()];
            gen_uniform_gap(
                n,
                m,
                master_seed.wrapping_add(i as u64),
                &GapGenRanges::small_integer(),
            )
            .expect("corpus ranges are valid")
        })
        .collect()
}

fn knapsack_corpus(count: usize, master_seed: u64, ns: &[usize]) -> Vec<KnapsackInstance> {
    let families = [
        KnapsackFamily::Uncorrelated,
        KnapsackFamily::WeaklyCorrelated,
        KnapsackFamily::StronglyCorrelated,
        KnapsackFamily::SubsetSum,
    ];
    (0..count)
        .map(|i| {
            let n = ns[i % ns.len()];
            let family = families[(i / ns.len()) % families.len()];
            gen_knapsack_family(
                family,
                n,
                master_seed.wrapping_add(i as u64),
                &FamilyParams {
                    coeff_range: 20,
                    offset: 4,
                    capacity: None,
                },
            )
            .expect("corpus parameters are valid")
        })
        .collect()
}

/// Pointwise coupling identity `v(y) + v(z) >= v(x)` on sampled triples in
/// exact arithmetic, plus exhaustive enumeration on a tiny sub-corpus.
pub fn suite_coupling(trials: u64, master_seed: u64) -> Result<SuiteReport, HarnessError> {
    let shapes = [(4, 1), (4, 2), (5, 1), (5, 2), (6, 2), (3, 2)];
    let instances = tiny_gap_corpus(
        usize::try_from(trials / 500)
            .unwrap_or(usize::MAX)
            .clamp(6, 240),
        master_seed,
        &shapes,
    );
    let per_instance = trials.div_ceil(instances.len() as u64).max(1);

    let results: Vec<(u64, Vec<String>)> = instances
        .par_iter()
        .enumerate()
        .map(|(idx, inst)| -> Result<(u64, Vec<String>), HarnessError> {
            let n = inst.num_items();
            let mut oracle = GapOracle::<Rat>::new(inst);
            let mut failures = Vec::new();
            let mut cases = 0u64;
            for trial in 0..per_instance {
                let mut rng = derive_trial_rng(master_seed ^ (idx as u64), trial);
                let perm = Permutation::sample(n, &mut rng);
                let tape = RandomTape::sample(n, &mut rng);
                let runs = run_coupled_gap(&mut oracle, &perm, &tape, false)?;
                cases += 1;
                let lhs = runs.feasible.value.clone() + runs.imitative.value.clone();
                if lhs < runs.infeasible.value {
                    failures.push(format!(
                        "coupling violated: instance {} perm {:?} draws {:?} coin {}",
                        inst.digest(),
                        perm.as_slice(),
                        tape.draws(),
                        tape.coin(),
                    ));
                }
            }
            Ok((cases, failures))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut cases = 0u64;
    let mut failures = Vec::new();
    for (c, f) in results {
        cases += c;
        failures.extend(f);
    }

    // Exhaustive tail: every permutation and every tape outcome on a corpus
    // covering all shapes with n <= 5, m <= 2.
    let exhaustive = tiny_gap_corpus(
        18,
        master_seed ^ 0xE0E0,
        &[
            (2, 1),
            (2, 2),
            (3, 1),
            (3, 2),
            (4, 1),
            (4, 2),
            (5, 1),
            (5, 2),
        ],
    );
    for inst in &exhaustive {
        let result = exact_gap_expectations::<Rat>(inst, inst.num_items() / 2, 1 << 26)?;
        cases += result.enumerated_sequences as u64;
        if !result.coupling_holds {
            failures.push(format!(
                "coupling violated on an enumerated path: instance {}",
                inst.digest()
            ));
        }
    }
    cap_failures(&mut failures);
    Ok(SuiteReport {
        suite: "coupling",
        cases,
        failures,
    })
}

/// Feasibility battery over randomized triples in float mode: the feasible,
/// imitative, and randomized outputs satisfy C1-C3; the infeasible output
/// satisfies C2-C3 and each overflow is removable by deleting the bin's last
/// accepted item.
pub fn suite_feasibility(trials: u64, master_seed: u64) -> Result<SuiteReport, HarnessError> {
    let shapes = [(6, 2), (8, 2), (8, 3), (10, 2), (12, 3), (5, 1)];
    let gap_instances: Vec<GapInstance> = (0..30)
        .map(|i| {
            let (n, m) = shapes[i % shapes.len()];
            gen_uniform_gap(
                n,
                m,
                master_seed.wrapping_add(i as u64),
                &GapGenRanges::default(),
            )
            .expect("corpus ranges are valid")
        })
        .collect();
    // Single-bin instances from the knapsack families exercise the m = 1 path.
    let single_bin: Vec<GapInstance> = knapsack_corpus(10, master_seed ^ 0x51, &[6, 8, 10])
        .iter()
        .map(KnapsackInstance::to_gap)
        .collect();
    let instances: Vec<GapInstance> = gap_instances.into_iter().chain(single_bin).collect();
    let per_instance = trials.div_ceil(instances.len() as u64).max(1);

    let results: Vec<(u64, Vec<String>)> = instances
        .par_iter()
        .enumerate()
        .map(|(idx, inst)| -> Result<(u64, Vec<String>), HarnessError> {
            let n = inst.num_items();
            let mut oracle = GapOracle::<f64>::new(inst);
            let mut failures = Vec::new();
            let mut cases = 0u64;
            for trial in 0..per_instance {
                let mut rng = derive_trial_rng(master_seed ^ 0xFEA5 ^ (idx as u64), trial);
                let perm = Permutation::sample(n, &mut rng);
                let tape = RandomTape::sample(n, &mut rng);
                let runs = run_coupled_gap(&mut oracle, &perm, &tape, true)?;
                cases += 1;
                let context = || {
                    format!(
                        "instance {} perm {:?} draws {:?} coin {}",
                        inst.digest(),
                        perm.as_slice(),
                        tape.draws(),
                        tape.coin(),
                    )
                };
                for run in [&runs.feasible, &runs.imitative] {
                    let report = check_feasibility::<f64>(&run.assignment, inst)?;
                    if !report.is_feasible() {
                        failures.push(format!(
                            "{} output infeasible: {}",
                            run.algorithm,
                            context()
                        ));
                    }
                }
                // The randomized combination is one of the two outputs above;
                // C2 holds for all runs by construction of `Assignment`.
                let x = &runs.infeasible;
                let report = check_feasibility::<f64>(&x.assignment, inst)?;
                for bin in 0..inst.num_bins() {
                    if report.satisfies_c1[bin] {
                        continue;
                    }
                    let last_accepted = x
                        .trace
                        .iter()
                        .rev()
                        .find(|r| r.accepted && r.selected_bin == Some(bin))
                        .map(|r| r.item);
                    match last_accepted {
                        Some(item) if report.overflow_items[bin].contains(&item) => {}
                        _ => failures.push(format!(
                            "overflow on bin {bin} not removable by the last accepted item: {}",
                            context()
                        )),
                    }
                }
            }
            Ok((cases, failures))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut cases = 0u64;
    let mut failures = Vec::new();
    for (c, f) in results {
        cases += c;
        failures.extend(f);
    }
    cap_failures(&mut failures);
    Ok(SuiteReport {
        suite: "feasibility",
        cases,
        failures,
    })
}

/// Pointwise displacement inequality and capacity feasibility of the online
/// fractional knapsack, in exact arithmetic.
pub fn suite_eq1(trials: u64, master_seed: u64) -> Result<SuiteReport, HarnessError> {
    let instances = knapsack_corpus(
        usize::try_from(trials / 500)
            .unwrap_or(usize::MAX)
            .clamp(8, 200),
        master_seed ^ 0xE41,
        &[4, 5, 6, 7],
    );
    let per_instance = trials.div_ceil(instances.len() as u64).max(1);

    let results: Vec<(u64, Vec<String>)> = instances
        .par_iter()
        .enumerate()
        .map(|(idx, inst)| -> Result<(u64, Vec<String>), HarnessError> {
            let n = inst.num_items();
            let capacity = Rat::from_rat(inst.capacity());
            let mut oracle = KnapsackOracle::<Rat>::new(inst);
            let mut failures = Vec::new();
            let mut cases = 0u64;
            let t = crate::online_knapsack::knapsack_sample_len(n);
            for trial in 0..per_instance {
                let mut rng = derive_trial_rng(master_seed ^ 0xE41 ^ (idx as u64), trial);
                let perm = Permutation::sample(n, &mut rng);
                cases += 1;
                // The run itself errors on any pre-clamp fraction outside
                // [0,1] in exact mode.
                let run = run_fractional_knapsack_cached(&mut oracle, &perm, t, false)?;
                if run.packed_size > capacity {
                    failures.push(format!(
                        "capacity exceeded: instance {} perm {:?}",
                        inst.digest(),
                        perm.as_slice()
                    ));
                }
                if let Some(violation) = verify_eq1::<Rat>(inst, &perm)? {
                    failures.push(format!(
                        "displacement inequality violated in round {}: instance {} perm {:?}",
                        violation.round,
                        inst.digest(),
                        perm.as_slice()
                    ));
                }
            }
            Ok((cases, failures))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut cases = 0u64;
    let mut failures = Vec::new();
    for (c, f) in results {
        cases += c;
        failures.extend(f);
    }
    cap_failures(&mut failures);
    Ok(SuiteReport {
        suite: "eq1",
        cases,
        failures,
    })
}

/// Exact finite-n guarantees of the fractional knapsack run (expected value
/// and per-item fractions) on a corpus of small instances, zero tolerance.
pub fn suite_lemma4(count: u64, master_seed: u64) -> Result<SuiteReport, HarnessError> {
    let instances = knapsack_corpus(
        usize::try_from(count).unwrap_or(usize::MAX).clamp(50, 200),
        master_seed ^ 0x14,
        &[4, 5, 6, 7],
    );
    let failures_nested: Vec<Vec<String>> = instances
        .par_iter()
        .map(|inst| -> Result<Vec<String>, HarnessError> {
            let n = inst.num_items();
            let t = crate::online_knapsack::knapsack_sample_len(n).max(1);
            let result = exact_expectation_knapsack::<Rat>(inst, t, 1 << 26)?;
            let greedy = fractional_greedy::<Rat>(inst);
            let factor = theorem2_bound_rat(n, t)?;
            let mut failures = Vec::new();
            if !result.feasible_always {
                failures.push(format!("capacity exceeded: instance {}", inst.digest()));
            }
            for j in 0..n {
                let bound = greedy.fraction(j).clone() * factor.clone();
                if result.per_item[j] < bound {
                    failures.push(format!(
                        "per-item bound violated for item {j}: instance {} E[x_j] = {} < {}",
                        inst.digest(),
                        result.per_item[j],
                        bound
                    ));
                }
            }
            let value_bound = factor * greedy.objective.clone();
            if result.expected_value < value_bound {
                failures.push(format!(
                    "value bound violated: instance {} E = {} < {}",
                    inst.digest(),
                    result.expected_value,
                    value_bound
                ));
            }
            Ok(failures)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let cases = instances.len() as u64;
    let mut failures: Vec<String> = failures_nested.into_iter().flatten().collect();
    cap_failures(&mut failures);
    Ok(SuiteReport {
        suite: "lemma4",
        cases,
        failures,
    })
}

/// Exact finite-n guarantee of the infeasible run (and the halved guarantee
/// of the randomized combination) against the exhaustive integral optimum.
pub fn suite_lemma3(count: u64, master_seed: u64) -> Result<SuiteReport, HarnessError> {
    let shapes = [(4, 1), (4, 2), (5, 1), (5, 2), (6, 1), (6, 2)];
    let instances = tiny_gap_corpus(
        usize::try_from(count).unwrap_or(usize::MAX).clamp(54, 200),
        master_seed ^ 0x13,
        &shapes,
    );
    let failures_nested: Vec<Vec<String>> = instances
        .par_iter()
        .map(|inst| -> Result<Vec<String>, HarnessError> {
            let n = inst.num_items();
            let t = n / 2;
            let result = exact_gap_expectations::<Rat>(inst, t, 1 << 26)?;
            let (_, opt) = solve_integral_gap_bruteforce(inst, 1 << 26)?;
            let factor = lemma3_bound_rat(n, t)?;
            let mut failures = Vec::new();
            let bound = factor.clone() * opt.clone();
            if result.infeasible < bound {
                failures.push(format!(
                    "infeasible-run bound violated: instance {} E = {} < {}",
                    inst.digest(),
                    result.infeasible,
                    bound
                ));
            }
            let half = Rat::new(BigInt::from(1), BigInt::from(2));
            let random_bound = half * factor * opt;
            if result.random < random_bound {
                failures.push(format!(
                    "randomized bound violated: instance {} E = {} < {}",
                    inst.digest(),
                    result.random,
                    random_bound
                ));
            }
            if !result.coupling_holds {
                failures.push(format!("coupling violated: instance {}", inst.digest()));
            }
            Ok(failures)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let cases = instances.len() as u64;
    let mut failures: Vec<String> = failures_nested.into_iter().flatten().collect();
    cap_failures(&mut failures);
    Ok(SuiteReport {
        suite: "lemma3",
        cases,
        failures,
    })
}

/// Sampled overflow-probability checks on randomly chosen
/// `(instance, round, bin)` cells.
pub fn suite_lemma2(trials: u64, master_seed: u64) -> Result<SuiteReport, HarnessError> {
    let cells = 8usize;
    let per_cell = (trials / cells as u64).max(100);
    let reports: Vec<_> = (0..cells)
        .into_par_iter()
        .map(|cell| -> Result<_, HarnessError> {
            let mut rng = derive_trial_rng(master_seed ^ 0x12, cell as u64);
            let n = 6 + (cell % 3);
            let m = 2 + (cell % 2);
            let inst = gen_uniform_gap(n, m, rng.random::<u64>(), &GapGenRanges::default())?;
            let t = n / 2;
            let ell = rng.random_range(t + 1..=n);
            let bin = rng.random_range(0..m);
            verify_lemma2(
                &inst,
                ell,
                bin,
                per_cell,
                master_seed ^ cell as u64,
                Some(t),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut failures = Vec::new();
    for report in &reports {
        if !report.pass {
            failures.push(format!(
                "overflow frequency {} above bound {} + 4 x {} (round {}, bin {}, Q {})",
                report.empirical,
                report.bound,
                report.stderr,
                report.ell,
                report.bin,
                report.revealed_digest
            ));
        }
    }
    cap_failures(&mut failures);
    Ok(SuiteReport {
        suite: "lemma2",
        cases: cells as u64 * per_cell,
        failures,
    })
}
