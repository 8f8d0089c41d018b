//! The four online assignment algorithms, driven by an explicit permutation
//! and an explicit random tape.
//!
//! Randomness is externalized: every round after the sampling phase consumes
//! one uniform draw from the tape (whether or not an item gets assigned) and
//! maps it to a bin by inverse CDF over the canonical LP row of the current
//! item. Running several algorithms on the same `(instance, permutation,
//! tape)` therefore realizes the shared bin-selection vector exactly, which
//! makes the coupling inequality `v(y) + v(z) >= v(x)` a deterministic,
//! testable identity rather than a statement in expectation.

use crate::model::{Assignment, GapData, GapInstance, ModelError, Permutation};
use crate::offline::{solve_fractional_gap, OfflineError};
use crate::scalar::Scalar;
use crate::util::{short_digest, subset_key, BoundedCache, SubsetKey};
use rand::Rng;
use std::rc::Rc;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OnlineError {
    #[error("fractional row sums to {sum}, above one beyond tolerance")]
    RowSumExceedsOne { sum: f64 },
    #[error("bad tape: {0}")]
    BadTape(String),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("packed fraction {value} of item {item} in round {round} lies outside [0,1]")]
    FractionOutOfRange {
        round: usize,
        item: usize,
        value: f64,
    },
    #[error("negative compensation summand {value} in round {round}")]
    NegativeSummand { round: usize, value: f64 },
    #[error(transparent)]
    Solver(#[from] OfflineError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The online assignment algorithm variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GapAlgorithm {
    /// Accepts whenever the bin load from previous rounds is within capacity,
    /// so each bin may overflow by one item.
    Infeasible,
    /// Accepts only if the item still fits after adding.
    Feasible,
    /// Mirrors the feasible run and assigns, per bin, only the first item the
    /// mirrored run had to reject.
    Imitative,
    /// Runs feasible or imitative, each with probability one half.
    Random,
}

impl FromStr for GapAlgorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "infeasible-gap" => Ok(Self::Infeasible),
            "feasible-gap" => Ok(Self::Feasible),
            "imitative-gap" => Ok(Self::Imitative),
            "random-gap" => Ok(Self::Random),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

impl std::fmt::Display for GapAlgorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Self::Infeasible => "infeasible-gap",
            Self::Feasible => "feasible-gap",
            Self::Imitative => "imitative-gap",
            Self::Random => "random-gap",
        };
        f.write_str(name)
    }
}

/// The per-run randomness: one uniform draw for each round after the sampling
/// phase, plus the coin for the randomized combination.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomTape {
    t: usize,
    draws: Vec<f64>,
    coin: f64,
}

impl RandomTape {
    /// Tape for `n` rounds with the default sampling length `floor(n/2)`.
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self::sample_with_t(n, n / 2, rng)
    }

    pub fn sample_with_t<R: Rng + ?Sized>(n: usize, t: usize, rng: &mut R) -> Self {
        assert!(t <= n, "sampling phase cannot exceed the number of rounds");
        let draws = (0..n - t).map(|_| rng.random::<f64>()).collect();
        let coin = rng.random::<f64>();
        Self { t, draws, coin }
    }

    pub fn from_parts(t: usize, draws: Vec<f64>, coin: f64) -> Result<Self, OnlineError> {
        if !(0.0..1.0).contains(&coin) {
            return Err(OnlineError::BadTape(format!("coin {coin} outside [0,1)")));
        }
        if let Some(bad) = draws.iter().find(|d| !(0.0..1.0).contains(*d)) {
            return Err(OnlineError::BadTape(format!("draw {bad} outside [0,1)")));
        }
        Ok(Self { t, draws, coin })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn num_rounds(&self) -> usize {
        self.t + self.draws.len()
    }

    /// Draw for a 1-based round in `t+1..=n`.
    pub fn draw_for_round(&self, round: usize) -> f64 {
        self.draws[round - self.t - 1]
    }

    pub fn coin(&self) -> f64 {
        self.coin
    }

    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    pub fn digest(&self) -> String {
        let mut bytes = Vec::with_capacity(8 * (self.draws.len() + 1) + 8);
        bytes.extend_from_slice(&(self.t as u64).to_le_bytes());
        for d in &self.draws {
            bytes.extend_from_slice(&d.to_le_bytes());
        }
        bytes.extend_from_slice(&self.coin.to_le_bytes());
        short_digest(&bytes)
    }
}

/// Maps a uniform draw to a bin by inverse CDF over the fractional row:
/// bin `i` is returned iff the draw falls in `[sum_{k<i} p_k, sum_{k<=i} p_k)`,
/// and `None` captures the residual mass `1 - sum_i p_i`.
///
/// Entries may carry float noise: values below zero count as zero, and a
/// cumulative sum exceeding one within tolerance is clamped to one. A sum
/// above `1 + tol` is an error.
pub fn select_bin<T: Scalar>(frac_row: &[T], draw: &T) -> Result<Option<usize>, OnlineError> {
    let mut total = T::zero();
    for p in frac_row {
        if *p > T::zero() {
            total = total + p.clone();
        }
    }
    if !total.le_abs(&T::one()) {
        return Err(OnlineError::RowSumExceedsOne {
            sum: total.to_f64(),
        });
    }
    let one = T::one();
    let mut cum = T::zero();
    for (i, p) in frac_row.iter().enumerate() {
        if *p > T::zero() {
            cum = cum + p.clone();
        }
        let bracket_end = if cum > one { &one } else { &cum };
        if draw < bracket_end {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Round record of a single algorithm run.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundTrace<T> {
    /// 1-based round number (only rounds after the sampling phase appear).
    pub round: usize,
    pub item: usize,
    /// Fractional row of the revealed item in the canonical LP solution.
    pub frac_row: Vec<T>,
    pub selected_bin: Option<usize>,
    pub tentative_value: T,
    pub accepted: bool,
    pub load_before: T,
    pub load_after: T,
}

/// Outcome of one algorithm on one `(instance, permutation, tape)` triple.
#[derive(Clone, Debug)]
pub struct GapRun<T> {
    pub algorithm: GapAlgorithm,
    pub assignment: Assignment,
    pub value: T,
    /// Per-round records for rounds after the sampling phase; empty when the
    /// run was requested without tracing.
    pub trace: Vec<RoundTrace<T>>,
    /// For imitative runs: the internally mirrored feasible assignment.
    pub imitation: Option<Assignment>,
}

/// All three coupled runs on the same permutation and tape.
#[derive(Clone, Debug)]
pub struct CoupledGapRuns<T> {
    pub infeasible: GapRun<T>,
    pub feasible: GapRun<T>,
    pub imitative: GapRun<T>,
}

/// Solves and caches the canonical LP per revealed subset. Within one run
/// every round has a distinct subset, but across runs on the same instance
/// (Monte Carlo trials, exhaustive enumeration) subsets repeat heavily.
pub struct GapOracle<'a, T: Scalar> {
    inst: &'a GapInstance,
    data: GapData<T>,
    cache: BoundedCache<SubsetKey, Rc<Vec<T>>>,
}

const ORACLE_CACHE_CAP: usize = 1 << 18;

impl<'a, T: Scalar> GapOracle<'a, T> {
    pub fn new(inst: &'a GapInstance) -> Self {
        Self {
            inst,
            data: inst.data::<T>(),
            cache: BoundedCache::new(ORACLE_CACHE_CAP),
        }
    }

    pub fn instance(&self) -> &'a GapInstance {
        self.inst
    }

    pub fn data(&self) -> &GapData<T> {
        &self.data
    }

    /// Primal matrix (row-major `m x n`) of the canonical LP solution
    /// restricted to the given sorted item subset.
    pub fn primal_matrix(&mut self, items_sorted: &[usize]) -> Result<Rc<Vec<T>>, OfflineError> {
        let key = subset_key(items_sorted, self.data.n);
        if let Some(hit) = self.cache.get(&key) {
            return Ok(Rc::clone(hit));
        }
        let sol = solve_fractional_gap::<T>(self.inst, items_sorted)?;
        let mut flat = Vec::with_capacity(self.data.m * self.data.n);
        for i in 0..self.data.m {
            for j in 0..self.data.n {
                flat.push(sol.primal.get(i, j).clone());
            }
        }
        let rc = Rc::new(flat);
        self.cache.insert(key, Rc::clone(&rc));
        Ok(rc)
    }

    /// Fractional row `x~_{.,item}(Q)` for one item under the subset `Q`.
    pub fn frac_row(
        &mut self,
        items_sorted: &[usize],
        item: usize,
    ) -> Result<Vec<T>, OfflineError> {
        let matrix = self.primal_matrix(items_sorted)?;
        let n = self.data.n;
        Ok((0..self.data.m)
            .map(|i| matrix[i * n + item].clone())
            .collect())
    }
}

struct AlgState<T> {
    assignment: Assignment,
    loads: Vec<T>,
    value: T,
    trace: Vec<RoundTrace<T>>,
}

impl<T: Scalar> AlgState<T> {
    fn new(m: usize, n: usize) -> Self {
        Self {
            assignment: Assignment::empty(m, n),
            loads: vec![T::zero(); m],
            value: T::zero(),
            trace: Vec::new(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &mut self,
        with_trace: bool,
        round: usize,
        item: usize,
        frac_row: &[T],
        selected: Option<usize>,
        tentative: T,
        accepted: bool,
        load_before: T,
        load_after: T,
    ) {
        if with_trace {
            self.trace.push(RoundTrace {
                round,
                item,
                frac_row: frac_row.to_vec(),
                selected_bin: selected,
                tentative_value: tentative,
                accepted,
                load_before,
                load_after,
            });
        }
    }
}

/// Runs the infeasible, feasible, and imitative algorithms in lockstep on the
/// same permutation and tape. One LP solve and one bin selection per round is
/// shared by all three, exactly as in the coupled analysis.
pub fn run_coupled_gap<T: Scalar>(
    oracle: &mut GapOracle<'_, T>,
    perm: &Permutation,
    tape: &RandomTape,
    with_trace: bool,
) -> Result<CoupledGapRuns<T>, OnlineError> {
    let inst = oracle.instance();
    let n = inst.num_items();
    let m = inst.num_bins();
    if perm.len() != n {
        return Err(OnlineError::LengthMismatch(format!(
            "permutation covers {} items, instance has {n}",
            perm.len()
        )));
    }
    if tape.num_rounds() != n {
        return Err(OnlineError::LengthMismatch(format!(
            "tape covers {} rounds, instance has {n}",
            tape.num_rounds()
        )));
    }
    let t = tape.t();

    let mut x = AlgState::<T>::new(m, n);
    let mut y = AlgState::<T>::new(m, n);
    let mut z = AlgState::<T>::new(m, n);

    let mut revealed: Vec<usize> = Vec::with_capacity(n);
    for round in 1..=n {
        let item = perm.item_at(round - 1);
        let pos = revealed
            .binary_search(&item)
            .expect_err("permutation items are distinct");
        revealed.insert(pos, item);
        if round <= t {
            continue;
        }
        let frac_row = oracle.frac_row(&revealed, item)?;
        let draw = T::from_f64_lossless(tape.draw_for_round(round));
        let selected = select_bin(&frac_row, &draw)?;

        match selected {
            None => {
                for state in [&mut x, &mut y, &mut z] {
                    state.record(
                        with_trace,
                        round,
                        item,
                        &frac_row,
                        None,
                        T::zero(),
                        false,
                        T::zero(),
                        T::zero(),
                    );
                }
            }
            Some(bin) => {
                let size = oracle.data().size(bin, item).clone();
                let value = oracle.data().value(bin, item).clone();
                let cap = &oracle.data().caps[bin];

                // Infeasible rule: the load of *previous* rounds must be
                // within capacity, so the accepted item may overflow once.
                let x_before = x.loads[bin].clone();
                let x_accepts = x_before.le_rel(cap);
                if x_accepts {
                    x.assignment.place(item, bin);
                    x.loads[bin] = x_before.clone() + size.clone();
                    x.value = x.value.clone() + value.clone();
                }
                let x_after = x.loads[bin].clone();
                x.record(
                    with_trace,
                    round,
                    item,
                    &frac_row,
                    selected,
                    value.clone(),
                    x_accepts,
                    x_before,
                    x_after,
                );

                // Feasible rule: the load *after* adding must stay within
                // capacity.
                let y_before = y.loads[bin].clone();
                let y_accepts = (y_before.clone() + size.clone()).le_rel(cap);
                if y_accepts {
                    y.assignment.place(item, bin);
                    y.loads[bin] = y_before.clone() + size.clone();
                    y.value = y.value.clone() + value.clone();
                }
                let y_after = y.loads[bin].clone();
                y.record(
                    with_trace,
                    round,
                    item,
                    &frac_row,
                    selected,
                    value.clone(),
                    y_accepts,
                    y_before,
                    y_after,
                );

                // Imitative rule: when the mirrored feasible run rejects, take
                // the item iff this bin is still empty in the actual output.
                let z_before = z.loads[bin].clone();
                let z_accepts = !y_accepts && z.assignment.items_in(bin).next().is_none();
                if z_accepts {
                    z.assignment.place(item, bin);
                    z.loads[bin] = z_before.clone() + size.clone();
                    z.value = z.value.clone() + value.clone();
                }
                let z_after = z.loads[bin].clone();
                z.record(
                    with_trace, round, item, &frac_row, selected, value, z_accepts, z_before,
                    z_after,
                );
            }
        }
    }

    let imitation = Some(y.assignment.clone());
    Ok(CoupledGapRuns {
        infeasible: GapRun {
            algorithm: GapAlgorithm::Infeasible,
            assignment: x.assignment,
            value: x.value,
            trace: x.trace,
            imitation: None,
        },
        feasible: GapRun {
            algorithm: GapAlgorithm::Feasible,
            assignment: y.assignment,
            value: y.value,
            trace: y.trace,
            imitation: None,
        },
        imitative: GapRun {
            algorithm: GapAlgorithm::Imitative,
            assignment: z.assignment,
            value: z.value,
            trace: z.trace,
            imitation,
        },
    })
}

pub fn run_infeasible_gap<T: Scalar>(
    inst: &GapInstance,
    perm: &Permutation,
    tape: &RandomTape,
) -> Result<GapRun<T>, OnlineError> {
    let mut oracle = GapOracle::new(inst);
    Ok(run_coupled_gap(&mut oracle, perm, tape, true)?.infeasible)
}

pub fn run_feasible_gap<T: Scalar>(
    inst: &GapInstance,
    perm: &Permutation,
    tape: &RandomTape,
) -> Result<GapRun<T>, OnlineError> {
    let mut oracle = GapOracle::new(inst);
    Ok(run_coupled_gap(&mut oracle, perm, tape, true)?.feasible)
}

pub fn run_imitative_gap<T: Scalar>(
    inst: &GapInstance,
    perm: &Permutation,
    tape: &RandomTape,
) -> Result<GapRun<T>, OnlineError> {
    let mut oracle = GapOracle::new(inst);
    Ok(run_coupled_gap(&mut oracle, perm, tape, true)?.imitative)
}

/// Runs the feasible algorithm if the tape coin is below one half, the
/// imitative one otherwise.
pub fn run_random_gap<T: Scalar>(
    inst: &GapInstance,
    perm: &Permutation,
    tape: &RandomTape,
) -> Result<GapRun<T>, OnlineError> {
    let mut oracle = GapOracle::new(inst);
    run_random_gap_cached(&mut oracle, perm, tape, true)
}

pub fn run_random_gap_cached<T: Scalar>(
    oracle: &mut GapOracle<'_, T>,
    perm: &Permutation,
    tape: &RandomTape,
    with_trace: bool,
) -> Result<GapRun<T>, OnlineError> {
    let runs = run_coupled_gap(oracle, perm, tape, with_trace)?;
    let branch = if tape.coin() < 0.5 {
        runs.feasible
    } else {
        runs.imitative
    };
    Ok(GapRun {
        algorithm: GapAlgorithm::Random,
        ..branch
    })
}

/// Dispatch by algorithm name.
pub fn run_gap<T: Scalar>(
    algorithm: GapAlgorithm,
    oracle: &mut GapOracle<'_, T>,
    perm: &Permutation,
    tape: &RandomTape,
    with_trace: bool,
) -> Result<GapRun<T>, OnlineError> {
    if algorithm == GapAlgorithm::Random {
        return run_random_gap_cached(oracle, perm, tape, with_trace);
    }
    let runs = run_coupled_gap(oracle, perm, tape, with_trace)?;
    Ok(match algorithm {
        GapAlgorithm::Infeasible => runs.infeasible,
        GapAlgorithm::Feasible => runs.feasible,
        GapAlgorithm::Imitative => runs.imitative,
        GapAlgorithm::Random => unreachable!(),
    })
}
