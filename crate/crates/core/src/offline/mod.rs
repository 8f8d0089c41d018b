//! Offline oracles: the fractional greedy knapsack solution, the canonical
//! LP solver for the fractional assignment relaxation, and exhaustive
//! integral solvers used as ground truth.

mod simplex;

use crate::model::{Assignment, FractionalAssignment, GapInstance, KnapsackInstance, ModelError};
use crate::scalar::{Rat, Scalar};
use num_traits::Zero;
use simplex::solve_simplex_max;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OfflineError {
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("enumeration would visit {required} states, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("bad item subset: {0}")]
    BadSubset(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The greedy solution of the fractional knapsack relaxation: items packed in
/// decreasing density order, the first non-fitting item packed fractionally.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedySolution<T> {
    /// `1 x n` fractional assignment over the full item range.
    pub assignment: FractionalAssignment<T>,
    /// Number of fully packed items (a prefix of `density_order`).
    pub rho: usize,
    /// Considered items, densest first; density ties break to smaller index.
    pub density_order: Vec<usize>,
    pub objective: T,
    pub packed_size: T,
}

impl<T: Scalar> GreedySolution<T> {
    pub fn fraction(&self, item: usize) -> &T {
        self.assignment.item_fraction(item)
    }
}

/// Greedy solution restricted to a subset of items (the full instance keeps
/// its item indexing; items outside the subset get fraction zero).
pub fn fractional_greedy_on<T: Scalar>(
    inst: &KnapsackInstance,
    items: &[usize],
) -> GreedySolution<T> {
    let n = inst.num_items();
    let mut order: Vec<usize> = items.to_vec();
    // Exact density comparison on the rational instance data keeps the order
    // identical across arithmetic backends.
    let densities: Vec<Rat> = (0..n).map(|j| inst.density(j)).collect();
    order.sort_by(|&a, &b| densities[b].cmp(&densities[a]).then(a.cmp(&b)));

    let mut assignment = FractionalAssignment::zeros(1, n);
    let mut remaining = T::from_rat(inst.capacity());
    let mut objective = T::zero();
    let mut packed_size = T::zero();
    let mut rho = 0usize;
    for &j in &order {
        if remaining.is_zero() || remaining < T::zero() {
            break;
        }
        let size = T::from_rat(inst.size(j));
        let value = T::from_rat(inst.value(j));
        if size.le_abs(&remaining) {
            rho += 1;
            assignment.set(0, j, T::one());
            objective = objective + value;
            packed_size = packed_size + size.clone();
            remaining = remaining - size;
        } else {
            let mut fraction = remaining.clone() / size.clone();
            if !T::EXACT {
                fraction = fraction.clamp_unit();
            }
            assignment.set(0, j, fraction.clone());
            objective = objective + value * fraction.clone();
            packed_size = packed_size + size * fraction;
            break;
        }
    }
    GreedySolution {
        assignment,
        rho,
        density_order: order,
        objective,
        packed_size,
    }
}

/// Greedy solution over all items of the instance.
pub fn fractional_greedy<T: Scalar>(inst: &KnapsackInstance) -> GreedySolution<T> {
    let all: Vec<usize> = (0..inst.num_items()).collect();
    fractional_greedy_on(inst, &all)
}

trait ClampUnit {
    fn clamp_unit(self) -> Self;
}

impl<T: Scalar> ClampUnit for T {
    fn clamp_unit(self) -> Self {
        if self < T::zero() {
            T::zero()
        } else if self > T::one() {
            T::one()
        } else {
            self
        }
    }
}

/// An optimal vertex of the fractional assignment relaxation, with the dual
/// certificate and a canonical identifier of the basis.
#[derive(Clone, Debug)]
pub struct LpSolution<T> {
    pub primal: FractionalAssignment<T>,
    pub objective: T,
    pub bin_duals: Vec<T>,
    /// Item duals; zero for items outside the solved subset.
    pub item_duals: Vec<T>,
    pub basis_signature: String,
    pub pivots: usize,
}

fn check_subset(inst: &GapInstance, items: &[usize]) -> Result<(), OfflineError> {
    if items.is_empty() {
        return Err(OfflineError::BadSubset("empty item subset".into()));
    }
    let n = inst.num_items();
    let mut seen = vec![false; n];
    for &j in items {
        if j >= n {
            return Err(OfflineError::BadSubset(format!(
                "item {j} out of range for {n} items"
            )));
        }
        if seen[j] {
            return Err(OfflineError::BadSubset(format!("item {j} repeats")));
        }
        seen[j] = true;
    }
    Ok(())
}

/// Solves the fractional relaxation restricted to the given items (all other
/// columns fixed to zero).
///
/// The returned vertex is canonical: variables are ordered bin-major
/// (`x_{1,j1}, x_{1,j2}, ..., x_{2,j1}, ...`) followed by capacity slacks and
/// item slacks, and Bland's smallest-index rule fixes the pivot path, so two
/// calls with equal inputs return bit-identical solutions.
pub fn solve_fractional_gap<T: Scalar>(
    inst: &GapInstance,
    items: &[usize],
) -> Result<LpSolution<T>, OfflineError> {
    check_subset(inst, items)?;
    let mut subset = items.to_vec();
    subset.sort_unstable();
    let m = inst.num_bins();
    let n = inst.num_items();
    let k = subset.len();
    let nv = m * k;

    let data = inst.data::<T>();
    let mut costs = Vec::with_capacity(nv);
    for i in 0..m {
        for &j in &subset {
            costs.push(data.value(i, j).clone());
        }
    }
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(m + k);
    let mut rhs: Vec<T> = Vec::with_capacity(m + k);
    for i in 0..m {
        let mut row = vec![T::zero(); nv];
        for (jj, &j) in subset.iter().enumerate() {
            row[i * k + jj] = data.size(i, j).clone();
        }
        rows.push(row);
        rhs.push(data.caps[i].clone());
    }
    for jj in 0..k {
        let mut row = vec![T::zero(); nv];
        for i in 0..m {
            row[i * k + jj] = T::one();
        }
        rows.push(row);
        rhs.push(T::one());
    }

    let pivot_limit = 100 * (nv + m + k) + 10_000;
    let result = solve_simplex_max(&costs, &rows, &rhs, pivot_limit)?;

    let mut primal = FractionalAssignment::zeros(m, n);
    for i in 0..m {
        for (jj, &j) in subset.iter().enumerate() {
            primal.set(i, j, result.x[i * k + jj].clone());
        }
    }
    let bin_duals = result.duals[..m].to_vec();
    let mut item_duals = vec![T::zero(); n];
    for (jj, &j) in subset.iter().enumerate() {
        item_duals[j] = result.duals[m + jj].clone();
    }
    let mut labels: Vec<String> = result
        .basis
        .iter()
        .map(|&var| {
            if var < nv {
                format!("x({},{})", var / k, subset[var % k])
            } else if var < nv + m {
                format!("sc({})", var - nv)
            } else {
                format!("si({})", subset[var - nv - m])
            }
        })
        .collect();
    labels.sort();
    Ok(LpSolution {
        primal,
        objective: result.objective,
        bin_duals,
        item_duals,
        basis_signature: labels.join("|"),
        pivots: result.pivots,
    })
}

/// Outcome of the duality certificate check.
#[derive(Clone, Debug)]
pub struct LpCertificate {
    pub primal_feasible: bool,
    pub dual_feasible: bool,
    pub complementary_slackness: bool,
    pub failures: Vec<String>,
}

impl LpCertificate {
    pub fn ok(&self) -> bool {
        self.primal_feasible && self.dual_feasible && self.complementary_slackness
    }
}

fn cert_tol<T: Scalar>() -> T {
    if T::EXACT {
        T::zero()
    } else {
        T::from_f64_lossless(1e-7)
    }
}

/// Independent optimality check: primal feasibility, dual feasibility
/// (nonpositive reduced costs for the maximization), and complementary
/// slackness. This is straight arithmetic on the solution and certifies the
/// simplex without sharing any code path with it.
pub fn verify_lp_optimality<T: Scalar>(
    inst: &GapInstance,
    items: &[usize],
    sol: &LpSolution<T>,
) -> Result<LpCertificate, OfflineError> {
    check_subset(inst, items)?;
    let m = inst.num_bins();
    let n = inst.num_items();
    if sol.primal.num_bins() != m
        || sol.primal.num_items() != n
        || sol.bin_duals.len() != m
        || sol.item_duals.len() != n
    {
        return Err(OfflineError::Model(ModelError::DimensionMismatch(
            "solution dimensions do not match the instance".into(),
        )));
    }
    let tol = cert_tol::<T>();
    let neg_tol = -tol.clone();
    let data = inst.data::<T>();
    let in_subset = {
        let mut mask = vec![false; n];
        for &j in items {
            mask[j] = true;
        }
        mask
    };
    let mut failures = Vec::new();

    let mut primal_feasible = true;
    let mut loads = Vec::with_capacity(m);
    for i in 0..m {
        let mut load = T::zero();
        for (j, &in_sub) in in_subset.iter().enumerate() {
            let x = sol.primal.get(i, j);
            if *x < neg_tol {
                primal_feasible = false;
                failures.push(format!("primal entry ({i},{j}) negative"));
            }
            if !in_sub && (x.clone() > tol.clone() || *x < neg_tol) {
                primal_feasible = false;
                failures.push(format!("primal entry ({i},{j}) outside subset is nonzero"));
            }
            load = load + data.size(i, j).clone() * x.clone();
        }
        if load.clone() - data.caps[i].clone() > tol.clone() {
            primal_feasible = false;
            failures.push(format!("capacity constraint violated on bin {i}"));
        }
        loads.push(load);
    }
    for &j in items {
        let mut col = T::zero();
        for i in 0..m {
            col = col + sol.primal.get(i, j).clone();
        }
        if col - T::one() > tol.clone() {
            primal_feasible = false;
            failures.push(format!("item constraint violated on item {j}"));
        }
    }

    let mut dual_feasible = true;
    for (i, y) in sol.bin_duals.iter().enumerate() {
        if *y < neg_tol {
            dual_feasible = false;
            failures.push(format!("bin dual {i} negative"));
        }
    }
    for &j in items {
        if sol.item_duals[j] < neg_tol {
            dual_feasible = false;
            failures.push(format!("item dual {j} negative"));
        }
    }
    let mut complementary = true;
    for i in 0..m {
        for &j in items {
            let reduced = data.value(i, j).clone()
                - sol.bin_duals[i].clone() * data.size(i, j).clone()
                - sol.item_duals[j].clone();
            if reduced > tol.clone() {
                dual_feasible = false;
                failures.push(format!("reduced cost of ({i},{j}) positive"));
            }
            let product = sol.primal.get(i, j).clone() * reduced;
            if product.clone() > tol.clone() || product < neg_tol {
                complementary = false;
                failures.push(format!("slackness violated on variable ({i},{j})"));
            }
        }
    }
    for (i, load) in loads.iter().enumerate() {
        let slack = data.caps[i].clone() - load.clone();
        let product = sol.bin_duals[i].clone() * slack;
        if product.clone() > tol.clone() || product < neg_tol {
            complementary = false;
            failures.push(format!("slackness violated on bin {i}"));
        }
    }
    for &j in items {
        let mut col = T::zero();
        for i in 0..m {
            col = col + sol.primal.get(i, j).clone();
        }
        let product = sol.item_duals[j].clone() * (T::one() - col);
        if product.clone() > tol.clone() || product < neg_tol {
            complementary = false;
            failures.push(format!("slackness violated on item {j}"));
        }
    }

    Ok(LpCertificate {
        primal_feasible,
        dual_feasible,
        complementary_slackness: complementary,
        failures,
    })
}

/// Exhaustive search for an optimal binary assignment. Enumerates the
/// `(m+1)^n` decision vectors in lexicographic order (no bin first, then bins
/// in index order) with capacity pruning; the first maximizer found is the
/// lexicographically smallest one.
pub fn solve_integral_gap_bruteforce(
    inst: &GapInstance,
    budget: u64,
) -> Result<(Assignment, Rat), OfflineError> {
    let m = inst.num_bins();
    let n = inst.num_items();
    let states = (m as u128 + 1)
        .checked_pow(n as u32)
        .ok_or(OfflineError::BudgetExceeded {
            required: u128::MAX,
            budget,
        })?;
    if states > u128::from(budget) {
        return Err(OfflineError::BudgetExceeded {
            required: states,
            budget,
        });
    }

    struct Search<'a> {
        inst: &'a GapInstance,
        loads: Vec<Rat>,
        choices: Vec<Option<usize>>,
        best_value: Rat,
        best: Option<Vec<Option<usize>>>,
    }

    impl Search<'_> {
        fn recurse(&mut self, item: usize, value: Rat) {
            if item == self.inst.num_items() {
                if self.best.is_none() || value > self.best_value {
                    self.best_value = value;
                    self.best = Some(self.choices.clone());
                }
                return;
            }
            self.choices[item] = None;
            self.recurse(item + 1, value.clone());
            for bin in 0..self.inst.num_bins() {
                let new_load = &self.loads[bin] + self.inst.size(bin, item);
                if &new_load <= self.inst.capacity(bin) {
                    let old_load = std::mem::replace(&mut self.loads[bin], new_load);
                    self.choices[item] = Some(bin);
                    self.recurse(item + 1, value.clone() + self.inst.value(bin, item));
                    self.loads[bin] = old_load;
                    self.choices[item] = None;
                }
            }
        }
    }

    let mut search = Search {
        inst,
        loads: vec![Rat::zero(); m],
        choices: vec![None; n],
        best_value: Rat::zero(),
        best: None,
    };
    search.recurse(0, Rat::zero());
    let choices = search
        .best
        .expect("the empty assignment is always feasible");
    let mut assignment = Assignment::empty(m, n);
    for (j, choice) in choices.iter().enumerate() {
        if let Some(bin) = choice {
            assignment.place(j, *bin);
        }
    }
    Ok((assignment, search.best_value))
}

/// Exhaustive optimal value of the binary knapsack.
pub fn solve_integral_knapsack_bruteforce(
    inst: &KnapsackInstance,
    budget: u64,
) -> Result<Rat, OfflineError> {
    let n = inst.num_items();
    let states = 1u128
        .checked_shl(n as u32)
        .ok_or(OfflineError::BudgetExceeded {
            required: u128::MAX,
            budget,
        })?;
    if states > u128::from(budget) {
        return Err(OfflineError::BudgetExceeded {
            required: states,
            budget,
        });
    }

    fn recurse(inst: &KnapsackInstance, item: usize, remaining: Rat, value: Rat, best: &mut Rat) {
        if item == inst.num_items() {
            if value > *best {
                *best = value;
            }
            return;
        }
        if inst.size(item) <= &remaining {
            recurse(
                inst,
                item + 1,
                remaining.clone() - inst.size(item),
                value.clone() + inst.value(item),
                best,
            );
        }
        recurse(inst, item + 1, remaining, value, best);
    }

    let mut best = Rat::zero();
    recurse(inst, 0, inst.capacity().clone(), Rat::zero(), &mut best);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        gen_knapsack_family, gen_uniform_gap, FamilyParams, GapGenRanges, KnapsackFamily,
    };
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn rat(n: i64) -> Rat {
        Rat::from_integer(BigInt::from(n))
    }

    fn ratio(p: i64, q: i64) -> Rat {
        Rat::new(BigInt::from(p), BigInt::from(q))
    }

    fn knapsack(cap: i64, items: &[(i64, i64)]) -> KnapsackInstance {
        KnapsackInstance::new(
            rat(cap),
            items.iter().map(|&(v, _)| rat(v)).collect(),
            items.iter().map(|&(_, s)| rat(s)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn greedy_three_item_example() {
        // Densities 2, 1.2, 1: two full packs and a third of the last item.
        let inst = knapsack(10, &[(8, 4), (6, 5), (3, 3)]);
        let greedy = fractional_greedy::<Rat>(&inst);
        assert_eq!(greedy.rho, 2);
        assert_eq!(greedy.density_order, vec![0, 1, 2]);
        assert_eq!(greedy.fraction(0), &rat(1));
        assert_eq!(greedy.fraction(1), &rat(1));
        assert_eq!(greedy.fraction(2), &ratio(1, 3));
        assert_eq!(greedy.objective, rat(15));
        assert_eq!(greedy.packed_size, rat(10));
    }

    #[test]
    fn greedy_single_item_filling_capacity() {
        let inst = knapsack(5, &[(3, 5)]);
        let greedy = fractional_greedy::<Rat>(&inst);
        assert_eq!(greedy.fraction(0), &rat(1));
        assert_eq!(greedy.rho, 1);
    }

    #[test]
    fn greedy_packs_everything_when_it_fits() {
        let inst = knapsack(100, &[(3, 5), (8, 2), (1, 7)]);
        let greedy = fractional_greedy::<Rat>(&inst);
        for j in 0..3 {
            assert_eq!(greedy.fraction(j), &rat(1));
        }
        assert_eq!(greedy.packed_size, rat(14));
    }

    #[test]
    fn greedy_breaks_density_ties_by_index() {
        let inst = knapsack(3, &[(2, 2), (2, 2), (2, 2)]);
        let greedy = fractional_greedy::<Rat>(&inst);
        assert_eq!(greedy.density_order, vec![0, 1, 2]);
        assert_eq!(greedy.fraction(0), &rat(1));
        assert_eq!(greedy.fraction(1), &ratio(1, 2));
        assert_eq!(greedy.fraction(2), &rat(0));
    }

    fn random_knapsack(seed: u64, n: usize) -> KnapsackInstance {
        gen_knapsack_family(
            KnapsackFamily::Uncorrelated,
            n,
            seed,
            &FamilyParams {
                coeff_range: 30,
                ..FamilyParams::default()
            },
        )
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        // Total packed size is min(C, sum of sizes), exactly.
        #[test]
        fn greedy_total_size_identity(seed in 0u64..10_000) {
            let inst = random_knapsack(seed, 7);
            let greedy = fractional_greedy::<Rat>(&inst);
            let total: Rat = (0..7).map(|j| inst.size(j).clone()).fold(rat(0), |a, b| a + b);
            let expected = total.clone().min(inst.capacity().clone());
            prop_assert_eq!(greedy.packed_size, expected);
        }

        // Adding an item never shrinks the packed size and never grows any
        // other item's fraction.
        #[test]
        fn greedy_monotone_under_item_arrival(seed in 0u64..10_000, extra in 0usize..7) {
            let inst = random_knapsack(seed, 7);
            let without: Vec<usize> = (0..7).filter(|&j| j != extra).collect();
            let with: Vec<usize> = (0..7).collect();
            let before = fractional_greedy_on::<Rat>(&inst, &without);
            let after = fractional_greedy_on::<Rat>(&inst, &with);
            prop_assert!(after.packed_size >= before.packed_size);
            for &j in &without {
                prop_assert!(after.fraction(j) <= before.fraction(j));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        // The greedy objective matches the canonical LP on the single-bin
        // relaxation, exactly in rational arithmetic.
        #[test]
        fn greedy_matches_lp_on_single_bin(seed in 0u64..2_000) {
            let inst = random_knapsack(seed, 6);
            let items: Vec<usize> = (0..6).collect();
            let greedy = fractional_greedy::<Rat>(&inst);
            let lp = solve_fractional_gap::<Rat>(&inst.to_gap(), &items).unwrap();
            prop_assert_eq!(greedy.objective, lp.objective);
        }

        // Relaxation dominance: the greedy objective is at least the integral
        // optimum.
        #[test]
        fn greedy_dominates_integral_optimum(seed in 0u64..2_000) {
            let inst = random_knapsack(seed, 6);
            let greedy = fractional_greedy::<Rat>(&inst);
            let integral = solve_integral_knapsack_bruteforce(&inst, 1 << 20).unwrap();
            prop_assert!(greedy.objective >= integral);
        }
    }

    #[test]
    fn lp_single_item_single_bin() {
        let inst = GapInstance::new(vec![rat(4)], vec![vec![rat(9)]], vec![vec![rat(2)]]).unwrap();
        let sol = solve_fractional_gap::<Rat>(&inst, &[0]).unwrap();
        assert_eq!(sol.objective, rat(9));
        assert_eq!(sol.primal.get(0, 0), &rat(1));
        assert!(verify_lp_optimality(&inst, &[0], &sol).unwrap().ok());
    }

    #[test]
    fn lp_decomposable_instance_picks_diagonal() {
        let inst = GapInstance::new(
            vec![rat(5), rat(5)],
            vec![vec![rat(4), rat(0)], vec![rat(0), rat(6)]],
            vec![vec![rat(2), rat(2)], vec![rat(2), rat(2)]],
        )
        .unwrap();
        let sol = solve_fractional_gap::<Rat>(&inst, &[0, 1]).unwrap();
        assert_eq!(sol.objective, rat(10));
        assert_eq!(sol.primal.get(0, 0), &rat(1));
        assert_eq!(sol.primal.get(1, 1), &rat(1));
    }

    #[test]
    fn lp_is_canonical_bit_for_bit() {
        let inst = gen_uniform_gap(6, 2, 42, &GapGenRanges::default()).unwrap();
        let items: Vec<usize> = vec![0, 2, 3, 5];
        let a = solve_fractional_gap::<f64>(&inst, &items).unwrap();
        let b = solve_fractional_gap::<f64>(&inst, &items).unwrap();
        assert_eq!(a.primal, b.primal);
        assert_eq!(a.basis_signature, b.basis_signature);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }

    #[test]
    fn certificate_rejects_corrupted_dual() {
        let inst = gen_uniform_gap(5, 2, 7, &GapGenRanges::default()).unwrap();
        let items: Vec<usize> = (0..5).collect();
        let mut sol = solve_fractional_gap::<Rat>(&inst, &items).unwrap();
        assert!(verify_lp_optimality(&inst, &items, &sol).unwrap().ok());
        // Perturb the dual price of a tight constraint upward by one; the
        // certificate must notice through complementary slackness.
        let tight = (0..2)
            .find(|&i| {
                let mut load = rat(0);
                for j in 0..5 {
                    load += inst.size(i, j) * sol.primal.get(i, j);
                }
                load == *inst.capacity(i) && !sol.bin_duals[i].is_zero()
            })
            .or_else(|| (0..2).find(|&i| !sol.bin_duals[i].is_zero()));
        if let Some(i) = tight {
            sol.bin_duals[i] = sol.bin_duals[i].clone() + rat(1);
            let cert = verify_lp_optimality(&inst, &items, &sol).unwrap();
            assert!(!cert.ok());
        } else {
            // Degenerate corpus instance; corrupt an item dual instead.
            sol.item_duals[0] = sol.item_duals[0].clone() + rat(1);
            let cert = verify_lp_optimality(&inst, &items, &sol).unwrap();
            assert!(!cert.ok());
        }
    }

    #[test]
    fn certificate_rejects_capacity_violation() {
        let inst = GapInstance::new(
            vec![rat(2)],
            vec![vec![rat(1), rat(1)]],
            vec![vec![rat(2), rat(2)]],
        )
        .unwrap();
        let mut sol = solve_fractional_gap::<Rat>(&inst, &[0, 1]).unwrap();
        sol.primal.set(0, 0, rat(1));
        sol.primal.set(0, 1, rat(1));
        let cert = verify_lp_optimality(&inst, &[0, 1], &sol).unwrap();
        assert!(!cert.primal_feasible);
        assert!(cert
            .failures
            .iter()
            .any(|f| f.contains("capacity constraint violated on bin 0")));
    }

    #[test]
    fn bruteforce_handles_mutual_exclusion() {
        // Two items, each filling the whole bin: the better one wins.
        let inst = GapInstance::new(
            vec![rat(4)],
            vec![vec![rat(5), rat(9)]],
            vec![vec![rat(4), rat(4)]],
        )
        .unwrap();
        let (assignment, value) = solve_integral_gap_bruteforce(&inst, 1 << 20).unwrap();
        assert_eq!(value, rat(9));
        assert_eq!(assignment.bin_of(0), None);
        assert_eq!(assignment.bin_of(1), Some(0));
    }

    #[test]
    fn bruteforce_packs_best_bins_when_all_fit() {
        let inst = GapInstance::new(
            vec![rat(10), rat(10)],
            vec![vec![rat(3), rat(1)], vec![rat(2), rat(5)]],
            vec![vec![rat(1), rat(1)], vec![rat(1), rat(1)]],
        )
        .unwrap();
        let (_, value) = solve_integral_gap_bruteforce(&inst, 1 << 20).unwrap();
        assert_eq!(value, rat(8));
    }

    #[test]
    fn bruteforce_respects_budget() {
        let inst = gen_uniform_gap(40, 3, 0, &GapGenRanges::default()).unwrap();
        assert!(matches!(
            solve_integral_gap_bruteforce(&inst, 1000),
            Err(OfflineError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn knapsack_bruteforce_examples() {
        let inst = knapsack(5, &[(7, 3)]);
        assert_eq!(
            solve_integral_knapsack_bruteforce(&inst, 1 << 20).unwrap(),
            rat(7)
        );
        let inst = knapsack(4, &[(5, 4), (9, 4)]);
        assert_eq!(
            solve_integral_knapsack_bruteforce(&inst, 1 << 20).unwrap(),
            rat(9)
        );
    }
}
