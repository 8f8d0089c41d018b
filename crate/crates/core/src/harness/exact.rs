//! Exact expectations by exhaustive enumeration.
//!
//! The expectation over a uniformly random permutation only depends on the
//! sampling rounds through the *set* revealed there, so the enumeration walks
//! all `C(n,t)` sampling sets times all `(n-t)!` arrival orders of the
//! remaining items instead of all `n!` permutations. Bin selections are
//! enumerated as outcome branches weighted by the canonical LP probabilities,
//! which makes the result exact (a rational number in exact mode).

use super::HarnessError;
use crate::model::{GapInstance, KnapsackInstance, Permutation};
use crate::online_gap::GapAlgorithm;
use crate::online_gap::GapOracle;
use crate::online_knapsack::{run_fractional_knapsack_cached, KnapsackOracle};
use crate::scalar::Scalar;
use itertools::Itertools;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result * (n - i) as u128 / (i + 1) as u128;
    }
    result
}

fn factorial(k: usize) -> Option<u128> {
    let mut result: u128 = 1;
    for i in 2..=k {
        result = result.checked_mul(i as u128)?;
    }
    Some(result)
}

fn enumeration_size(n: usize, t: usize, branches: usize) -> Option<u128> {
    let sequences = binomial(n, t).checked_mul(factorial(n - t)?)?;
    let per_round = (branches as u128).checked_pow((n - t) as u32)?;
    sequences.checked_mul(per_round)
}

/// Exact expected values of the three coupled runs and their randomized
/// combination, with the pointwise coupling check over every enumerated path.
#[derive(Clone, Debug)]
pub struct GapExactResult<T> {
    pub infeasible: T,
    pub feasible: T,
    pub imitative: T,
    pub random: T,
    /// Whether `v(y) + v(z) >= v(x)` held on every (permutation, outcome)
    /// path.
    pub coupling_holds: bool,
    pub enumerated_sequences: u128,
}

struct GapDfs<'a, 'b, T: Scalar> {
    oracle: &'b mut GapOracle<'a, T>,
    tail: &'b [usize],
    e_infeasible: T,
    e_feasible: T,
    e_imitative: T,
    coupling_holds: bool,
}

impl<T: Scalar> GapDfs<'_, '_, T> {
    #[allow(clippy::too_many_arguments)]
    fn walk(
        &mut self,
        depth: usize,
        revealed: &mut Vec<usize>,
        x_loads: &[T],
        x_value: T,
        y_loads: &[T],
        y_value: T,
        z_filled: &[bool],
        z_value: T,
        weight: T,
    ) -> Result<(), HarnessError> {
        if depth == self.tail.len() {
            self.e_infeasible = self.e_infeasible.clone() + weight.clone() * x_value.clone();
            self.e_feasible = self.e_feasible.clone() + weight.clone() * y_value.clone();
            self.e_imitative = self.e_imitative.clone() + weight * z_value.clone();
            if !x_value.le_abs(&(y_value + z_value)) {
                self.coupling_holds = false;
            }
            return Ok(());
        }
        let item = self.tail[depth];
        let pos = revealed.binary_search(&item).expect_err("distinct items");
        revealed.insert(pos, item);
        let row = self.oracle.frac_row(revealed, item)?;
        let m = row.len();

        // Residual probability of selecting no bin.
        let mut none_p = T::one();
        for p in &row {
            none_p = none_p - p.clone();
        }
        if none_p > T::zero() {
            self.walk(
                depth + 1,
                revealed,
                x_loads,
                x_value.clone(),
                y_loads,
                y_value.clone(),
                z_filled,
                z_value.clone(),
                weight.clone() * none_p,
            )?;
        }
        for bin in 0..m {
            let p = row[bin].clone();
            // Zero-probability outcomes (and float-noise negatives) are not
            // reachable branches.
            if p <= T::zero() {
                continue;
            }
            let size = self.oracle.data().size(bin, item).clone();
            let value = self.oracle.data().value(bin, item).clone();
            let cap = self.oracle.data().caps[bin].clone();

            let mut x_loads2 = x_loads.to_vec();
            let mut x_value2 = x_value.clone();
            // Infeasible rule: the load of previous rounds must be within
            // capacity, so this branch may overflow the bin once.
            if x_loads2[bin].le_rel(&cap) {
                x_loads2[bin] = x_loads2[bin].clone() + size.clone();
                x_value2 = x_value2 + value.clone();
            }
            let mut y_loads2 = y_loads.to_vec();
            let mut y_value2 = y_value.clone();
            let mut z_filled2 = z_filled.to_vec();
            let mut z_value2 = z_value.clone();
            if (y_loads2[bin].clone() + size.clone()).le_rel(&cap) {
                y_loads2[bin] = y_loads2[bin].clone() + size;
                y_value2 = y_value2 + value.clone();
            } else if !z_filled2[bin] {
                z_filled2[bin] = true;
                z_value2 = z_value2 + value;
            }
            self.walk(
                depth + 1,
                revealed,
                &x_loads2,
                x_value2,
                &y_loads2,
                y_value2,
                &z_filled2,
                z_value2,
                weight.clone() * p,
            )?;
        }
        revealed.remove(pos);
        Ok(())
    }
}

/// Exact expectations of all four assignment algorithms over every
/// permutation and every tape outcome.
pub fn exact_gap_expectations<T: Scalar>(
    inst: &GapInstance,
    t: usize,
    budget: u64,
) -> Result<GapExactResult<T>, HarnessError> {
    let n = inst.num_items();
    let m = inst.num_bins();
    if t > n {
        return Err(HarnessError::BadArguments(format!(
            "sampling length {t} exceeds {n} rounds"
        )));
    }
    let required = enumeration_size(n, t, m + 1).unwrap_or(u128::MAX);
    if required > u128::from(budget) {
        return Err(HarnessError::BudgetExceeded { required, budget });
    }

    let sequences = binomial(n, t) * factorial(n - t).expect("within budget");
    let seq_weight = T::one() / T::from_u128(sequences);
    let mut oracle = GapOracle::<T>::new(inst);
    let mut e_infeasible = T::zero();
    let mut e_feasible = T::zero();
    let mut e_imitative = T::zero();
    let mut coupling_holds = true;

    let items: Vec<usize> = (0..n).collect();
    for sample in items.iter().copied().combinations(t) {
        let rest: Vec<usize> = items
            .iter()
            .copied()
            .filter(|j| !sample.contains(j))
            .collect();
        let k = rest.len();
        for tail in rest.into_iter().permutations(k) {
            let mut dfs = GapDfs {
                oracle: &mut oracle,
                tail: &tail,
                e_infeasible: T::zero(),
                e_feasible: T::zero(),
                e_imitative: T::zero(),
                coupling_holds: true,
            };
            let mut revealed = sample.clone();
            revealed.sort_unstable();
            let zero_loads = vec![T::zero(); m];
            let z_filled = vec![false; m];
            dfs.walk(
                0,
                &mut revealed,
                &zero_loads,
                T::zero(),
                &zero_loads,
                T::zero(),
                &z_filled,
                T::zero(),
                seq_weight.clone(),
            )?;
            e_infeasible = e_infeasible + dfs.e_infeasible;
            e_feasible = e_feasible + dfs.e_feasible;
            e_imitative = e_imitative + dfs.e_imitative;
            coupling_holds &= dfs.coupling_holds;
        }
    }

    let half = T::one() / T::from_u128(2);
    let random = half * (e_feasible.clone() + e_imitative.clone());
    Ok(GapExactResult {
        infeasible: e_infeasible,
        feasible: e_feasible,
        imitative: e_imitative,
        random,
        coupling_holds,
        enumerated_sequences: sequences,
    })
}

/// Exact expected value of one named algorithm.
pub fn exact_expectation_gap<T: Scalar>(
    inst: &GapInstance,
    algorithm: GapAlgorithm,
    t: usize,
    budget: u64,
) -> Result<T, HarnessError> {
    let result = exact_gap_expectations::<T>(inst, t, budget)?;
    Ok(match algorithm {
        GapAlgorithm::Infeasible => result.infeasible,
        GapAlgorithm::Feasible => result.feasible,
        GapAlgorithm::Imitative => result.imitative,
        GapAlgorithm::Random => result.random,
    })
}

/// Exact expectation of the fractional knapsack run (deterministic given the
/// permutation) with per-item expected fractions.
#[derive(Clone, Debug)]
pub struct KnapsackExactResult<T> {
    pub expected_value: T,
    pub per_item: Vec<T>,
    /// Whether the packed size stayed within capacity on every permutation.
    pub feasible_always: bool,
    pub enumerated_sequences: u128,
}

pub fn exact_expectation_knapsack<T: Scalar>(
    inst: &KnapsackInstance,
    t: usize,
    budget: u64,
) -> Result<KnapsackExactResult<T>, HarnessError> {
    let n = inst.num_items();
    if t > n {
        return Err(HarnessError::BadArguments(format!(
            "sampling length {t} exceeds {n} rounds"
        )));
    }
    let required = enumeration_size(n, t, 1).unwrap_or(u128::MAX);
    if required > u128::from(budget) {
        return Err(HarnessError::BudgetExceeded { required, budget });
    }
    let sequences = binomial(n, t) * factorial(n - t).expect("within budget");
    let seq_weight = T::one() / T::from_u128(sequences);

    let mut oracle = KnapsackOracle::<T>::new(inst);
    let mut expected_value = T::zero();
    let mut per_item = vec![T::zero(); n];
    let mut feasible_always = true;
    let capacity = T::from_rat(inst.capacity());

    let items: Vec<usize> = (0..n).collect();
    for sample in items.iter().copied().combinations(t) {
        let rest: Vec<usize> = items
            .iter()
            .copied()
            .filter(|j| !sample.contains(j))
            .collect();
        let k = rest.len();
        for tail in rest.iter().copied().permutations(k) {
            // The sampling phase only matters as a set, so any fixed order of
            // `sample` represents all t! of its arrival orders.
            let mut order = sample.clone();
            order.extend(tail);
            let perm = Permutation::from_order(order).expect("constructed bijection");
            let run = run_fractional_knapsack_cached(&mut oracle, &perm, t, false)?;
            if !run.packed_size.le_abs(&capacity) {
                feasible_always = false;
            }
            expected_value = expected_value + seq_weight.clone() * run.value.clone();
            for (j, acc) in per_item.iter_mut().enumerate() {
                let f = run.assignment.item_fraction(j);
                if !f.is_zero() {
                    *acc = acc.clone() + seq_weight.clone() * f.clone();
                }
            }
        }
    }
    Ok(KnapsackExactResult {
        expected_value,
        per_item,
        feasible_always,
        enumerated_sequences: sequences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::bounds::theorem2_bound_rat;
    use crate::scalar::Rat;
    use num_bigint::BigInt;

    fn rat(n: i64) -> Rat {
        Rat::from_integer(BigInt::from(n))
    }

    fn ratio(p: i64, q: i64) -> Rat {
        Rat::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn binomials_and_factorials() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(factorial(5), Some(120));
        assert_eq!(enumeration_size(6, 3, 3), Some(20 * 6 * 27));
    }

    /// Two items that each fill the single bin, values 9 and 5: only the
    /// round-2 item can be assigned, and only the denser one has fractional
    /// mass, so the exact expectation is 9/2.
    #[test]
    fn two_item_instance_expectations() {
        let inst = GapInstance::new(
            vec![rat(4)],
            vec![vec![rat(9), rat(5)]],
            vec![vec![rat(4), rat(4)]],
        )
        .unwrap();
        let result = exact_gap_expectations::<Rat>(&inst, 1, 1 << 20).unwrap();
        assert_eq!(result.infeasible, ratio(9, 2));
        assert_eq!(result.feasible, ratio(9, 2));
        assert_eq!(result.imitative, rat(0));
        assert_eq!(result.random, ratio(9, 4));
        assert!(result.coupling_holds);
        // E[v(y)] + E[v(z)] >= E[v(x)].
        assert!(result.feasible.clone() + result.imitative.clone() >= result.infeasible);
    }

    #[test]
    fn zero_values_give_zero_expectation() {
        let inst = GapInstance::new(
            vec![rat(4)],
            vec![vec![rat(0), rat(0)]],
            vec![vec![rat(2), rat(2)]],
        )
        .unwrap();
        let result = exact_gap_expectations::<Rat>(&inst, 1, 1 << 20).unwrap();
        assert_eq!(result.infeasible, rat(0));
        assert_eq!(result.random, rat(0));
    }

    #[test]
    fn random_is_half_of_feasible_plus_imitative() {
        let inst = GapInstance::new(
            vec![rat(5), rat(7)],
            vec![vec![rat(4), rat(2), rat(6)], vec![rat(1), rat(5), rat(3)]],
            vec![vec![rat(3), rat(2), rat(5)], vec![rat(4), rat(3), rat(6)]],
        )
        .unwrap();
        let result = exact_gap_expectations::<Rat>(&inst, 1, 1 << 22).unwrap();
        assert_eq!(
            result.random.clone() * rat(2),
            result.feasible.clone() + result.imitative.clone()
        );
        assert!(result.coupling_holds);
    }

    #[test]
    fn budget_is_enforced() {
        let inst =
            GapInstance::new(vec![rat(5)], vec![vec![rat(1); 12]], vec![vec![rat(1); 12]]).unwrap();
        assert!(matches!(
            exact_gap_expectations::<f64>(&inst, 6, 1000),
            Err(HarnessError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn knapsack_exact_unit_three() {
        // Frozen from the per-permutation run values (0,0,3,3,3,2)/6.
        let inst = KnapsackInstance::new(
            rat(1),
            vec![rat(3), rat(2), rat(1)],
            vec![rat(1), rat(1), rat(1)],
        )
        .unwrap();
        let result = exact_expectation_knapsack::<Rat>(&inst, 1, 1 << 20).unwrap();
        assert_eq!(result.expected_value, ratio(11, 6));
        assert_eq!(result.per_item[0], ratio(1, 2));
        assert_eq!(result.per_item[1], ratio(1, 6));
        assert_eq!(result.per_item[2], rat(0));
        assert!(result.feasible_always);
        // Per-item guarantee: E[x_0] >= x~_0 * (t/n)(H_{n-1} - H_{t-1}) = 1/2,
        // tight for the densest item here.
        let bound = theorem2_bound_rat(3, 1).unwrap();
        assert!(result.per_item[0] >= bound);
    }

    #[test]
    fn knapsack_single_item() {
        let inst = KnapsackInstance::new(rat(2), vec![rat(7)], vec![rat(1)]).unwrap();
        let result = exact_expectation_knapsack::<Rat>(&inst, 0, 1 << 10).unwrap();
        assert_eq!(result.expected_value, rat(7));
        assert_eq!(result.per_item[0], rat(1));
    }
}
