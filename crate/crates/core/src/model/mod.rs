//! Domain types: instances, assignments, permutations, and feasibility
//! checking, plus seeded generators and the instance file format.
//!
//! All indices are 0-based. Instance data is stored as exact rationals and
//! never mutated after construction; every operation here is a pure function.

mod gen;
mod io;

pub use gen::{
    gen_knapsack_family, gen_uniform_gap, gen_unit_iid, DiscreteDist, FamilyParams, GapGenRanges,
    KnapsackFamily,
};
pub use io::{load_instance, parse_rational, save_instance, InstanceFile};

use crate::scalar::{Rat, Scalar};
use crate::util::short_digest;
use num_traits::Signed;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("capacity of bin {bin} must be positive")]
    NonPositiveCapacity { bin: usize },
    #[error("size of item {item} in bin {bin} must be positive")]
    NonPositiveSize { bin: usize, item: usize },
    #[error("value of item {item} in bin {bin} must be nonnegative")]
    NegativeValue { bin: usize, item: usize },
    #[error("size of item {item} in bin {bin} exceeds the bin capacity")]
    SizeExceedsCapacity { bin: usize, item: usize },
    #[error("size of item {item} must be positive")]
    NonPositiveItemSize { item: usize },
    #[error("value of item {item} must be positive")]
    NonPositiveItemValue { item: usize },
    #[error("size of item {item} exceeds the knapsack capacity")]
    ItemSizeExceedsCapacity { item: usize },
    #[error("bad generator range: {0}")]
    BadRange(String),
    #[error("unknown knapsack family `{0}`")]
    UnknownFamily(String),
    #[error("discrete distribution has empty support")]
    EmptySupport,
    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("not a permutation: {0}")]
    NotAPermutation(String),
}

/// A generalized assignment instance: `m` bins with capacities and per
/// (bin, item) values and sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapInstance {
    capacities: Vec<Rat>,
    values: Vec<Vec<Rat>>,
    sizes: Vec<Vec<Rat>>,
}

impl GapInstance {
    /// Validates and constructs an instance. Checks run in a fixed order and
    /// report the first violation: dimensions, capacity positivity (by bin),
    /// then per cell in row-major order size positivity, value nonnegativity,
    /// and the `s <= C` requirement.
    pub fn new(
        capacities: Vec<Rat>,
        values: Vec<Vec<Rat>>,
        sizes: Vec<Vec<Rat>>,
    ) -> Result<Self, ModelError> {
        let m = capacities.len();
        if m == 0 {
            return Err(ModelError::DimensionMismatch(
                "instance must have at least one bin".into(),
            ));
        }
        if values.len() != m || sizes.len() != m {
            return Err(ModelError::DimensionMismatch(format!(
                "expected {m} rows in values and sizes, got {} and {}",
                values.len(),
                sizes.len()
            )));
        }
        let n = values[0].len();
        if n == 0 {
            return Err(ModelError::DimensionMismatch(
                "instance must have at least one item".into(),
            ));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::DimensionMismatch(format!(
                    "values row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        for (i, row) in sizes.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::DimensionMismatch(format!(
                    "sizes row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        for (i, cap) in capacities.iter().enumerate() {
            if !cap.is_positive() {
                return Err(ModelError::NonPositiveCapacity { bin: i });
            }
        }
        for i in 0..m {
            for j in 0..n {
                if !sizes[i][j].is_positive() {
                    return Err(ModelError::NonPositiveSize { bin: i, item: j });
                }
                if values[i][j].is_negative() {
                    return Err(ModelError::NegativeValue { bin: i, item: j });
                }
                if sizes[i][j] > capacities[i] {
                    return Err(ModelError::SizeExceedsCapacity { bin: i, item: j });
                }
            }
        }
        Ok(Self {
            capacities,
            values,
            sizes,
        })
    }

    pub fn num_bins(&self) -> usize {
        self.capacities.len()
    }

    pub fn num_items(&self) -> usize {
        self.values[0].len()
    }

    pub fn capacity(&self, bin: usize) -> &Rat {
        &self.capacities[bin]
    }

    pub fn value(&self, bin: usize, item: usize) -> &Rat {
        &self.values[bin][item]
    }

    pub fn size(&self, bin: usize, item: usize) -> &Rat {
        &self.sizes[bin][item]
    }

    /// Materializes the instance data in the chosen arithmetic backend.
    pub fn data<T: Scalar>(&self) -> GapData<T> {
        let m = self.num_bins();
        let n = self.num_items();
        GapData {
            m,
            n,
            caps: self.capacities.iter().map(T::from_rat).collect(),
            values: self
                .values
                .iter()
                .flat_map(|row| row.iter().map(T::from_rat))
                .collect(),
            sizes: self
                .sizes
                .iter()
                .flat_map(|row| row.iter().map(T::from_rat))
                .collect(),
        }
    }

    pub fn digest(&self) -> String {
        short_digest(&save_instance(&InstanceFile::Gap(self.clone())))
    }
}

/// Instance data converted once into a scalar backend; row-major `m x n`.
#[derive(Clone, Debug)]
pub struct GapData<T> {
    pub m: usize,
    pub n: usize,
    pub caps: Vec<T>,
    values: Vec<T>,
    sizes: Vec<T>,
}

impl<T: Scalar> GapData<T> {
    #[inline]
    pub fn value(&self, bin: usize, item: usize) -> &T {
        &self.values[bin * self.n + item]
    }

    #[inline]
    pub fn size(&self, bin: usize, item: usize) -> &T {
        &self.sizes[bin * self.n + item]
    }
}

/// A knapsack instance: one capacity, per-item values and sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnapsackInstance {
    capacity: Rat,
    values: Vec<Rat>,
    sizes: Vec<Rat>,
}

impl KnapsackInstance {
    pub fn new(capacity: Rat, values: Vec<Rat>, sizes: Vec<Rat>) -> Result<Self, ModelError> {
        if values.is_empty() {
            return Err(ModelError::DimensionMismatch(
                "instance must have at least one item".into(),
            ));
        }
        if values.len() != sizes.len() {
            return Err(ModelError::DimensionMismatch(format!(
                "{} values vs {} sizes",
                values.len(),
                sizes.len()
            )));
        }
        if !capacity.is_positive() {
            return Err(ModelError::NonPositiveCapacity { bin: 0 });
        }
        for j in 0..values.len() {
            if !sizes[j].is_positive() {
                return Err(ModelError::NonPositiveItemSize { item: j });
            }
            if !values[j].is_positive() {
                return Err(ModelError::NonPositiveItemValue { item: j });
            }
            if sizes[j] > capacity {
                return Err(ModelError::ItemSizeExceedsCapacity { item: j });
            }
        }
        Ok(Self {
            capacity,
            values,
            sizes,
        })
    }

    pub fn num_items(&self) -> usize {
        self.values.len()
    }

    pub fn capacity(&self) -> &Rat {
        &self.capacity
    }

    pub fn value(&self, item: usize) -> &Rat {
        &self.values[item]
    }

    pub fn size(&self, item: usize) -> &Rat {
        &self.sizes[item]
    }

    /// Exact density `v_j / s_j` of an item.
    pub fn density(&self, item: usize) -> Rat {
        &self.values[item] / &self.sizes[item]
    }

    /// The equivalent single-bin assignment instance.
    pub fn to_gap(&self) -> GapInstance {
        GapInstance::new(
            vec![self.capacity.clone()],
            vec![self.values.clone()],
            vec![self.sizes.clone()],
        )
        .expect("a valid knapsack instance is a valid single-bin instance")
    }

    pub fn data<T: Scalar>(&self) -> KnapsackData<T> {
        KnapsackData {
            n: self.num_items(),
            capacity: T::from_rat(&self.capacity),
            values: self.values.iter().map(T::from_rat).collect(),
            sizes: self.sizes.iter().map(T::from_rat).collect(),
        }
    }

    pub fn digest(&self) -> String {
        short_digest(&save_instance(&InstanceFile::Knapsack(self.clone())))
    }
}

#[derive(Clone, Debug)]
pub struct KnapsackData<T> {
    pub n: usize,
    pub capacity: T,
    pub values: Vec<T>,
    pub sizes: Vec<T>,
}

/// A binary assignment. Constraint C2 (each item in at most one bin) holds by
/// construction; C1 feasibility is a queryable property, not an invariant,
/// because the infeasible algorithm intentionally violates it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    num_bins: usize,
    bins: Vec<Option<usize>>,
}

impl Assignment {
    pub fn empty(num_bins: usize, num_items: usize) -> Self {
        Self {
            num_bins,
            bins: vec![None; num_items],
        }
    }

    /// Places an item into a bin. Panics if the item is already assigned or an
    /// index is out of range; callers own the single-assignment discipline.
    pub fn place(&mut self, item: usize, bin: usize) {
        assert!(bin < self.num_bins, "bin index out of range");
        assert!(self.bins[item].is_none(), "item {item} is already assigned");
        self.bins[item] = Some(bin);
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn num_items(&self) -> usize {
        self.bins.len()
    }

    pub fn bin_of(&self, item: usize) -> Option<usize> {
        self.bins[item]
    }

    pub fn entry(&self, bin: usize, item: usize) -> bool {
        self.bins[item] == Some(bin)
    }

    pub fn items_in(&self, bin: usize) -> impl Iterator<Item = usize> + '_ {
        self.bins
            .iter()
            .enumerate()
            .filter_map(move |(j, b)| (*b == Some(bin)).then_some(j))
    }

    pub fn is_empty(&self) -> bool {
        self.bins.iter().all(Option::is_none)
    }
}

/// A `[0,1]`-valued assignment matrix (`m x n`, row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalAssignment<T> {
    num_bins: usize,
    num_items: usize,
    entries: Vec<T>,
}

impl<T: Scalar> FractionalAssignment<T> {
    pub fn zeros(num_bins: usize, num_items: usize) -> Self {
        Self::from_raw(num_bins, num_items, vec![T::zero(); num_bins * num_items])
    }

    /// Validating constructor: every entry in `[0,1]` and column sums at most
    /// one, within the backend tolerance.
    pub fn from_entries(
        num_bins: usize,
        num_items: usize,
        entries: Vec<T>,
    ) -> Result<Self, ModelError> {
        if entries.len() != num_bins * num_items {
            return Err(ModelError::DimensionMismatch(format!(
                "expected {} entries, got {}",
                num_bins * num_items,
                entries.len()
            )));
        }
        let a = Self {
            num_bins,
            num_items,
            entries,
        };
        for j in 0..num_items {
            let mut col_sum = T::zero();
            for i in 0..num_bins {
                let e = a.get(i, j);
                if !T::zero().le_abs(e) || !e.le_abs(&T::one()) {
                    return Err(ModelError::DimensionMismatch(format!(
                        "entry ({i},{j}) outside [0,1]"
                    )));
                }
                col_sum = col_sum + e.clone();
            }
            if !col_sum.le_abs(&T::one()) {
                return Err(ModelError::DimensionMismatch(format!(
                    "column {j} sums above one"
                )));
            }
        }
        Ok(a)
    }

    /// Internal constructor for solver outputs whose invariants hold by
    /// construction.
    pub(crate) fn from_raw(num_bins: usize, num_items: usize, entries: Vec<T>) -> Self {
        debug_assert_eq!(entries.len(), num_bins * num_items);
        Self {
            num_bins,
            num_items,
            entries,
        }
    }

    #[inline]
    pub fn get(&self, bin: usize, item: usize) -> &T {
        &self.entries[bin * self.num_items + item]
    }

    pub(crate) fn set(&mut self, bin: usize, item: usize, value: T) {
        self.entries[bin * self.num_items + item] = value;
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    /// Item fraction for a single-bin (knapsack) assignment.
    pub fn item_fraction(&self, item: usize) -> &T {
        debug_assert_eq!(self.num_bins, 1);
        self.get(0, item)
    }
}

/// Read access shared by binary and fractional assignments.
pub trait AssignmentLike<T: Scalar> {
    fn num_bins(&self) -> usize;
    fn num_items(&self) -> usize;
    fn fraction(&self, bin: usize, item: usize) -> T;
}

impl<T: Scalar> AssignmentLike<T> for Assignment {
    fn num_bins(&self) -> usize {
        self.num_bins
    }

    fn num_items(&self) -> usize {
        self.bins.len()
    }

    fn fraction(&self, bin: usize, item: usize) -> T {
        if self.entry(bin, item) {
            T::one()
        } else {
            T::zero()
        }
    }
}

impl<T: Scalar> AssignmentLike<T> for FractionalAssignment<T> {
    fn num_bins(&self) -> usize {
        self.num_bins
    }

    fn num_items(&self) -> usize {
        self.num_items
    }

    fn fraction(&self, bin: usize, item: usize) -> T {
        self.get(bin, item).clone()
    }
}

fn check_dims<T: Scalar>(x: &impl AssignmentLike<T>, inst: &GapInstance) -> Result<(), ModelError> {
    if x.num_bins() != inst.num_bins() || x.num_items() != inst.num_items() {
        return Err(ModelError::DimensionMismatch(format!(
            "assignment is {}x{}, instance is {}x{}",
            x.num_bins(),
            x.num_items(),
            inst.num_bins(),
            inst.num_items()
        )));
    }
    Ok(())
}

/// Total value `sum_{i,j} v_{i,j} x_{i,j}`.
pub fn value_of<T: Scalar>(
    x: &impl AssignmentLike<T>,
    inst: &GapInstance,
) -> Result<T, ModelError> {
    check_dims(x, inst)?;
    let mut total = T::zero();
    for i in 0..inst.num_bins() {
        for j in 0..inst.num_items() {
            let f = x.fraction(i, j);
            if !f.is_zero() {
                total = total + T::from_rat(inst.value(i, j)) * f;
            }
        }
    }
    Ok(total)
}

/// Load `sum_j s_{i,j} x_{i,j}` of a single bin.
pub fn bin_load<T: Scalar>(
    x: &impl AssignmentLike<T>,
    inst: &GapInstance,
    bin: usize,
) -> Result<T, ModelError> {
    check_dims(x, inst)?;
    if bin >= inst.num_bins() {
        return Err(ModelError::IndexOutOfRange {
            what: "bin",
            index: bin,
            len: inst.num_bins(),
        });
    }
    let mut load = T::zero();
    for j in 0..inst.num_items() {
        let f = x.fraction(bin, j);
        if !f.is_zero() {
            load = load + T::from_rat(inst.size(bin, j)) * f;
        }
    }
    Ok(load)
}

/// Per-constraint feasibility outcome of an assignment.
///
/// `overflow_items[i]` lists the items in bin `i` whose individual removal
/// restores the capacity constraint; empty when the bin is feasible.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityReport<T> {
    pub satisfies_c1: Vec<bool>,
    pub slack: Vec<T>,
    pub satisfies_c2: Vec<bool>,
    pub overflow_items: Vec<Vec<usize>>,
}

impl<T> FeasibilityReport<T> {
    pub fn is_feasible(&self) -> bool {
        self.satisfies_c1.iter().all(|&ok| ok) && self.satisfies_c2.iter().all(|&ok| ok)
    }
}

/// Checks C1 (per-bin capacity) and C2 (per-item column sums) and reports
/// slack and overflow items. Exact in rational mode, absolute tolerance
/// otherwise.
pub fn check_feasibility<T: Scalar>(
    x: &impl AssignmentLike<T>,
    inst: &GapInstance,
) -> Result<FeasibilityReport<T>, ModelError> {
    check_dims(x, inst)?;
    let m = inst.num_bins();
    let n = inst.num_items();
    let mut satisfies_c1 = Vec::with_capacity(m);
    let mut slack = Vec::with_capacity(m);
    let mut overflow_items = Vec::with_capacity(m);
    for i in 0..m {
        let cap = T::from_rat(inst.capacity(i));
        let load = bin_load(x, inst, i)?;
        let ok = load.le_abs(&cap);
        satisfies_c1.push(ok);
        let mut overflow = Vec::new();
        if !ok {
            for j in 0..n {
                let f = x.fraction(i, j);
                if f.is_zero() {
                    continue;
                }
                let without = load.clone() - T::from_rat(inst.size(i, j)) * f;
                if without.le_abs(&cap) {
                    overflow.push(j);
                }
            }
        }
        overflow_items.push(overflow);
        slack.push(cap - load);
    }
    let mut satisfies_c2 = Vec::with_capacity(n);
    for j in 0..n {
        let mut col = T::zero();
        for i in 0..m {
            col = col + x.fraction(i, j);
        }
        satisfies_c2.push(col.le_abs(&T::one()));
    }
    Ok(FeasibilityReport {
        satisfies_c1,
        slack,
        satisfies_c2,
        overflow_items,
    })
}

/// An arrival order: position `l` holds the item revealed in round `l + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    order: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
        }
    }

    pub fn from_order(order: Vec<usize>) -> Result<Self, ModelError> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &j in &order {
            if j >= n {
                return Err(ModelError::NotAPermutation(format!(
                    "index {j} out of range for {n} items"
                )));
            }
            if seen[j] {
                return Err(ModelError::NotAPermutation(format!("index {j} repeats")));
            }
            seen[j] = true;
        }
        Ok(Self { order })
    }

    /// Uniform sample via Fisher-Yates on the given generator.
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        Self { order }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Item revealed in the given 0-based round.
    pub fn item_at(&self, round: usize) -> usize {
        self.order[round]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    pub fn digest(&self) -> String {
        let text = self
            .order
            .iter()
            .map(|j| j.to_string())
            .collect::<Vec<_>>()
            .join(",");
        short_digest(text.as_bytes())
    }
}
