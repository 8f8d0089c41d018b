//! Seeded instance generators. All generators are pure functions of their
//! parameters and seed, and every produced instance passes validation.
//!
//! Numeric data is drawn on a rational grid (`k / grid`) so that generated
//! instances are exactly representable and cheap in exact arithmetic.

use super::{GapInstance, KnapsackInstance, ModelError};
use crate::scalar::Rat;
use num_bigint::BigInt;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::str::FromStr;

/// Value, size, and capacity ranges for the uniform assignment generator.
#[derive(Clone, Debug)]
pub struct GapGenRanges {
    pub value: (f64, f64),
    pub size: (f64, f64),
    pub capacity: (f64, f64),
    /// Grid denominator: draws are multiples of `1/grid`.
    pub grid: u32,
}

impl Default for GapGenRanges {
    fn default() -> Self {
        Self {
            value: (0.0, 10.0),
            size: (1.0, 5.0),
            capacity: (5.0, 10.0),
            grid: 1000,
        }
    }
}

impl GapGenRanges {
    /// Integer-valued ranges; keeps exact-mode experiments fast.
    pub fn small_integer() -> Self {
        Self {
            value: (0.0, 12.0),
            size: (1.0, 6.0),
            capacity: (6.0, 12.0),
            grid: 1,
        }
    }
}

fn grid_bounds(range: (f64, f64), grid: u32, what: &str) -> Result<(i64, i64), ModelError> {
    let (lo, hi) = range;
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(ModelError::BadRange(format!("{what} range ({lo}, {hi})")));
    }
    let lo_k = (lo * f64::from(grid)).ceil() as i64;
    let hi_k = (hi * f64::from(grid)).floor() as i64;
    if lo_k > hi_k {
        return Err(ModelError::BadRange(format!(
            "{what} range ({lo}, {hi}) contains no grid point at grid {grid}"
        )));
    }
    Ok((lo_k, hi_k))
}

fn draw_grid<R: Rng + ?Sized>(rng: &mut R, bounds: (i64, i64), grid: u32) -> Rat {
    let k = rng.random_range(bounds.0..=bounds.1);
    Rat::new(BigInt::from(k), BigInt::from(grid))
}

/// Uniform random assignment instance: capacities, values, and sizes drawn
/// independently on the grid. Requires `0 < s_min` and `s_max <= c_min` so
/// every item fits in every bin.
pub fn gen_uniform_gap(
    n: usize,
    m: usize,
    seed: u64,
    ranges: &GapGenRanges,
) -> Result<GapInstance, ModelError> {
    if n == 0 || m == 0 {
        return Err(ModelError::BadRange(format!("n = {n}, m = {m}")));
    }
    if ranges.grid == 0 {
        return Err(ModelError::BadRange("grid must be positive".into()));
    }
    if ranges.size.0 <= 0.0 {
        return Err(ModelError::BadRange("sizes must be positive".into()));
    }
    if ranges.size.1 > ranges.capacity.0 {
        return Err(ModelError::BadRange(format!(
            "max size {} exceeds min capacity {}",
            ranges.size.1, ranges.capacity.0
        )));
    }
    if ranges.value.0 < 0.0 {
        return Err(ModelError::BadRange("values must be nonnegative".into()));
    }
    let v_bounds = grid_bounds(ranges.value, ranges.grid, "value")?;
    let s_bounds = grid_bounds(ranges.size, ranges.grid, "size")?;
    let c_bounds = grid_bounds(ranges.capacity, ranges.grid, "capacity")?;
    if s_bounds.0 <= 0 {
        return Err(ModelError::BadRange(
            "size range contains no positive grid point".into(),
        ));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let capacities: Vec<Rat> = (0..m)
        .map(|_| draw_grid(&mut rng, c_bounds, ranges.grid))
        .collect();
    let values: Vec<Vec<Rat>> = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| draw_grid(&mut rng, v_bounds, ranges.grid))
                .collect()
        })
        .collect();
    let sizes: Vec<Vec<Rat>> = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| draw_grid(&mut rng, s_bounds, ranges.grid))
                .collect()
        })
        .collect();
    GapInstance::new(capacities, values, sizes)
}

/// Standard knapsack test families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KnapsackFamily {
    Uncorrelated,
    WeaklyCorrelated,
    StronglyCorrelated,
    SubsetSum,
}

impl FromStr for KnapsackFamily {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uncorrelated" => Ok(Self::Uncorrelated),
            "weakly-correlated" => Ok(Self::WeaklyCorrelated),
            "strongly-correlated" => Ok(Self::StronglyCorrelated),
            "subset-sum" => Ok(Self::SubsetSum),
            other => Err(ModelError::UnknownFamily(other.to_string())),
        }
    }
}

impl std::fmt::Display for KnapsackFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Self::Uncorrelated => "uncorrelated",
            Self::WeaklyCorrelated => "weakly-correlated",
            Self::StronglyCorrelated => "strongly-correlated",
            Self::SubsetSum => "subset-sum",
        };
        f.write_str(name)
    }
}

/// Parameters for [`gen_knapsack_family`]. Sizes are integers in
/// `1..=coeff_range`; `offset` controls the value correlation; the capacity
/// defaults to `max(max_j s_j, round(sum_j s_j / 2))`.
#[derive(Clone, Debug)]
pub struct FamilyParams {
    pub coeff_range: u64,
    pub offset: u64,
    pub capacity: Option<u64>,
}

impl Default for FamilyParams {
    fn default() -> Self {
        Self {
            coeff_range: 100,
            offset: 10,
            capacity: None,
        }
    }
}

/// Integer knapsack instance from one of the standard families.
pub fn gen_knapsack_family(
    family: KnapsackFamily,
    n: usize,
    seed: u64,
    params: &FamilyParams,
) -> Result<KnapsackInstance, ModelError> {
    if n == 0 {
        return Err(ModelError::BadRange("n must be positive".into()));
    }
    if params.coeff_range == 0 {
        return Err(ModelError::BadRange("coeff_range must be positive".into()));
    }
    let r = params.coeff_range;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let sizes_int: Vec<u64> = (0..n).map(|_| rng.random_range(1..=r)).collect();
    let values_int: Vec<u64> = sizes_int
        .iter()
        .map(|&s| match family {
            KnapsackFamily::Uncorrelated => rng.random_range(1..=r),
            KnapsackFamily::WeaklyCorrelated => {
                let lo = s.saturating_sub(params.offset).max(1);
                let hi = s + params.offset;
                rng.random_range(lo..=hi)
            }
            KnapsackFamily::StronglyCorrelated => s + params.offset,
            KnapsackFamily::SubsetSum => s,
        })
        .collect();
    let max_size = *sizes_int.iter().max().expect("n >= 1");
    let capacity = params
        .capacity
        .unwrap_or_else(|| max_size.max(sizes_int.iter().sum::<u64>().div_ceil(2)));
    let to_rat = |x: u64| Rat::from_integer(BigInt::from(x));
    KnapsackInstance::new(
        to_rat(capacity),
        values_int.into_iter().map(to_rat).collect(),
        sizes_int.into_iter().map(to_rat).collect(),
    )
}

/// A finite discrete distribution over positive rational values.
#[derive(Clone, Debug)]
pub struct DiscreteDist {
    values: Vec<Rat>,
    cumulative: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(support: Vec<(Rat, f64)>) -> Result<Self, ModelError> {
        if support.is_empty() {
            return Err(ModelError::EmptySupport);
        }
        let mut total = 0.0;
        for (value, weight) in &support {
            if *value <= Rat::from_integer(BigInt::from(0)) {
                return Err(ModelError::BadRange(format!(
                    "distribution value {value} must be positive"
                )));
            }
            if !weight.is_finite() || *weight <= 0.0 {
                return Err(ModelError::BadRange(format!(
                    "distribution weight {weight} must be positive and finite"
                )));
            }
            total += weight;
        }
        let mut cumulative = Vec::with_capacity(support.len());
        let mut acc = 0.0;
        let values = support
            .iter()
            .map(|(value, weight)| {
                acc += weight / total;
                cumulative.push(acc);
                value.clone()
            })
            .collect();
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Ok(Self { values, cumulative })
    }

    pub fn point(value: Rat) -> Result<Self, ModelError> {
        Self::new(vec![(value, 1.0)])
    }

    pub fn uniform(values: Vec<Rat>) -> Result<Self, ModelError> {
        Self::new(values.into_iter().map(|v| (v, 1.0)).collect())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Rat {
        let draw: f64 = rng.random();
        let idx = self
            .cumulative
            .iter()
            .position(|&c| draw < c)
            .unwrap_or(self.values.len() - 1);
        self.values[idx].clone()
    }
}

/// Unit-size, unit-capacity instance with i.i.d. values: the hard instance
/// class for deterministic fractional knapsack algorithms.
pub fn gen_unit_iid(
    n: usize,
    dist: &DiscreteDist,
    seed: u64,
) -> Result<KnapsackInstance, ModelError> {
    if n == 0 {
        return Err(ModelError::BadRange("n must be positive".into()));
    }
    let one = Rat::from_integer(BigInt::from(1));
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let values: Vec<Rat> = (0..n).map(|_| dist.sample(&mut rng)).collect();
    KnapsackInstance::new(one.clone(), values, vec![one; n])
}
