//! Online generalized assignment and fractional knapsack in the random-order
//! model.
//!
//! The crate provides:
//!
//! - [`model`]: instance and assignment types, validation, generators, and a
//!   text instance format with exact rational numbers.
//! - [`offline`]: offline oracles — the fractional greedy knapsack solution, a
//!   canonical primal simplex for the fractional assignment relaxation with a
//!   duality certificate, and exhaustive integral solvers.
//! - [`online_gap`]: the four online assignment algorithms (infeasible,
//!   feasible, imitative, and the randomized combination), driven by an
//!   explicit permutation and an explicit random tape so that coupled runs are
//!   deterministic and directly comparable.
//! - [`online_knapsack`]: the online fractional knapsack algorithm with the
//!   compensation rule that keeps the packing feasible.
//! - [`harness`]: exact enumeration over permutations and tape outcomes,
//!   seeded Monte Carlo estimation, finite-n bound formulas, verification
//!   suites, and reproducible experiment reports.
//!
//! All simulations run in one of two arithmetic backends (see [`scalar`]):
//! `f64` with a fixed tolerance policy, or exact `BigRational`.

pub mod harness;
pub mod model;
pub mod offline;
pub mod online_gap;
pub mod online_knapsack;
pub mod scalar;

pub(crate) mod util;

pub use scalar::{Rat, Scalar};
