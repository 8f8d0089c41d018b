//! Arithmetic backends for solvers and simulations.
//!
//! Everything numeric in this crate is generic over [`Scalar`] with exactly
//! two implementations: `f64` (fast, tolerance-based comparisons) and
//! [`Rat`] = `BigRational` (exact, zero-tolerance comparisons). Instance data
//! itself is always stored as exact rationals; a scalar backend is chosen per
//! run.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Exact rational number type used for instance data and exact-mode runs.
pub type Rat = BigRational;

/// Absolute tolerance for all float-mode comparisons.
pub const FLOAT_TOL: f64 = 1e-9;

/// A number type the solvers and simulators can run on.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Whether comparisons on this backend are exact (no tolerance slack).
    const EXACT: bool;

    /// Comparison slack: zero in exact mode, [`FLOAT_TOL`] for floats.
    fn tol() -> Self;

    fn from_rat(r: &Rat) -> Self;

    /// Lossless embedding of a finite `f64` (every finite float is a dyadic
    /// rational, so this is exact in both backends).
    fn from_f64_lossless(x: f64) -> Self;

    fn from_u128(x: u128) -> Self;

    fn to_f64(&self) -> f64;

    /// Exact textual representation, if the backend has one.
    fn exact_str(&self) -> Option<String> {
        None
    }

    /// `self <= other + tol` (absolute slack).
    fn le_abs(&self, other: &Self) -> bool {
        self.clone() <= other.clone() + Self::tol()
    }

    /// `self <= other * (1 + tol)`. Intended for positive `other` such as
    /// capacities, where the slack should scale with the bound.
    fn le_rel(&self, other: &Self) -> bool {
        self.clone() <= other.clone() * (Self::one() + Self::tol())
    }

    fn from_usize(x: usize) -> Self {
        Self::from_u128(x as u128)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn tol() -> Self {
        FLOAT_TOL
    }

    fn from_rat(r: &Rat) -> Self {
        ToPrimitive::to_f64(r).expect("rational instance data must fit in f64")
    }

    fn from_f64_lossless(x: f64) -> Self {
        x
    }

    fn from_u128(x: u128) -> Self {
        x as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn tol() -> Self {
        Rat::zero()
    }

    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }

    fn from_f64_lossless(x: f64) -> Self {
        Rat::from_float(x).expect("tape draws and parameters must be finite")
    }

    fn from_u128(x: u128) -> Self {
        Rat::from_integer(BigInt::from(x))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn exact_str(&self) -> Option<String> {
        Some(self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_floats_embed_exactly() {
        let x = 0.8125_f64; // 13/16
        let r = Rat::from_f64_lossless(x);
        assert_eq!(r, Rat::new(BigInt::from(13), BigInt::from(16)));
        assert_eq!(Scalar::to_f64(&r), x);
    }

    #[test]
    fn tolerance_policy_differs_by_backend() {
        assert!(1.0f64.le_abs(&(1.0 - 1e-12)));
        let one = Rat::one();
        let slightly_less = Rat::new(BigInt::from(999_999), BigInt::from(1_000_000));
        assert!(!one.le_abs(&slightly_less));
        assert!(slightly_less.le_abs(&one));
    }
}
