//! Finite-n bound formulas and the asymptotic constants they approach.
//!
//! The finite-n expressions are the exact intermediate inequalities of the
//! analysis; the asymptotic constants are reported alongside for context but
//! are not attainable at small n because of the vanishing correction terms.

use super::HarnessError;
use crate::scalar::Rat;
use num_bigint::BigInt;
use num_traits::Zero;

/// Exact harmonic number `H_k`.
pub fn harmonic_rat(k: usize) -> Rat {
    let mut h = Rat::zero();
    for i in 1..=k {
        h += Rat::new(BigInt::from(1), BigInt::from(i));
    }
    h
}

/// Float harmonic number, summed in ascending index order for determinism.
pub fn harmonic(k: usize) -> f64 {
    let mut h = 0.0;
    for i in 1..=k {
        h += 1.0 / i as f64;
    }
    h
}

fn check_t(n: usize, t: usize) -> Result<(), HarnessError> {
    if t < 1 || t >= n {
        return Err(HarnessError::BadArguments(format!(
            "sampling length t = {t} must satisfy 1 <= t < n = {n}"
        )));
    }
    Ok(())
}

/// Finite-n factor of the infeasible-run guarantee: `2 - 2t/n + H_t - H_n`.
pub fn lemma3_bound(n: usize, t: usize) -> Result<f64, HarnessError> {
    check_t(n, t)?;
    Ok(2.0 - 2.0 * t as f64 / n as f64 + harmonic(t) - harmonic(n))
}

pub fn lemma3_bound_rat(n: usize, t: usize) -> Result<Rat, HarnessError> {
    check_t(n, t)?;
    let two = Rat::from_integer(BigInt::from(2));
    let frac = Rat::new(BigInt::from(2 * t as u64), BigInt::from(n as u64));
    Ok(two - frac + harmonic_rat(t) - harmonic_rat(n))
}

/// Finite-n factor of the fractional knapsack guarantee:
/// `(t/n) * (H_{n-1} - H_{t-1})`.
pub fn theorem2_bound(n: usize, t: usize) -> Result<f64, HarnessError> {
    check_t(n, t)?;
    Ok(t as f64 / n as f64 * (harmonic(n - 1) - harmonic(t - 1)))
}

pub fn theorem2_bound_rat(n: usize, t: usize) -> Result<Rat, HarnessError> {
    check_t(n, t)?;
    let frac = Rat::new(BigInt::from(t as u64), BigInt::from(n as u64));
    Ok(frac * (harmonic_rat(n - 1) - harmonic_rat(t - 1)))
}

/// Asymptotic guarantee of the infeasible run.
pub fn infeasible_constant() -> f64 {
    1.0 - std::f64::consts::LN_2
}

/// Asymptotic guarantee of the randomized feasible combination.
pub fn random_gap_constant() -> f64 {
    (1.0 - std::f64::consts::LN_2) / 2.0
}

/// Asymptotic guarantee of the fractional knapsack algorithm.
pub fn fractional_knapsack_constant() -> f64 {
    1.0 / std::f64::consts::E
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(p: i64, q: i64) -> Rat {
        Rat::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn lemma3_bound_at_six_three() {
        // 1 - (1/4 + 1/5 + 1/6) = 23/60.
        assert_eq!(lemma3_bound_rat(6, 3).unwrap(), ratio(23, 60));
        assert!((lemma3_bound(6, 3).unwrap() - 23.0 / 60.0).abs() < 1e-12);
    }

    #[test]
    fn lemma3_bound_approaches_its_constant_from_above() {
        let limit = infeasible_constant();
        let mut previous = f64::INFINITY;
        for &n in &[10usize, 100, 1_000, 10_000] {
            let b = lemma3_bound(n, n / 2).unwrap();
            assert!(b >= limit, "bound {b} fell below the limit {limit}");
            assert!(b <= previous + 1e-12);
            previous = b;
        }
        assert!(lemma3_bound(10_000, 5_000).unwrap() - limit < 1e-3);
    }

    #[test]
    fn harmonic_sum_identity() {
        // sum_{l=1}^{z} H_l = (z+1) H_z - z, exactly for small z and within
        // float rounding up to z = 10^4.
        for z in 1..=60usize {
            let mut lhs = Rat::zero();
            for l in 1..=z {
                lhs += harmonic_rat(l);
            }
            let rhs = Rat::from_integer(BigInt::from(z as u64 + 1)) * harmonic_rat(z)
                - Rat::from_integer(BigInt::from(z as u64));
            assert_eq!(lhs, rhs);
        }
        let z = 10_000usize;
        let mut lhs = 0.0;
        let mut h = 0.0;
        for l in 1..=z {
            h += 1.0 / l as f64;
            lhs += h;
        }
        let rhs = (z as f64 + 1.0) * harmonic(z) - z as f64;
        assert!((lhs - rhs).abs() / rhs.abs() < 1e-9);
    }

    #[test]
    fn theorem2_bound_examples() {
        assert_eq!(theorem2_bound_rat(3, 1).unwrap(), ratio(1, 2));
        assert!((theorem2_bound(3, 1).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn theorem2_bound_dominates_its_integral_form() {
        for n in 3..60usize {
            for t in 1..n {
                let b = theorem2_bound(n, t).unwrap();
                let integral = t as f64 / n as f64 * (n as f64 / t as f64).ln();
                assert!(b >= integral - 1e-12, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn theorem2_bound_near_one_over_e_at_scale() {
        let n = 10_000usize;
        let t = (n as f64 / std::f64::consts::E).floor() as usize;
        let b = theorem2_bound(n, t).unwrap();
        assert!((b - fractional_knapsack_constant()).abs() < 0.01);
    }

    #[test]
    fn bad_arguments_are_rejected() {
        assert!(lemma3_bound(5, 0).is_err());
        assert!(lemma3_bound(5, 5).is_err());
        assert!(theorem2_bound(1, 1).is_err());
    }
}
