//! Binary digit analytics.
//!
//! An "n-bit integer" is any `N` with `2^(n-1) <= N < 2^n`; zero has no bit
//! length under that convention and is rejected.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{invalid, Result};

/// Bisection interval margin for `θ₀`: roots are searched in `(ε, 1/2 - ε)`.
pub const THETA0_MARGIN: f64 = 1e-15;
pub const DEFAULT_THETA0_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DigitProfile {
    #[serde(serialize_with = "crate::arith::serialize_decimal")]
    pub value: BigUint,
    pub bit_length: u64,
    pub ones: u64,
    pub zeros: u64,
}

pub fn digit_profile(value: &BigUint) -> Result<DigitProfile> {
    if value.is_zero() {
        return Err(invalid("digit profile of 0 is undefined (no bit length)"));
    }
    let bit_length = value.bits();
    let ones = value.count_ones();
    Ok(DigitProfile {
        value: value.clone(),
        bit_length,
        ones,
        zeros: bit_length - ones,
    })
}

/// Binary digit sum `s₂(n)`.
pub fn digit_sum(value: &BigUint) -> u64 {
    value.count_ones()
}

/// Number of zeros below the leading one of an n-bit `u64`.
pub fn zeros_u64(value: u64) -> u32 {
    debug_assert!(value != 0);
    64 - value.leading_zeros() - value.count_ones()
}

/// `H(γ) = -γ log₂ γ - (1-γ) log₂(1-γ)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy(gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(invalid(format!("entropy argument {gamma} outside [0, 1]")));
    }
    Ok(entropy_unchecked(gamma))
}

fn entropy_unchecked(gamma: f64) -> f64 {
    let term = |p: f64| if p == 0.0 { 0.0 } else { -p * p.log2() };
    term(gamma) + term(1.0 - gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyThreshold {
    pub a_param: f64,
    pub theta0: f64,
    pub tolerance: f64,
}

impl EntropyThreshold {
    /// The entropy level `(A-1)/(A+1)` that `θ₀` solves for.
    pub fn target(&self) -> f64 {
        entropy_target(self.a_param)
    }
}

fn entropy_target(a: f64) -> f64 {
    (a - 1.0) / (a + 1.0)
}

/// Root of `H(θ) = (A-1)/(A+1)` in `(0, 1/2)`.
///
/// `H` is strictly increasing on `(0, 1/2)`, so plain bisection converges.
/// The bracket is halved until it collapses to adjacent floats; the result
/// is then checked against `tolerance`.
pub fn theta0(a_param: f64, tolerance: f64) -> Result<EntropyThreshold> {
    if !(a_param > 1.0) || !a_param.is_finite() {
        return Err(invalid(format!("theta0 needs A > 1, got {a_param}")));
    }
    if !(tolerance > 0.0) {
        return Err(invalid(format!("theta0 tolerance must be positive, got {tolerance}")));
    }
    let target = entropy_target(a_param);
    let (mut lo, mut hi) = (THETA0_MARGIN, 0.5 - THETA0_MARGIN);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if entropy_unchecked(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = if (entropy_unchecked(lo) - target).abs() <= (entropy_unchecked(hi) - target).abs() {
        lo
    } else {
        hi
    };
    let miss = (entropy_unchecked(theta) - target).abs();
    if miss > tolerance {
        return Err(invalid(format!(
            "theta0({a_param}) reached |H - target| = {miss:e}, above tolerance {tolerance:e}"
        )));
    }
    Ok(EntropyThreshold { a_param, theta0: theta, tolerance })
}

/// `((θ+1)/2 + (θ-1)/(2A)) · n` without checking the hypothesis `θ < θ₀(A)`.
pub fn zero_bound_formula(a_param: f64, theta: f64, n: u64) -> f64 {
    (0.5 * (theta + 1.0) + (theta - 1.0) / (2.0 * a_param)) * n as f64
}

/// Zero count guaranteed for some odd `n^A`-smooth n-bit integer, for `θ < θ₀(A)`.
pub fn theorem1_zero_bound(a_param: f64, theta: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("bit length n must be positive"));
    }
    if !theta.is_finite() {
        return Err(invalid("theta must be finite"));
    }
    let threshold = theta0(a_param, DEFAULT_THETA0_TOLERANCE)?;
    if theta >= threshold.theta0 {
        return Err(invalid(format!(
            "theta = {theta} is not below theta0({a_param}) = {}",
            threshold.theta0
        )));
    }
    Ok(zero_bound_formula(a_param, theta, n))
}
