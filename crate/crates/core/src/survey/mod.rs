//! Exhaustive zero-count surveys of odd smooth n-bit integers, binomial
//! tail and log-binomial checks, and the lemma battery.

mod battery;

pub use battery::{run_battery, BatteryConfig, LemmaCheck};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{log2_big, primes_up_to};
use crate::construct::log_binomial_row_sum;
use crate::digits::{binary_entropy, theta0, zero_bound_formula, zeros_u64, DEFAULT_THETA0_TOLERANCE};
use crate::error::{invalid, Error, Result};
use crate::smoothcount::for_each_smooth;

/// Largest bit length accepted by [`survey_theorem1`].
pub const SURVEY_GUARD_N: u32 = 32;
/// Required gap below `θ₀(A)` for the survey's `θ`.
pub const THETA_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveyResult {
    pub n: u32,
    pub a_param: f64,
    pub theta: f64,
    pub y: u64,
    /// Odd `y`-smooth integers in `[2^(n-1), 2^n)`.
    pub population: u64,
    pub max_zeros: u32,
    /// Smallest integer attaining `max_zeros`.
    pub argmax: u64,
    pub predicted_zeros: f64,
    /// `max_zeros >= predicted_zeros`.
    pub claim_holds: bool,
    /// `histogram[z]` = number of surveyed integers with `z` zeros.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    population: u64,
    max_zeros: u32,
    argmax: u64,
    histogram: Vec<u64>,
}

impl Tally {
    fn new(n: u32) -> Self {
        Self { histogram: vec![0; n as usize], ..Default::default() }
    }

    fn record(&mut self, v: u64) {
        let z = zeros_u64(v);
        self.population += 1;
        self.histogram[z as usize] += 1;
        if self.population == 1 || z > self.max_zeros || (z == self.max_zeros && v < self.argmax) {
            self.max_zeros = z;
            self.argmax = v;
        }
    }

    fn combine(mut self, other: Tally) -> Tally {
        if other.population > 0
            && (self.population == 0
                || other.max_zeros > self.max_zeros
                || (other.max_zeros == self.max_zeros && other.argmax < self.argmax))
        {
            self.max_zeros = other.max_zeros;
            self.argmax = other.argmax;
        }
        self.population += other.population;
        for (a, b) in self.histogram.iter_mut().zip(other.histogram) {
            *a += b;
        }
        self
    }
}

/// Survey every odd `⌊n^A⌋`-smooth integer in `[2^(n-1), 2^n)`.
///
/// The walk is split by the exponent of 3; each branch enumerates the
/// remaining odd primes depth-first.
pub fn survey_theorem1(n: u32, a_param: f64, theta: f64, with_histogram: bool) -> Result<SurveyResult> {
    if n == 0 || n > SURVEY_GUARD_N {
        return Err(Error::GuardExceeded { what: "survey bit length n", limit: SURVEY_GUARD_N.to_string() });
    }
    let threshold = theta0(a_param, DEFAULT_THETA0_TOLERANCE)?;
    if !theta.is_finite() || theta >= threshold.theta0 - THETA_MARGIN {
        return Err(invalid(format!(
            "theta = {theta} must lie below theta0({a_param}) - {THETA_MARGIN:e} = {}",
            threshold.theta0 - THETA_MARGIN
        )));
    }
    let y = f64::from(n).powf(a_param).floor() as u64;
    let lo = 1u64 << (n - 1);
    let hi = (1u64 << n) - 1;
    let table = primes_up_to(y.max(2));
    let odd: Vec<u64> = table.primes_to(y).iter().copied().filter(|&p| p > 2).collect();
    let (has_three, rest) = match odd.first() {
        Some(3) => (true, &odd[1..]),
        _ => (false, &odd[..]),
    };
    let mut powers = vec![1u64];
    if has_three {
        while let Some(next) = powers.last().unwrap().checked_mul(3).filter(|&v| v <= hi) {
            powers.push(next);
        }
    }
    let tally = powers
        .par_iter()
        .map(|&base| {
            let mut t = Tally::new(n);
            for_each_smooth(hi / base, rest, |v| {
                let w = v * base;
                if w >= lo {
                    t.record(w);
                }
            });
            t
        })
        .reduce(|| Tally::new(n), Tally::combine);
    if tally.population == 0 {
        return Err(invalid(format!("no odd {y}-smooth {n}-bit integers")));
    }
    let predicted_zeros = zero_bound_formula(a_param, theta, u64::from(n));
    Ok(SurveyResult {
        n,
        a_param,
        theta,
        y,
        population: tally.population,
        max_zeros: tally.max_zeros,
        argmax: tally.argmax,
        predicted_zeros,
        claim_holds: f64::from(tally.max_zeros) >= predicted_zeros,
        histogram: with_histogram.then_some(tally.histogram),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCheck {
    pub n: u64,
    pub gamma: f64,
    pub kmax: u64,
    #[serde(serialize_with = "crate::arith::serialize_decimal")]
    pub sum: BigUint,
    pub log2_sum: f64,
    /// `n·H(γ)`, the base-2 logarithm of the bound.
    pub log2_bound: f64,
    pub holds: bool,
}

/// `Σ_{k <= γn} C(n, k)` against `2^(n·H(γ))`.
pub fn binomial_tail_check(n: u64, gamma: f64) -> Result<TailCheck> {
    if n == 0 || n > 10_000 {
        return Err(invalid(format!("n must lie in 1..=10000, got {n}")));
    }
    if !(gamma > 0.0 && gamma <= 0.5) {
        return Err(invalid(format!("gamma must lie in (0, 1/2], got {gamma}")));
    }
    let kmax = (gamma * n as f64 + 1e-9).floor() as u64;
    let mut c = BigUint::one();
    let mut sum = BigUint::one();
    for k in 0..kmax {
        c = c * (n - k) / (k + 1);
        sum += &c;
    }
    let log2_bound = n as f64 * binary_entropy(gamma)?;
    // sum < 2^bits; exact when bits <= ⌊log2_bound⌋.
    let log2_sum = log2_big(&sum);
    let holds = (sum.bits() as f64) <= log2_bound.floor() || log2_sum <= log2_bound;
    Ok(TailCheck { n, gamma, kmax, sum, log2_sum, log2_bound, holds })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogBinomialCheck {
    pub n: u64,
    pub sum: f64,
    pub half_square: f64,
    /// `|sum - n²/2| / (n ln n)`; absent for `n = 1`.
    pub deviation: Option<f64>,
}

/// `Σ_{k=0}^{n} ln C(n, k)` against `n²/2`.
pub fn log_binomial_sum_check(n: u64) -> Result<LogBinomialCheck> {
    if n == 0 || n > 100_000 {
        return Err(invalid(format!("n must lie in 1..=100000, got {n}")));
    }
    let sum = log_binomial_row_sum(n);
    let half_square = 0.5 * (n as f64).powi(2);
    let scale = n as f64 * (n as f64).ln();
    let deviation = (!scale.is_zero()).then(|| (sum - half_square).abs() / scale);
    Ok(LogBinomialCheck { n, sum, half_square, deviation })
}
