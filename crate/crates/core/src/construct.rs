//! Sparse smooth integers `(2^k + 1)^ℓ` and the balanced product
//! `(2^k₁ + 1)(2^k₂ - 1)`, with `k` an odd primorial.
//!
//! Logarithms are natural unless written `log₂`: `ℓ = ⌊α·ln 2·k⌋` keeps
//! `ℓ² ∼ α·ln N`.

use std::f64::consts::LN_2;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::arith::{ln_big, odd_primorial, Effort};
use crate::cyclotomic::{fermat_like_factor, mersenne_like_factor};
use crate::digits::digit_profile;
use crate::error::{invalid, Error, Result};

/// Default ceiling on `r` for full powering (`r = 6` already gives `~1.6·10⁸` bits).
pub const DEFAULT_MAX_R: usize = 6;
/// Largest `ℓ` for which the subadditivity ceiling is always taken from the exact product.
const EXACT_CEILING_ELL: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstructionKind {
    Theorem2,
    Theorem3,
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstructOptions {
    pub effort: Effort,
    /// Attempt to factor `2^k ± 1`; off means `smoothness_complete = false`.
    pub certify: bool,
    pub max_r: usize,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self { effort: Effort::default(), certify: true, max_r: DEFAULT_MAX_R }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionReport {
    pub kind: ConstructionKind,
    pub alpha: Option<f64>,
    pub r: usize,
    #[serde(serialize_with = "crate::arith::serialize_decimal")]
    pub k: BigUint,
    #[serde(serialize_with = "crate::arith::serialize_opt_decimal")]
    pub k2: Option<BigUint>,
    /// Exponent `ℓ`; absent for the balanced product.
    pub ell: Option<u64>,
    pub n_bits: u64,
    pub ones: u64,
    pub zeros: u64,
    /// Main-term digit bound at `n_bits`.
    pub sparsity_bound: f64,
    /// `⌈log₂ ∏_j C(ℓ, j)⌉ + ℓ + 1`.
    pub subadditivity_ceiling: Option<u64>,
    #[serde(serialize_with = "crate::arith::serialize_opt_decimal")]
    pub largest_prime_found: Option<BigUint>,
    pub smoothness_complete: bool,
    /// `ln Y` for the construction's smoothness parameter; absent when `ln ln ln N <= 0`.
    pub y_target: Option<f64>,
    #[serde(skip)]
    pub value: BigUint,
}

impl ConstructionReport {
    pub fn degenerate(&self) -> bool {
        self.ell == Some(1)
    }

    pub fn within_ceiling(&self) -> Option<bool> {
        self.subadditivity_ceiling.map(|c| self.ones <= c)
    }
}

fn primorial_k(r: usize, options: &ConstructOptions) -> Result<(BigUint, u64)> {
    if r < 2 {
        return Err(invalid(format!("r must be at least 2, got {r}")));
    }
    if r > options.max_r {
        return Err(Error::GuardExceeded { what: "primorial length r", limit: options.max_r.to_string() });
    }
    let p = odd_primorial(r)?;
    let small = p.k.to_u64().ok_or(Error::Overflow("odd primorial exceeds u64"))?;
    Ok((p.k, small))
}

fn fermat_base(k: u64) -> BigUint {
    (BigUint::one() << k) + 1u32
}

fn lll(ln_n: f64) -> f64 {
    ln_n.ln().ln()
}

pub fn construct_theorem2(alpha: f64, r: usize, options: &ConstructOptions) -> Result<ConstructionReport> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(invalid(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    let (k_big, k) = primorial_k(r, options)?;
    let ell = (alpha * LN_2 * k as f64).floor() as u64;
    if ell < 1 {
        return Err(invalid(format!("ℓ = ⌊α·ln 2·k⌋ = 0 for alpha = {alpha}, k = {k}")));
    }
    power_report(ConstructionKind::Theorem2, alpha, r, k_big, k, ell, options)
}

pub fn construct_theorem3(alpha: f64, r: usize, options: &ConstructOptions) -> Result<ConstructionReport> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let (k_big, k) = primorial_k(r, options)?;
    let beta = alpha / (2.0 - alpha);
    let ell = floor_power(k, beta)?;
    power_report(ConstructionKind::Theorem3, alpha, r, k_big, k, ell, options)
}

/// `⌊k^β⌋`, settled exactly when `k^β` lands within rounding of an integer
/// and `β = p/q` with small `q`.
fn floor_power(k: u64, beta: f64) -> Result<u64> {
    let approx = (k as f64).powf(beta);
    let nearest = approx.round();
    if (approx - nearest).abs() > 1e-9 * approx.max(1.0) {
        return Ok(approx.floor() as u64);
    }
    let Some((p, q)) = (1u32..=64).find_map(|q| {
        let p = (beta * f64::from(q)).round();
        ((beta * f64::from(q) - p).abs() < 1e-12).then_some((p as u32, q))
    }) else {
        return Ok(approx.floor() as u64);
    };
    // ℓ = ⌊k^(p/q)⌋ is the largest ℓ with ℓ^q <= k^p.
    let target = BigUint::from(k).pow(p);
    let candidate = nearest as u64;
    Ok(if BigUint::from(candidate).pow(q) <= target { candidate } else { candidate - 1 })
}

fn power_report(
    kind: ConstructionKind,
    alpha: f64,
    r: usize,
    k_big: BigUint,
    k: u64,
    ell: u64,
    options: &ConstructOptions,
) -> Result<ConstructionReport> {
    let ell_u32 = u32::try_from(ell).map_err(|_| Error::Overflow("ℓ exceeds u32"))?;
    let value = fermat_base(k).pow(ell_u32);
    let profile = digit_profile(&value)?;
    let n = profile.bit_length as f64;
    let ln_n = ln_big(&value);
    let (sparsity_bound, y_target) = match kind {
        ConstructionKind::Theorem2 => {
            let l3 = lll(ln_n);
            (0.5 * alpha * n, (l3 > 0.0).then(|| alpha.powf(-0.5) * ln_n.sqrt() / l3))
        }
        _ => {
            let l3 = lll(ln_n);
            (
                n.powf(alpha) / (2.0 * LN_2),
                (l3 > 0.0).then(|| LN_2.powf(alpha / 2.0) * ln_n.powf(1.0 - alpha / 2.0) / l3),
            )
        }
    };
    let (largest_prime_found, smoothness_complete) = if options.certify {
        let f = fermat_like_factor(k, &options.effort)?;
        (f.merged.largest_prime().cloned(), f.merged.complete)
    } else {
        (None, false)
    };
    Ok(ConstructionReport {
        kind,
        alpha: Some(alpha),
        r,
        k: k_big,
        k2: None,
        ell: Some(ell),
        n_bits: profile.bit_length,
        ones: profile.ones,
        zeros: profile.zeros,
        sparsity_bound,
        subadditivity_ceiling: Some(subadditivity_ceiling(ell)?),
        largest_prime_found,
        smoothness_complete,
        y_target,
        value,
    })
}

pub fn construct_balanced(r: usize, options: &ConstructOptions) -> Result<ConstructionReport> {
    let (k_big, k1) = primorial_k(r, options)?;
    let k2 = k1 / 3;
    let value = fermat_base(k1) * ((BigUint::one() << k2) - 1u32);
    let profile = digit_profile(&value)?;
    if profile.bit_length != 4 * k2 || profile.ones != 2 * k2 {
        return Err(Error::Inexact(format!(
            "balanced product for r = {r} has {} bits and {} ones, expected {} and {}",
            profile.bit_length,
            profile.ones,
            4 * k2,
            2 * k2
        )));
    }
    let ln_n = ln_big(&value);
    let l3 = lll(ln_n);
    let (largest_prime_found, smoothness_complete) = if options.certify {
        let plus = fermat_like_factor(k1, &options.effort)?;
        let minus = mersenne_like_factor(k2, &options.effort)?;
        let merged = plus.merged.merge(&minus.merged);
        (merged.largest_prime().cloned(), merged.complete)
    } else {
        (None, false)
    };
    Ok(ConstructionReport {
        kind: ConstructionKind::Balanced,
        alpha: None,
        r,
        k: k_big,
        k2: Some(BigUint::from(k2)),
        ell: None,
        n_bits: profile.bit_length,
        ones: profile.ones,
        zeros: profile.zeros,
        sparsity_bound: profile.bit_length as f64 / 2.0,
        subadditivity_ceiling: None,
        largest_prime_found,
        smoothness_complete,
        y_target: (l3 > 0.0).then(|| 3.0 * ln_n / (4.0 * l3)),
        value,
    })
}

/// `ln(largest prime found) / ln Y`.
pub fn smoothness_exponent(report: &ConstructionReport) -> Result<f64> {
    if !report.smoothness_complete {
        return Err(Error::Incomplete("report has no complete smoothness certificate".into()));
    }
    let p = report
        .largest_prime_found
        .as_ref()
        .ok_or_else(|| Error::Incomplete("no prime factor recorded".into()))?;
    let ln_y = report
        .y_target
        .ok_or_else(|| invalid("ln Y is undefined at this size (ln ln ln N <= 0)"))?;
    Ok(ln_big(p) / ln_y)
}

/// `Σ_{j=0}^{ℓ} ln C(ℓ, j) = Σ_{i=1}^{ℓ} (2i - ℓ - 1) ln i`, compensated summation.
pub fn log_binomial_row_sum(ell: u64) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for i in 2..=ell {
        let term = (2.0 * i as f64 - ell as f64 - 1.0) * (i as f64).ln() - carry;
        let next = sum + term;
        carry = (next - sum) - term;
        sum = next;
    }
    sum
}

/// `∏_{j=0}^{ℓ} C(ℓ, j)` exactly.
pub fn binomial_row_product(ell: u64) -> BigUint {
    let mut row = Vec::with_capacity(ell as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for j in 0..ell {
        c = c * (ell - j) / (j + 1);
        row.push(c.clone());
    }
    product_tree(&row)
}

fn product_tree(items: &[BigUint]) -> BigUint {
    match items.len() {
        0 => BigUint::one(),
        1 => items[0].clone(),
        len => product_tree(&items[..len / 2]) * product_tree(&items[len / 2..]),
    }
}

/// `⌈log₂ ∏_j C(ℓ, j)⌉ + ℓ + 1`.
pub fn subadditivity_ceiling(ell: u64) -> Result<u64> {
    if ell == 0 {
        return Err(invalid("ℓ must be positive"));
    }
    let exact = |ell: u64| {
        let p = binomial_row_product(ell);
        // ⌈log₂ P⌉ = bits(P - 1) for P >= 1.
        (p - 1u32).bits()
    };
    let log_part = if ell <= EXACT_CEILING_ELL {
        exact(ell)
    } else {
        let v = log_binomial_row_sum(ell) / LN_2;
        if (v - v.round()).abs() < 1e-4 { exact(ell) } else { v.ceil() as u64 }
    };
    Ok(log_part + ell + 1)
}

/// `s₂((2^k + 1)^ℓ)` read off the binomial expansion, when the terms
/// `C(ℓ, j)·2^(kj)` occupy disjoint bit ranges (`bits(C(ℓ, ⌊ℓ/2⌋)) <= k`).
pub fn binomial_digit_sum(k: u64, ell: u64) -> Option<u64> {
    let mut c = BigUint::one();
    let mut total = 1u64;
    for j in 0..ell {
        c = c * (ell - j) / (j + 1);
        if c.bits() > k {
            return None;
        }
        total += c.count_ones();
    }
    Some(total)
}

/// Recompute `N` from the report's parameters.
pub fn reconstruct(report: &ConstructionReport) -> Result<BigUint> {
    let k = report.k.to_u64().ok_or(Error::Overflow("k exceeds u64"))?;
    match (report.kind, report.ell, &report.k2) {
        (ConstructionKind::Balanced, _, Some(k2)) => {
            let k2 = k2.to_u64().ok_or(Error::Overflow("k2 exceeds u64"))?;
            Ok(fermat_base(k) * ((BigUint::one() << k2) - 1u32))
        }
        (_, Some(ell), _) => {
            let ell = u32::try_from(ell).map_err(|_| Error::Overflow("ℓ exceeds u32"))?;
            Ok(fermat_base(k).pow(ell))
        }
        _ => Err(invalid("report is missing ℓ or k₂")),
    }
}

/// Whether `n` is `2^k + 1` raised to some power (used to sanity-check reports).
pub fn is_fermat_power(n: &BigUint, k: u64) -> bool {
    let base = fermat_base(k);
    let mut rest = n.clone();
    while rest > BigUint::one() {
        let (q, r) = rest.div_rem(&base);
        if r != BigUint::ZERO {
            return false;
        }
        rest = q;
    }
    rest == BigUint::one()
}
