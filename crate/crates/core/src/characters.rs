//! Dirichlet characters modulo `2^j` with exact values.
//!
//! For `j >= 3` every odd `u` is uniquely `u ≡ (-1)^ε · 5^ind (mod 2^j)` with
//! `ε ∈ {0, 1}` and `0 <= ind < 2^(j-2)`. The character with index `(a, b)`
//! sends `u` to `ζ^(a·ε·2^(j-2) + 2·b·ind)`, `ζ = e(1/2^(j-1))`, so values
//! are tracked as exponents and sums live in `ℤ[ζ]` until rendered.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::smoothcount::enumerate_smooth;

/// Largest modulus exponent handled by the character engine.
pub const MAX_MODULUS_EXP: u32 = 62;
/// Largest bit length `n` accepted by [`count_prescribed_products`].
pub const COUNT_GUARD_N: u32 = 40;
/// Largest `n0` accepted by [`count_prescribed_products`] (the residue
/// convolution is quadratic in `2^n0`).
pub const COUNT_GUARD_N0: u32 = 14;

fn check_exp(j: u32) -> Result<()> {
    if !(3..=MAX_MODULUS_EXP).contains(&j) {
        return Err(invalid(format!("modulus exponent j must lie in 3..={MAX_MODULUS_EXP}, got {j}")));
    }
    Ok(())
}

#[inline]
fn mask(j: u32) -> u64 {
    (1u64 << j) - 1
}

/// Inverse of odd `w` modulo `2^j` (Newton iteration, each step doubles the valid bits).
pub fn inverse_mod_pow2(w: u64, j: u32) -> Result<u64> {
    if w % 2 == 0 {
        return Err(invalid(format!("{w} is not invertible modulo 2^{j}")));
    }
    let mut x = w; // w·w ≡ 1 (mod 8)
    for _ in 0..6 {
        x = x.wrapping_mul(2u64.wrapping_sub(w.wrapping_mul(x)));
    }
    Ok(x & mask(j.min(64)))
}

fn pow_mod_pow2(mut base: u64, mut exp: u64, j: u32) -> u64 {
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc.wrapping_mul(base);
        }
        base = base.wrapping_mul(base);
        exp >>= 1;
    }
    acc & mask(j)
}

/// `u ≡ (-1)^epsilon · 5^ind (mod 2^j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UnitLog {
    pub epsilon: u8,
    pub ind: u64,
}

/// Decompose an odd `u` (reduced modulo `2^j` first).
///
/// `ind` is found one bit at a time: after the low `i` bits are fixed,
/// `h = v·5^(-ind)` lies in the subgroup generated by `5^(2^i)`, and bit `i`
/// is set exactly when `h^(2^(j-3-i)) ≠ 1`.
pub fn unit_decompose(u: u64, j: u32) -> Result<UnitLog> {
    check_exp(j)?;
    if u % 2 == 0 {
        return Err(invalid(format!("{u} is even; only units have a (-1, 5) decomposition")));
    }
    let m = mask(j);
    let u = u & m;
    let epsilon = ((u >> 1) & 1) as u8;
    let v = if epsilon == 1 { u.wrapping_neg() & m } else { u };
    let five_inv = inverse_mod_pow2(5, j)?;
    let mut ind = 0u64;
    let mut h = v;
    let mut step_inv = five_inv; // 5^(-2^i)
    for i in 0..(j - 2) {
        let probe = pow_mod_pow2(h, 1u64 << (j - 3 - i), j);
        if probe != 1 {
            ind |= 1 << i;
            h = h.wrapping_mul(step_inv) & m;
        }
        step_inv = step_inv.wrapping_mul(step_inv) & m;
    }
    debug_assert_eq!(h, 1);
    Ok(UnitLog { epsilon, ind })
}

/// Character `(sign_part, power_part)` modulo `2^modulus_exp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CharacterIndex {
    pub modulus_exp: u32,
    pub sign_part: u8,
    pub power_part: u64,
}

impl CharacterIndex {
    pub fn new(modulus_exp: u32, sign_part: u8, power_part: u64) -> Result<Self> {
        check_exp(modulus_exp)?;
        if sign_part > 1 || power_part >= 1 << (modulus_exp - 2) {
            return Err(invalid(format!(
                "character index ({sign_part}, {power_part}) out of range for modulus 2^{modulus_exp}"
            )));
        }
        Ok(Self { modulus_exp, sign_part, power_part })
    }

    pub fn principal(modulus_exp: u32) -> Result<Self> {
        Self::new(modulus_exp, 0, 0)
    }

    /// All `2^(j-1)` characters, principal first.
    pub fn all(modulus_exp: u32) -> Result<impl Iterator<Item = Self>> {
        check_exp(modulus_exp)?;
        let half = 1u64 << (modulus_exp - 2);
        Ok((0..2u8).flat_map(move |a| {
            (0..half).map(move |b| Self { modulus_exp, sign_part: a, power_part: b })
        }))
    }

    pub fn is_principal(&self) -> bool {
        self.sign_part == 0 && self.power_part == 0
    }

    /// Single integer label `sign_part · 2^(j-2) + power_part`.
    pub fn flat(&self) -> u64 {
        (u64::from(self.sign_part) << (self.modulus_exp - 2)) + self.power_part
    }

    /// `log₂` of the root-of-unity order used for values.
    pub fn order_log2(&self) -> u32 {
        self.modulus_exp - 1
    }

    /// Exponent of `ζ` for a decomposed unit.
    pub fn exponent(&self, log: UnitLog) -> u64 {
        let j = self.modulus_exp;
        let order_mask = (1u64 << (j - 1)) - 1;
        let sign = (u64::from(self.sign_part) * u64::from(log.epsilon)) << (j - 2);
        let power = self.power_part.wrapping_mul(log.ind).wrapping_mul(2);
        sign.wrapping_add(power) & order_mask
    }
}

/// Exact character value: zero, or `ζ^exp` with `ζ` a primitive `2^order_log2`-th root of unity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CharValue {
    Zero,
    Root { exp: u64, order_log2: u32 },
}

impl std::ops::Mul for CharValue {
    type Output = CharValue;

    fn mul(self, other: CharValue) -> CharValue {
        match (self, other) {
            (CharValue::Root { exp: a, order_log2 }, CharValue::Root { exp: b, order_log2: o2 }) => {
                debug_assert_eq!(order_log2, o2);
                CharValue::Root { exp: (a + b) & ((1 << order_log2) - 1), order_log2 }
            }
            _ => CharValue::Zero,
        }
    }
}

impl CharValue {
    pub fn conj(self) -> CharValue {
        match self {
            CharValue::Root { exp, order_log2 } => {
                CharValue::Root { exp: exp.wrapping_neg() & ((1 << order_log2) - 1), order_log2 }
            }
            CharValue::Zero => CharValue::Zero,
        }
    }

    pub fn is_one(self) -> bool {
        matches!(self, CharValue::Root { exp: 0, .. })
    }

    pub fn to_complex(self) -> (f64, f64) {
        match self {
            CharValue::Zero => (0.0, 0.0),
            CharValue::Root { exp, order_log2 } => {
                let angle = std::f64::consts::TAU * exp as f64 / (1u64 << order_log2) as f64;
                (angle.cos(), angle.sin())
            }
        }
    }
}

pub fn char_eval(chi: &CharacterIndex, u: u64) -> CharValue {
    if u % 2 == 0 {
        return CharValue::Zero;
    }
    let log = unit_decompose(u, chi.modulus_exp).expect("odd input and validated modulus");
    CharValue::Root { exp: chi.exponent(log), order_log2: chi.order_log2() }
}

pub fn char_eval_big(chi: &CharacterIndex, u: &BigUint) -> CharValue {
    let low = (u & BigUint::from(mask(chi.modulus_exp))).to_u64().expect("masked to 64 bits");
    char_eval(chi, low)
}

/// Exact element of `ℤ[ζ]`, `ζ` a primitive `2^t`-th root of unity (`t >= 1`).
///
/// Stored in the power basis `1, ζ, …, ζ^(2^(t-1) - 1)` using `ζ^(2^(t-1)) = -1`,
/// which is a ℤ-basis, so equality and zero tests are coefficient-wise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootSum {
    order_log2: u32,
    coeffs: Vec<i128>,
}

impl RootSum {
    pub fn zero(order_log2: u32) -> Self {
        assert!((1..40).contains(&order_log2));
        Self { order_log2, coeffs: vec![0; 1 << (order_log2 - 1)] }
    }

    fn half(&self) -> u64 {
        self.coeffs.len() as u64
    }

    /// Add `count · ζ^exp`.
    pub fn add_root(&mut self, exp: u64, count: i128) {
        let half = self.half();
        let e = exp % (2 * half);
        if e < half {
            self.coeffs[e as usize] += count;
        } else {
            self.coeffs[(e - half) as usize] -= count;
        }
    }

    pub fn add_value(&mut self, v: CharValue, count: i128) {
        if let CharValue::Root { exp, order_log2 } = v {
            debug_assert_eq!(order_log2, self.order_log2);
            self.add_root(exp, count);
        }
    }

    /// The rational integer this element equals, if it is one.
    pub fn as_integer(&self) -> Option<i128> {
        self.coeffs[1..].iter().all(|&c| c == 0).then_some(self.coeffs[0])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn to_complex(&self) -> (f64, f64) {
        let full = (self.half() * 2) as f64;
        self.coeffs.iter().enumerate().filter(|(_, &c)| c != 0).fold((0.0, 0.0), |(re, im), (e, &c)| {
            let angle = std::f64::consts::TAU * e as f64 / full;
            (re + c as f64 * angle.cos(), im + c as f64 * angle.sin())
        })
    }
}

/// `Σ_χ χ(u)` over all characters modulo `2^j`, summed exactly; equals
/// `2^(j-1)` when `u ≡ 1 (mod 2^j)` and 0 otherwise.
pub fn orthogonality_sum(u: u64, j: u32) -> Result<i128> {
    check_exp(j)?;
    if u % 2 == 0 {
        return Err(invalid(format!("orthogonality sum is taken over units; {u} is even")));
    }
    let log = unit_decompose(u, j)?;
    let mut acc = RootSum::zero(j - 1);
    for chi in CharacterIndex::all(j)? {
        acc.add_root(chi.exponent(log), 1);
    }
    acc.as_integer()
        .ok_or_else(|| Error::Inexact(format!("Σ_χ χ({u}) mod 2^{j} is not a rational integer")))
}

/// `Σ_{k < 2^(n0-m)} χ(2^(n0-m)·s + k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShortSum {
    pub character: CharacterIndex,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    /// Set when the exact sum is a rational integer.
    pub exact_integer: Option<i128>,
}

fn check_short_params(n0: u32, m: u32, s: u64) -> Result<()> {
    check_exp(n0)?;
    if m >= n0 {
        return Err(invalid(format!("need m < n0, got m = {m}, n0 = {n0}")));
    }
    if m < 64 && s >= 1u64 << m {
        return Err(invalid(format!("pattern value {s} does not fit in {m} bits")));
    }
    Ok(())
}

/// Unit logs of the odd arguments `2^(n0-m)·s + k`, `0 <= k < 2^(n0-m)`.
fn interval_logs(n0: u32, m: u32, s: u64) -> Vec<UnitLog> {
    let len = 1u64 << (n0 - m);
    let start = s << (n0 - m);
    (start..start + len)
        .filter(|t| t % 2 == 1)
        .map(|t| unit_decompose(t, n0).expect("odd argument"))
        .collect()
}

fn sum_over_logs(chi: &CharacterIndex, logs: &[UnitLog]) -> ShortSum {
    let mut acc = RootSum::zero(chi.order_log2());
    for &log in logs {
        acc.add_root(chi.exponent(log), 1);
    }
    let (re, im) = acc.to_complex();
    ShortSum { character: *chi, re, im, abs: re.hypot(im), exact_integer: acc.as_integer() }
}

pub fn short_char_sum(chi: &CharacterIndex, s: u64, n0: u32, m: u32) -> Result<ShortSum> {
    if chi.modulus_exp != n0 {
        return Err(invalid("character modulus must be 2^n0"));
    }
    check_short_params(n0, m, s)?;
    Ok(sum_over_logs(chi, &interval_logs(n0, m, s)))
}

/// One row of a short-sum scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    /// `sign_part · 2^(n0-2) + power_part`.
    pub character: u64,
    pub abs_sum: f64,
    /// `2^(n0-m) / n0²`.
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShortSumScan {
    pub n0: u32,
    pub m: u32,
    pub s: u64,
    /// Exact principal-character sum (the number of odd arguments).
    pub principal_sum: i128,
    pub max_ratio: f64,
    pub max_ratio_character: u64,
    /// Whether every non-principal full-period sum modulo `2^n0` is exactly 0.
    pub full_period_vanishes: bool,
    pub rows: Vec<ScanRow>,
}

/// Short sums for every character modulo `2^n0`, in character order.
pub fn scan_short_sums(n0: u32, m: u32, s: u64) -> Result<ShortSumScan> {
    check_short_params(n0, m, s)?;
    let logs = interval_logs(n0, m, s);
    let full_logs = interval_logs(n0, 0, 0);
    let bound = (1u64 << (n0 - m)) as f64 / f64::from(n0 * n0);
    let chars: Vec<CharacterIndex> = CharacterIndex::all(n0)?.collect();
    let results: Vec<(ShortSum, bool)> = chars
        .par_iter()
        .map(|chi| {
            let short = sum_over_logs(chi, &logs);
            let full_zero = chi.is_principal() || {
                let mut acc = RootSum::zero(chi.order_log2());
                for &log in &full_logs {
                    acc.add_root(chi.exponent(log), 1);
                }
                acc.is_zero()
            };
            (short, full_zero)
        })
        .collect();
    let principal_sum = results[0]
        .0
        .exact_integer
        .ok_or_else(|| Error::Inexact("principal sum is not an integer".into()))?;
    let mut max_ratio = 0.0;
    let mut max_ratio_character = 0;
    let rows: Vec<ScanRow> = results
        .iter()
        .map(|(sum, _)| {
            let ratio = sum.abs / bound;
            if !sum.character.is_principal() && ratio > max_ratio {
                max_ratio = ratio;
                max_ratio_character = sum.character.flat();
            }
            ScanRow { character: sum.character.flat(), abs_sum: sum.abs, bound, ratio }
        })
        .collect();
    Ok(ShortSumScan {
        n0,
        m,
        s,
        principal_sum,
        max_ratio,
        max_ratio_character,
        full_period_vanishes: results.iter().all(|(_, z)| *z),
        rows,
    })
}

/// Parse a bit string such as `"010"`; the first character is the most significant bit.
pub fn parse_pattern(sigma: &str) -> Result<u64> {
    if sigma.len() > 63 {
        return Err(invalid("bit pattern longer than 63 bits"));
    }
    sigma.chars().try_fold(0u64, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        other => Err(invalid(format!("bit pattern may only contain 0 and 1, found {other:?}"))),
    })
}

/// The set `W` of odd `⌊n^A⌋`-smooth `w` with `2^(n-1) < w² <= 2^n`.
pub fn half_length_smooth_set(n: u32, a_param: f64) -> Result<Vec<u64>> {
    if n == 0 || n > COUNT_GUARD_N {
        return Err(Error::GuardExceeded { what: "bit length n", limit: COUNT_GUARD_N.to_string() });
    }
    if !(a_param > 1.0) {
        return Err(invalid(format!("A must exceed 1, got {a_param}")));
    }
    let y = (f64::from(n)).powf(a_param).floor() as u64;
    let lo = (1u64 << (n - 1)).isqrt(); // w > sqrt(2^(n-1)) ⟺ w > isqrt(2^(n-1))
    let hi = (1u64 << n).isqrt();
    if lo >= hi {
        return Ok(Vec::new());
    }
    Ok(enumerate_smooth(lo, hi, y.max(2), true)?.collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub k: u64,
    pub brute_force: u64,
    pub via_characters: f64,
    pub relative_error: f64,
}

/// Exact counts `T(k)` of pairs `(w₁, w₂) ∈ W²` with
/// `w₁w₂ ≡ 2^(n0-m)·s + k (mod 2^n0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrescribedCount {
    pub n: u32,
    pub a_param: f64,
    pub y: u64,
    pub n0: u32,
    pub m: u32,
    pub sigma: String,
    pub s: u64,
    pub w_count: u64,
    pub counts: Vec<u64>,
    pub total: u64,
    /// `(#W)² / 2^(m-1)`, the principal-character term summed over all `k`.
    pub principal_term: f64,
    /// `(#W)² / 2^m`: the same term restricted to the odd targets that can occur.
    pub odd_target_term: f64,
    pub identity_checks: Vec<IdentityCheck>,
}

impl PrescribedCount {
    pub fn max_identity_error(&self) -> f64 {
        self.identity_checks.iter().map(|c| c.relative_error).fold(0.0, f64::max)
    }
}

/// Brute-force `T(k)` for the set `W`, plus the character-sum expression
/// `T(k) = 2^(1-n0) Σ_χ χ(t) · conj(Σ_w χ(w))²` evaluated at `samples`
/// seeded-random `k` values.
pub fn count_prescribed_products(
    n: u32,
    a_param: f64,
    n0: u32,
    m: u32,
    sigma: &str,
    samples: usize,
    seed: u64,
) -> Result<PrescribedCount> {
    check_exp(n0)?;
    if n0 > COUNT_GUARD_N0 {
        return Err(Error::GuardExceeded { what: "modulus exponent n0", limit: COUNT_GUARD_N0.to_string() });
    }
    if sigma.len() as u32 != m || m > n0 {
        return Err(invalid(format!("pattern {sigma:?} must have length m = {m} <= n0 = {n0}")));
    }
    let s = parse_pattern(sigma)?;
    let w = half_length_smooth_set(n, a_param)?;
    let counts = count_products(&w, n0, m, s);
    let y = (f64::from(n)).powf(a_param).floor() as u64;
    let w_count = w.len() as u64;
    let sq = (w_count as f64).powi(2);

    let len = counts.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ks: Vec<u64> = sample(&mut rng, len, samples.min(len)).into_iter().map(|k| k as u64).collect();
    ks.sort_unstable();
    let identity_checks = if ks.is_empty() {
        Vec::new()
    } else {
        character_expression(&w, n0, m, s, &ks)?
            .into_iter()
            .zip(&ks)
            .map(|(value, &k)| {
                let brute = counts[k as usize];
                IdentityCheck {
                    k,
                    brute_force: brute,
                    via_characters: value,
                    relative_error: (value - brute as f64).abs() / (brute as f64).max(1.0),
                }
            })
            .collect()
    };

    Ok(PrescribedCount {
        n,
        a_param,
        y,
        n0,
        m,
        sigma: sigma.to_string(),
        s,
        w_count,
        total: counts.iter().sum(),
        counts,
        principal_term: sq / 2f64.powi(m as i32 - 1),
        odd_target_term: sq / 2f64.powi(m as i32),
        identity_checks,
    })
}

/// `T(k)` by convolving the residue histogram of `W` with itself.
fn count_products(w: &[u64], n0: u32, m: u32, s: u64) -> Vec<u64> {
    let modulus_mask = mask(n0);
    let low_bits = n0 - m;
    let mut hist = vec![0u64; 1 << n0];
    for &x in w {
        hist[(x & modulus_mask) as usize] += 1;
    }
    let occupied: Vec<(u64, u64)> = hist
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(r, &c)| (r as u64, c))
        .collect();
    let mut counts = vec![0u64; 1 << low_bits];
    for &(r1, c1) in &occupied {
        for &(r2, c2) in &occupied {
            let t = r1.wrapping_mul(r2) & modulus_mask;
            if t >> low_bits == s {
                counts[(t & ((1u64 << low_bits) - 1)) as usize] += c1 * c2;
            }
        }
    }
    counts
}

fn character_expression(w: &[u64], n0: u32, m: u32, s: u64, ks: &[u64]) -> Result<Vec<f64>> {
    let logs: Vec<UnitLog> = w.iter().map(|&x| unit_decompose(x, n0)).collect::<Result<_>>()?;
    let targets: Vec<u64> = ks.iter().map(|&k| (s << (n0 - m)) + k).collect();
    let target_logs: Vec<Option<UnitLog>> = targets
        .iter()
        .map(|&t| (t % 2 == 1).then(|| unit_decompose(t, n0)).transpose())
        .collect::<Result<_>>()?;
    let chars: Vec<CharacterIndex> = CharacterIndex::all(n0)?.collect();
    let per_char: Vec<Vec<f64>> = chars
        .par_iter()
        .map(|chi| {
            let mut acc = RootSum::zero(chi.order_log2());
            for &log in &logs {
                acc.add_root(chi.exponent(log), 1);
            }
            let (re, im) = acc.to_complex();
            // conj(S)² = (re² - im²) - 2·re·im·i
            let (sq_re, sq_im) = (re * re - im * im, -2.0 * re * im);
            target_logs
                .iter()
                .map(|log| match log {
                    None => 0.0,
                    Some(log) => {
                        let (c_re, c_im) = CharValue::Root { exp: chi.exponent(*log), order_log2: chi.order_log2() }
                            .to_complex();
                        c_re * sq_re - c_im * sq_im
                    }
                })
                .collect()
        })
        .collect();
    let scale = 2f64.powi(n0 as i32 - 1);
    Ok((0..ks.len())
        .map(|i| per_char.iter().map(|v| v[i]).sum::<f64>() / scale)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mul_mod(a: u64, b: u64, j: u32) -> u64 {
        a.wrapping_mul(b) & mask(j)
    }

    #[test]
    fn decomposition_examples() {
        assert_eq!(unit_decompose(1, 10).unwrap(), UnitLog { epsilon: 0, ind: 0 });
        assert_eq!(unit_decompose(5, 5).unwrap(), UnitLog { epsilon: 0, ind: 1 });
        for j in 3..=20 {
            assert_eq!(unit_decompose((1 << j) - 1, j).unwrap(), UnitLog { epsilon: 1, ind: 0 });
        }
        assert!(unit_decompose(6, 5).is_err());
        assert!(unit_decompose(3, 2).is_err());
    }

    #[test]
    fn decomposition_reconstructs_unit() {
        for j in 3..=12 {
            for u in (1..1u64 << j).step_by(2) {
                let log = unit_decompose(u, j).unwrap();
                assert!(log.ind < 1 << (j - 2));
                let mut v = pow_mod_pow2(5, log.ind, j);
                if log.epsilon == 1 {
                    v = v.wrapping_neg() & mask(j);
                }
                assert_eq!(v, u, "j = {j}");
            }
        }
        let log = unit_decompose(0x1234_5678_9abc_def1, 62).unwrap();
        let mut v = pow_mod_pow2(5, log.ind, 62);
        if log.epsilon == 1 {
            v = v.wrapping_neg() & mask(62);
        }
        assert_eq!(v, 0x1234_5678_9abc_def1 & mask(62));
    }

    #[test]
    fn inverses() {
        for j in [3u32, 8, 14, 31, 62] {
            for w in (1..2000u64).step_by(2) {
                assert_eq!(mul_mod(w, inverse_mod_pow2(w, j).unwrap(), j), 1);
            }
        }
        assert!(inverse_mod_pow2(4, 8).is_err());
    }

    #[test]
    fn principal_and_unit_values() {
        for j in 3..=9 {
            let chi0 = CharacterIndex::principal(j).unwrap();
            for u in (1..1u64 << j).step_by(2) {
                assert!(char_eval(&chi0, u).is_one());
            }
            for chi in CharacterIndex::all(j).unwrap() {
                assert!(char_eval(&chi, 1).is_one());
                assert_eq!(char_eval(&chi, 2), CharValue::Zero);
            }
        }
    }

    #[test]
    fn character_table_mod_eight() {
        // Units {1, 3, 5, 7} form the Klein group: all values are ±1.
        let table: Vec<Vec<(f64, f64)>> = CharacterIndex::all(3)
            .unwrap()
            .map(|chi| [1u64, 3, 5, 7].iter().map(|&u| char_eval(&chi, u).to_complex()).collect())
            .collect();
        let expected = [[1.0, 1.0, 1.0, 1.0], [1.0, -1.0, -1.0, 1.0], [1.0, -1.0, 1.0, -1.0], [1.0, 1.0, -1.0, -1.0]];
        assert_eq!(table.len(), 4);
        for (row, want) in table.iter().zip(expected) {
            for (&(re, im), w) in row.iter().zip(want) {
                assert!((re - w).abs() < 1e-15 && im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn multiplicative_exhaustively() {
        for j in 3..=8 {
            for chi in CharacterIndex::all(j).unwrap() {
                for u in (1..1u64 << j).step_by(2) {
                    for v in (1..1u64 << j).step_by(2) {
                        let lhs = char_eval(&chi, mul_mod(u, v, j));
                        assert_eq!(lhs, char_eval(&chi, u) * char_eval(&chi, v));
                    }
                }
            }
        }
    }

    #[test]
    fn distinct_characters_differ() {
        for j in 3..=7 {
            let tables: std::collections::HashSet<Vec<u64>> = CharacterIndex::all(j)
                .unwrap()
                .map(|chi| {
                    (1..1u64 << j)
                        .step_by(2)
                        .map(|u| match char_eval(&chi, u) {
                            CharValue::Root { exp, .. } => exp,
                            CharValue::Zero => u64::MAX,
                        })
                        .collect()
                })
                .collect();
            assert_eq!(tables.len(), 1 << (j - 1));
        }
    }

    #[test]
    fn conjugate_is_value_at_inverse() {
        for j in 3..=10 {
            for chi in CharacterIndex::all(j).unwrap().step_by(3) {
                for w in (1..1u64 << j).step_by(2) {
                    let inv = inverse_mod_pow2(w, j).unwrap();
                    assert_eq!(char_eval(&chi, inv), char_eval(&chi, w).conj());
                }
            }
        }
    }

    #[test]
    fn orthogonality_examples() {
        assert_eq!(orthogonality_sum(1, 10).unwrap(), 512);
        assert_eq!(orthogonality_sum(3, 10).unwrap(), 0);
        assert_eq!(orthogonality_sum(1 + (1 << 10), 10).unwrap(), 512);
        assert!(orthogonality_sum(4, 10).is_err());
    }

    #[test]
    fn orthogonality_both_ways() {
        for j in 3..=10 {
            for u in (1..1u64 << j).step_by(2) {
                let expect = if u == 1 { 1i128 << (j - 1) } else { 0 };
                assert_eq!(orthogonality_sum(u, j).unwrap(), expect);
            }
            for chi in CharacterIndex::all(j).unwrap() {
                let mut acc = RootSum::zero(j - 1);
                for u in (1..1u64 << j).step_by(2) {
                    acc.add_value(char_eval(&chi, u), 1);
                }
                let expect = if chi.is_principal() { 1i128 << (j - 1) } else { 0 };
                assert_eq!(acc.as_integer(), Some(expect));
            }
        }
    }

    #[test]
    fn short_sum_edges() {
        let chi0 = CharacterIndex::principal(10).unwrap();
        let s = short_char_sum(&chi0, 5, 10, 3).unwrap();
        assert_eq!(s.exact_integer, Some(64));
        for chi in CharacterIndex::all(8).unwrap().skip(1) {
            let full = short_char_sum(&chi, 0, 8, 0).unwrap();
            assert_eq!(full.exact_integer, Some(0));
        }
        assert!(short_char_sum(&chi0, 8, 10, 3).is_err());
        assert!(short_char_sum(&chi0, 0, 10, 10).is_err());
    }

    #[test]
    fn short_sum_matches_direct_complex_sum() {
        let n0 = 9;
        for chi in CharacterIndex::all(n0).unwrap().step_by(17) {
            let s = short_char_sum(&chi, 3, n0, 3).unwrap();
            let (mut re, mut im) = (0.0, 0.0);
            for t in (3u64 << 6)..(4u64 << 6) {
                let (a, b) = char_eval(&chi, t).to_complex();
                re += a;
                im += b;
            }
            assert!((s.re - re).abs() < 1e-9 && (s.im - im).abs() < 1e-9);
        }
    }

    #[test]
    fn small_scan() {
        let scan = scan_short_sums(8, 2, 1).unwrap();
        assert_eq!(scan.principal_sum, 32);
        assert!(scan.full_period_vanishes);
        assert_eq!(scan.rows.len(), 128);
        assert!(scan.max_ratio > 0.0);
    }

    #[test]
    fn smooth_half_set() {
        // n = 4: w² ∈ (8, 16] ⇒ w ∈ {3, 4}; odd ⇒ {3}.
        assert_eq!(half_length_smooth_set(4, 1.5).unwrap(), vec![3]);
        let w = half_length_smooth_set(20, 2.0).unwrap();
        assert!(w.iter().all(|&x| x % 2 == 1 && x * x > 1 << 19 && x * x <= 1 << 20));
        assert!(w.iter().all(|&x| crate::arith::is_smooth_u64(x, 400)));
        let brute: Vec<u64> = (725..=1024u64)
            .filter(|x| x % 2 == 1 && crate::arith::is_smooth_u64(*x, 400))
            .collect();
        assert_eq!(w, brute);
    }

    #[test]
    fn counts_match_literal_double_loop() {
        let w = half_length_smooth_set(20, 2.0).unwrap();
        let (n0, m, s) = (8u32, 3u32, 0b101u64);
        let counts = count_products(&w, n0, m, s);
        let mut literal = vec![0u64; 1 << (n0 - m)];
        for &a in &w {
            for &b in &w {
                let t = (a * b) & mask(n0);
                if t >> (n0 - m) == s {
                    literal[(t & mask(n0 - m)) as usize] += 1;
                }
            }
        }
        assert_eq!(counts, literal);
    }

    #[test]
    fn prescribed_count_identities() {
        let full = count_prescribed_products(20, 2.0, 8, 0, "", 8, 7).unwrap();
        assert_eq!(full.total, full.w_count * full.w_count);
        let r = count_prescribed_products(20, 2.0, 8, 3, "000", 8, 7).unwrap();
        assert_eq!(r.identity_checks.len(), 8);
        assert!(r.max_identity_error() <= 1e-6, "{:?}", r.identity_checks);
        assert!(r.counts.iter().step_by(2).all(|&c| c == 0), "even targets are unreachable");
        let single = count_prescribed_products(4, 1.5, 3, 0, "", 4, 1).unwrap();
        assert_eq!(single.w_count, 1);
        assert_eq!(single.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(single.counts.iter().max(), Some(&1));
        assert!(count_prescribed_products(41, 2.0, 8, 0, "", 1, 0).is_err());
        assert!(count_prescribed_products(20, 2.0, 8, 2, "0", 1, 0).is_err());
        assert!(count_prescribed_products(20, 2.0, 8, 2, "0x", 1, 0).is_err());
    }
}
