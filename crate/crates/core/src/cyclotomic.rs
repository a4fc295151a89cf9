//! Cyclotomic polynomials and the factorisation of `2^k ± 1` into their
//! values at `∓2`.
//!
//! `Φ_n` is obtained by Möbius inversion of `x^n - 1 = ∏_{d|n} Φ_d(x)`:
//! for squarefree odd `m`,
//!
//! ```text
//! Φ_m(x) = ∏_{μ(m/d)=+1} (x^d - 1) / ∏_{μ(m/d)=-1} (x^d - 1)
//! ```
//!
//! The numerator is expanded first and then divided by one binomial at a
//! time; every division must leave a zero remainder. General `n` reduces to
//! that case through `Φ_n(x) = Φ_rad(n)(x^{n/rad(n)})` and `Φ_2m(x) = Φ_m(-x)`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{self, Effort, Factorization};
use crate::error::{invalid, Error, Result};

/// Largest index accepted by [`cyclotomic_poly`].
pub const INDEX_GUARD: u64 = 1_000_000;
/// Largest `n_max` accepted by [`height_bound_check`].
pub const HEIGHT_SCAN_GUARD: u64 = 100_000;

/// `Φ_n` with integer coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CyclotomicPoly {
    pub index: u64,
    pub coeffs: Vec<i64>,
    /// `A_n`, the largest coefficient in absolute value.
    pub height: u64,
}

impl CyclotomicPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Exact value at an integer point (Horner).
    pub fn eval(&self, x: i64) -> BigInt {
        let x = BigInt::from(x);
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, &c| acc * &x + c)
    }

    pub fn is_palindromic(&self) -> bool {
        self.coeffs.iter().eq(self.coeffs.iter().rev())
    }
}

/// Distinct prime divisors of a machine integer, ascending.
fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// `p ← p · (x^d - 1)`.
fn mul_binomial(p: &[i128], d: usize) -> Result<Vec<i128>> {
    let mut out = vec![0i128; p.len() + d];
    for (i, &c) in p.iter().enumerate() {
        out[i] = out[i].checked_sub(c).ok_or(Error::Overflow("cyclotomic numerator"))?;
        out[i + d] = out[i + d].checked_add(c).ok_or(Error::Overflow("cyclotomic numerator"))?;
    }
    Ok(out)
}

/// `p / (x^d - 1)`, failing unless the remainder is zero.
fn div_binomial(p: &[i128], d: usize) -> Result<Vec<i128>> {
    if p.len() <= d {
        return Err(Error::Inexact(format!("degree {} below divisor degree {d}", p.len() - 1)));
    }
    let qlen = p.len() - d;
    let mut q = vec![0i128; qlen];
    // p[i] = q[i-d] - q[i]  ⇒  q[i-d] = p[i] + q[i], from the top down.
    for i in (d..p.len()).rev() {
        let above = if i < qlen { q[i] } else { 0 };
        q[i - d] = p[i].checked_add(above).ok_or(Error::Overflow("cyclotomic quotient"))?;
    }
    for i in 0..d {
        let qi = if i < qlen { q[i] } else { 0 };
        if p[i] + qi != 0 {
            return Err(Error::Inexact(format!("non-zero remainder dividing by x^{d} - 1")));
        }
    }
    Ok(q)
}

/// `Φ_m` for odd squarefree `m > 1` with prime factors `primes`.
fn squarefree_odd(m: u64, primes: &[u64]) -> Result<Vec<i128>> {
    let mut numerator = vec![1i128];
    let mut denominator = Vec::new();
    for mask in 0u32..(1 << primes.len()) {
        // d = m / (product of the primes in mask), μ(m/d) = (-1)^|mask|.
        let removed: u64 = (0..primes.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| primes[i])
            .product();
        let d = (m / removed) as usize;
        if mask.count_ones() % 2 == 0 {
            numerator = mul_binomial(&numerator, d)?;
        } else {
            denominator.push(d);
        }
    }
    denominator.sort_unstable_by(|a, b| b.cmp(a));
    for d in denominator {
        numerator = div_binomial(&numerator, d)?;
    }
    Ok(numerator)
}

/// Compute `Φ_n` without touching the shared cache.
pub fn compute_cyclotomic(n: u64) -> Result<CyclotomicPoly> {
    if n == 0 {
        return Err(invalid("cyclotomic index must be positive"));
    }
    if n > INDEX_GUARD {
        return Err(Error::GuardExceeded { what: "cyclotomic index", limit: INDEX_GUARD.to_string() });
    }
    let primes = prime_divisors(n);
    let rad: u64 = primes.iter().product();
    let odd_primes: Vec<u64> = primes.iter().copied().filter(|&p| p != 2).collect();
    let odd_rad: u64 = odd_primes.iter().product();
    let base: Vec<i128> = match (odd_rad, rad % 2 == 0) {
        (1, false) => vec![-1, 1],
        (1, true) => vec![1, 1],
        (m, even) => {
            let mut c = squarefree_odd(m, &odd_primes)?;
            if even {
                // Φ_2m(x) = Φ_m(-x); φ(m) is even so the sign needs no fix-up.
                for (i, v) in c.iter_mut().enumerate() {
                    if i % 2 == 1 {
                        *v = -*v;
                    }
                }
            }
            c
        }
    };
    let stretch = (n / rad) as usize;
    let mut coeffs = vec![0i64; (base.len() - 1) * stretch + 1];
    for (i, &c) in base.iter().enumerate() {
        coeffs[i * stretch] = i64::try_from(c).map_err(|_| Error::Overflow("cyclotomic coefficient"))?;
    }
    let height = coeffs.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
    Ok(CyclotomicPoly { index: n, coeffs, height })
}

/// Insert-if-absent cache of cyclotomic polynomials keyed by index.
#[derive(Debug, Default)]
pub struct CyclotomicCache {
    polys: RwLock<HashMap<u64, Arc<CyclotomicPoly>>>,
}

impl CyclotomicCache {
    pub fn get(&self, n: u64) -> Result<Arc<CyclotomicPoly>> {
        if let Some(p) = self.polys.read().unwrap().get(&n) {
            return Ok(Arc::clone(p));
        }
        let poly = Arc::new(compute_cyclotomic(n)?);
        let mut map = self.polys.write().unwrap();
        Ok(Arc::clone(map.entry(n).or_insert(poly)))
    }

    pub fn len(&self) -> usize {
        self.polys.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn shared_cache() -> &'static CyclotomicCache {
    static CACHE: OnceLock<CyclotomicCache> = OnceLock::new();
    CACHE.get_or_init(CyclotomicCache::default)
}

/// `Φ_n` for `1 <= n <= 10⁶`, memoised process-wide.
pub fn cyclotomic_poly(n: u64) -> Result<Arc<CyclotomicPoly>> {
    shared_cache().get(n)
}

pub fn eval_at_minus_two(n: u64) -> Result<BigInt> {
    Ok(cyclotomic_poly(n)?.eval(-2))
}

/// One factor `Φ_d(x)` of `x^k - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CyclotomicPiece {
    pub d: u64,
    #[serde(serialize_with = "crate::arith::serialize_signed_decimal")]
    pub value: BigInt,
    pub factorization: Factorization,
}

/// `2^k + 1 = -∏_{d|k} Φ_d(-2)` (odd `k`) or `2^k - 1 = ∏_{d|k} Φ_d(2)`,
/// with each piece factored and the results merged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CyclotomicFactorization {
    pub k: u64,
    /// Evaluation point: -2 for `2^k + 1`, 2 for `2^k - 1`.
    pub point: i64,
    #[serde(serialize_with = "crate::arith::serialize_decimal")]
    pub value: BigUint,
    pub pieces: Vec<CyclotomicPiece>,
    pub merged: Factorization,
}

impl CyclotomicFactorization {
    /// Largest `|Φ_d(point)|` over the pieces.
    pub fn max_piece(&self) -> BigUint {
        self.pieces
            .iter()
            .map(|p| p.value.magnitude().clone())
            .max()
            .unwrap_or_else(BigUint::one)
    }
}

/// Signed product `∏_{d|k} Φ_d(point)`.
pub fn piece_product(k: u64, point: i64) -> Result<BigInt> {
    divisors(k)
        .into_iter()
        .try_fold(BigInt::one(), |acc, d| Ok(acc * cyclotomic_poly(d)?.eval(point)))
}

/// Check `-∏_{d|k} Φ_d(-2) = 2^k + 1` for odd `k`.
pub fn fermat_identity_holds(k: u64) -> Result<bool> {
    if k % 2 == 0 {
        return Err(invalid(format!("identity needs odd k, got {k}")));
    }
    let expected = (BigInt::one() << k) + 1;
    Ok(-piece_product(k, -2)? == expected)
}

fn split_via_cyclotomic(k: u64, point: i64, effort: &Effort) -> Result<CyclotomicFactorization> {
    let target: BigInt = if point == -2 {
        (BigInt::one() << k) + 1
    } else {
        (BigInt::one() << k) - 1
    };
    let mut pieces = Vec::new();
    let mut product = BigInt::one();
    for d in divisors(k) {
        let value = cyclotomic_poly(d)?.eval(point);
        product *= &value;
        let factorization = arith::factor(value.magnitude(), effort)?;
        pieces.push(CyclotomicPiece { d, value, factorization });
    }
    let signed = if point == -2 { -product } else { product };
    if signed != target {
        return Err(Error::Inexact(format!("cyclotomic pieces do not multiply to 2^{k} {}", if point == -2 { "+ 1" } else { "- 1" })));
    }
    let merged = pieces
        .iter()
        .fold(Factorization::one(), |acc, p| acc.merge(&p.factorization));
    let (sign, value) = target.into_parts();
    debug_assert_ne!(sign, Sign::Minus);
    Ok(CyclotomicFactorization { k, point, value, pieces, merged })
}

/// Factor `2^k + 1` (odd `k`) through its cyclotomic pieces `Φ_d(-2)`.
pub fn fermat_like_factor(k: u64, effort: &Effort) -> Result<CyclotomicFactorization> {
    if k == 0 || k % 2 == 0 {
        return Err(invalid(format!("2^k + 1 splits over Φ_d(-2) only for odd k >= 1, got {k}")));
    }
    split_via_cyclotomic(k, -2, effort)
}

/// Factor `2^k - 1` through its cyclotomic pieces `Φ_d(2)`.
pub fn mersenne_like_factor(k: u64, effort: &Effort) -> Result<CyclotomicFactorization> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    split_via_cyclotomic(k, 2, effort)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeightReport {
    pub n_max: u64,
    /// Indices `2..=n_max` that satisfied `A_n < exp(τ(n) log n / 2)`.
    pub checked: u64,
    pub violations: Vec<u64>,
    /// Largest `log A_n / (τ(n) log n / 2)` observed.
    pub max_log_ratio: f64,
    pub max_log_ratio_index: u64,
    pub max_height: u64,
    pub max_height_index: u64,
}

impl HeightReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compare every height `A_n`, `2 <= n <= n_max`, with `exp(τ(n) log n / 2)`.
pub fn height_bound_check(n_max: u64) -> Result<HeightReport> {
    if n_max > HEIGHT_SCAN_GUARD {
        return Err(Error::GuardExceeded { what: "height scan n_max", limit: HEIGHT_SCAN_GUARD.to_string() });
    }
    let mut report = HeightReport {
        n_max,
        checked: 0,
        violations: Vec::new(),
        max_log_ratio: f64::NEG_INFINITY,
        max_log_ratio_index: 0,
        max_height: 0,
        max_height_index: 0,
    };
    for n in 2..=n_max {
        let poly = compute_cyclotomic(n)?;
        let tau = divisors(n).len() as f64;
        let log_bound = 0.5 * tau * (n as f64).ln();
        let log_height = (poly.height as f64).ln();
        let ratio = log_height / log_bound;
        if !(log_height < log_bound) {
            report.violations.push(n);
        } else {
            report.checked += 1;
        }
        if ratio > report.max_log_ratio {
            report.max_log_ratio = ratio;
            report.max_log_ratio_index = n;
        }
        if poly.height > report.max_height {
            report.max_height = poly.height;
            report.max_height_index = n;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;

    /// Φ_n straight from (x^n - 1) / ∏_{d|n, d<n} Φ_d with big-integer long division.
    fn literal_cyclotomic(n: u64, known: &HashMap<u64, Vec<BigInt>>) -> Vec<BigInt> {
        let mut num: Vec<BigInt> = vec![BigInt::zero(); n as usize + 1];
        num[0] = BigInt::from(-1);
        num[n as usize] = BigInt::one();
        for d in divisors(n).into_iter().filter(|&d| d < n) {
            let den = &known[&d];
            let dq = num.len() - den.len();
            let mut q = vec![BigInt::zero(); dq + 1];
            for i in (0..=dq).rev() {
                let lead = &num[i + den.len() - 1];
                let (c, r) = lead.div_rem(den.last().unwrap());
                assert!(r.is_zero());
                for (j, dc) in den.iter().enumerate() {
                    num[i + j] -= &c * dc;
                }
                q[i] = c;
            }
            assert!(num.iter().all(|c| c.is_zero()), "remainder dividing by Φ_{d}");
            num = q;
        }
        num
    }

    #[test]
    fn small_polynomials() {
        assert_eq!(compute_cyclotomic(1).unwrap().coeffs, vec![-1, 1]);
        assert_eq!(compute_cyclotomic(2).unwrap().coeffs, vec![1, 1]);
        assert_eq!(compute_cyclotomic(6).unwrap().coeffs, vec![1, -1, 1]);
        assert_eq!(compute_cyclotomic(12).unwrap().coeffs, vec![1, 0, -1, 0, 1]);
        assert_eq!(compute_cyclotomic(9).unwrap().coeffs, vec![1, 0, 0, 1, 0, 0, 1]);
        assert!(compute_cyclotomic(0).is_err());
        assert!(compute_cyclotomic(INDEX_GUARD + 1).is_err());
    }

    #[test]
    fn first_height_two_is_105() {
        for n in 1..105 {
            assert_eq!(compute_cyclotomic(n).unwrap().height, 1, "n = {n}");
        }
        let p = compute_cyclotomic(105).unwrap();
        assert_eq!(p.height, 2);
        assert_eq!(p.degree(), 48);
    }

    #[test]
    fn matches_literal_definition() {
        let mut known = HashMap::new();
        for n in 1..=210u64 {
            let lit = literal_cyclotomic(n, &known);
            let ours: Vec<BigInt> = compute_cyclotomic(n).unwrap().coeffs.iter().map(|&c| BigInt::from(c)).collect();
            assert_eq!(ours, lit, "n = {n}");
            known.insert(n, lit);
        }
    }

    #[test]
    fn large_heights() {
        // Known heights: A_385 = 3, A_1155 = 3, A_255255 = 532.
        assert_eq!(compute_cyclotomic(385).unwrap().height, 3);
        assert_eq!(compute_cyclotomic(1155).unwrap().height, 3);
        let p = compute_cyclotomic(255_255).unwrap();
        assert_eq!(p.height, 532);
        assert_eq!(p.degree(), 92_160);
        assert!(p.is_palindromic());
    }

    #[test]
    fn values_at_minus_two() {
        assert_eq!(eval_at_minus_two(1).unwrap(), BigInt::from(-3));
        assert_eq!(eval_at_minus_two(3).unwrap(), BigInt::from(3));
        assert_eq!(eval_at_minus_two(15).unwrap(), BigInt::from(331));
    }

    #[test]
    fn structural_identities() {
        let degrees: Vec<usize> = (0..=3000u64)
            .map(|n| if n == 0 { 0 } else { compute_cyclotomic(n).unwrap().degree() })
            .collect();
        for n in 1..=3000u64 {
            let total: usize = divisors(n).iter().map(|&d| degrees[d as usize]).sum();
            assert_eq!(total as u64, n);
        }
        for n in 2..=3000 {
            let p = compute_cyclotomic(n).unwrap();
            assert!(p.is_palindromic(), "n = {n}");
            assert_eq!(p.coeffs[0].abs(), 1);
            assert_eq!(*p.coeffs.last().unwrap(), 1);
        }
    }

    #[test]
    fn product_identity_small_k() {
        for k in (1..=301).step_by(2) {
            assert!(fermat_identity_holds(k).unwrap(), "k = {k}");
        }
        assert!(fermat_identity_holds(4).is_err());
    }

    #[test]
    fn fermat_like_examples() {
        let e = Effort::default();
        let three = fermat_like_factor(3, &e).unwrap();
        let values: Vec<BigInt> = three.pieces.iter().map(|p| p.value.clone()).collect();
        assert_eq!(values, vec![BigInt::from(-3), BigInt::from(3)]);
        assert_eq!(three.merged.factors, vec![(BigUint::from(3u32), 2)]);

        let fifteen = fermat_like_factor(15, &e).unwrap();
        let listed: Vec<(u64, u32)> = fifteen
            .merged
            .factors
            .iter()
            .map(|(p, e)| (p.try_into().unwrap(), *e))
            .collect();
        assert_eq!(listed, vec![(3, 2), (11, 1), (331, 1)]);
        assert!(fifteen.merged.complete);

        let big = fermat_like_factor(105, &e).unwrap();
        assert!(big.merged.complete);
        assert_eq!(big.merged.reassemble(), (BigUint::one() << 105u32) + 1u32);
        assert!(big.max_piece() < BigUint::one() << 49u32);
        assert!(fermat_like_factor(10, &e).is_err());
    }

    #[test]
    fn largest_prime_below_largest_piece() {
        let e = Effort::default();
        for k in [3u64, 5, 9, 15, 21, 33, 105] {
            let f = fermat_like_factor(k, &e).unwrap();
            assert!(f.merged.complete);
            let bound = f.max_piece();
            assert!(f.merged.factors.iter().all(|(p, _)| *p <= bound), "k = {k}");
            for (p, _) in &f.merged.factors {
                assert!(f.pieces.iter().any(|piece| (piece.value.magnitude() % p).is_zero()));
            }
        }
    }

    #[test]
    fn mersenne_like_split() {
        let f = mersenne_like_factor(5, &Effort::default()).unwrap();
        assert_eq!(f.value, BigUint::from(31u32));
        assert_eq!(f.merged.factors, vec![(BigUint::from(31u32), 1)]);
        let f = mersenne_like_factor(1, &Effort::default()).unwrap();
        assert!(f.merged.factors.is_empty());
    }

    #[test]
    fn height_bound_small_scan() {
        let r = height_bound_check(2000).unwrap();
        assert!(r.holds());
        assert_eq!(r.checked, 1999);
        assert!(r.max_log_ratio < 1.0);
        assert!(height_bound_check(HEIGHT_SCAN_GUARD + 1).is_err());
        // A_6 = 1 against exp(2 log 6) = 36; A_105 = 2 against exp(4 log 105).
        assert!(1.0 < (0.5 * 4.0 * 6f64.ln()).exp());
        assert!(2.0 < (0.5 * 8.0 * 105f64.ln()).exp());
    }

    #[test]
    fn prime_index_is_all_ones() {
        for p in [3u64, 7, 31, 101, 997] {
            let poly = compute_cyclotomic(p).unwrap();
            assert!(poly.coeffs.iter().all(|&c| c == 1));
            assert_eq!(poly.height, 1);
        }
    }

    #[test]
    fn cache_inserts_once() {
        let cache = CyclotomicCache::default();
        let a = cache.get(77).unwrap();
        let b = cache.get(77).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.len(), 1);
    }
}
