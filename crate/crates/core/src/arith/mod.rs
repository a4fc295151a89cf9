//! Integer arithmetic substrate: primality, factorisation, multiplicative
//! functions, primorials, smoothness and the Mertens product.

mod prime;
mod rho;
pub mod sieve;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};

pub use prime::{is_prime, is_prime_u64, PROBABLE_PRIME_ROUNDS};
pub use rho::{brent_big, brent_u64};
pub use sieve::{primes_up_to, PrimeTable};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Factoring budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Effort {
    /// Trial division uses primes up to this bound.
    pub trial_bound: u64,
    /// Cap on polynomial evaluations per rho invocation.
    pub rho_iterations: u64,
    /// Number of increments `c = 1, 2, …` tried per composite.
    pub rho_attempts: u32,
}

impl Default for Effort {
    fn default() -> Self {
        Self { trial_bound: 1 << 16, rho_iterations: 1 << 24, rho_attempts: 8 }
    }
}

impl Effort {
    /// Trial division only: every composite beyond the trial bound stays unsplit.
    pub fn trial_only(trial_bound: u64) -> Self {
        Self { trial_bound, rho_iterations: 0, rho_attempts: 0 }
    }
}

/// Prime factorisation, possibly partial.
///
/// `∏ p^e · cofactor` always equals the factored value; `complete` holds
/// exactly when `cofactor == 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Factorization {
    #[serde(serialize_with = "serialize_factor_list")]
    pub factors: Vec<(BigUint, u32)>,
    pub complete: bool,
    #[serde(serialize_with = "serialize_decimal")]
    pub cofactor: BigUint,
}

impl Factorization {
    pub fn one() -> Self {
        Self { factors: Vec::new(), complete: true, cofactor: BigUint::one() }
    }

    /// Build from unsorted primes (repeats allowed) and an unresolved cofactor.
    pub fn from_parts(primes: impl IntoIterator<Item = (BigUint, u32)>, cofactor: BigUint) -> Self {
        let mut all: Vec<(BigUint, u32)> = primes.into_iter().filter(|(_, e)| *e > 0).collect();
        all.sort_by(|a, b| a.0.cmp(&b.0));
        let mut factors: Vec<(BigUint, u32)> = Vec::with_capacity(all.len());
        for (p, e) in all {
            match factors.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => factors.push((p, e)),
            }
        }
        let complete = cofactor.is_one();
        Self { factors, complete, cofactor }
    }

    /// Merge two factorisations of coprime or overlapping values into one of their product.
    pub fn merge(&self, other: &Factorization) -> Factorization {
        Factorization::from_parts(
            self.factors.iter().chain(&other.factors).cloned(),
            &self.cofactor * &other.cofactor,
        )
    }

    pub fn reassemble(&self) -> BigUint {
        self.factors
            .iter()
            .fold(self.cofactor.clone(), |acc, (p, e)| acc * p.pow(*e))
    }

    pub fn largest_prime(&self) -> Option<&BigUint> {
        self.factors.last().map(|(p, _)| p)
    }

    fn require_complete(&self, what: &str) -> Result<()> {
        if self.complete {
            Ok(())
        } else {
            Err(Error::Incomplete(format!(
                "{what} needs a complete factorization (cofactor {} unresolved)",
                self.cofactor
            )))
        }
    }
}

/// Factor `n >= 1`: trial division by primes up to `effort.trial_bound`,
/// then Brent's rho on what remains. Composites that survive the budget
/// are multiplied into the cofactor and `complete` is false.
pub fn factor(n: &BigUint, effort: &Effort) -> Result<Factorization> {
    if n.is_zero() {
        return Err(invalid("cannot factor 0"));
    }
    let mut found: Vec<(BigUint, u32)> = Vec::new();
    let mut rest = n.clone();

    let table = primes_up_to(effort.trial_bound.max(2));
    for &p in table.primes_to(effort.trial_bound.max(2)) {
        if rest.is_one() {
            break;
        }
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut e = 0;
        loop {
            let (q, r) = rest.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        if e > 0 {
            found.push((pb, e));
        }
    }

    let mut cofactor = BigUint::one();
    let mut pending = vec![rest];
    while let Some(m) = pending.pop() {
        if m.is_one() {
            continue;
        }
        if is_prime(&m) {
            found.push((m, 1));
            continue;
        }
        if let Some((root, e)) = perfect_power(&m) {
            pending.extend(std::iter::repeat_n(root, e as usize));
            continue;
        }
        let split = (1..=u64::from(effort.rho_attempts))
            .find_map(|c| brent_big(&m, c, effort.rho_iterations));
        match split {
            Some(d) => {
                let other = &m / &d;
                pending.push(d);
                pending.push(other);
            }
            None => cofactor *= m,
        }
    }
    Ok(Factorization::from_parts(found, cofactor))
}

/// `Some((r, e))` with `e >= 2` maximal such that `n = r^e`.
fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    let bits = n.bits() as u32;
    (2..=bits).rev().find_map(|e| {
        let r = n.nth_root(e);
        (r > BigUint::one() && r.pow(e) == *n).then_some((r, e))
    })
}

/// Split `n = smooth · rough` where `smooth` is the largest `y`-smooth divisor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmoothSplit {
    #[serde(serialize_with = "serialize_decimal")]
    pub smooth: BigUint,
    #[serde(serialize_with = "serialize_decimal")]
    pub rough: BigUint,
}

/// Largest `y`-smooth divisor of `n` and its cofactor.
///
/// Trial division by primes `p <= y` stops as soon as `p² > rest`, at which
/// point `rest` is 1 or prime. When `y` runs past the prime table, the
/// remainder is factored with `effort`; an unresolved composite there is an
/// [`Error::Incomplete`].
pub fn smooth_part(n: &BigUint, y: &BigUint, effort: &Effort) -> Result<SmoothSplit> {
    if n.is_zero() {
        return Err(invalid("smooth part of 0 is undefined"));
    }
    if y < &BigUint::from(2u32) {
        return Err(invalid("smoothness bound must be at least 2"));
    }
    let y_small = y.to_u64().unwrap_or(u64::MAX);
    let table = primes_up_to(2);
    let bound = y_small.min(table.limit());
    let mut smooth = BigUint::one();
    let mut rest = n.clone();
    let mut settled = false;
    for &p in table.primes_to(bound) {
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            settled = true;
            break;
        }
        while (&rest % p).is_zero() {
            rest /= p;
            smooth *= p;
        }
    }
    if !settled && y_small <= table.limit() {
        // Every prime <= y was removed; the rest is y-rough.
        return Ok(SmoothSplit { smooth, rough: rest });
    }
    if settled {
        // rest is 1 or a prime.
        if !rest.is_one() && &rest <= y {
            smooth *= &rest;
            rest = BigUint::one();
        }
        return Ok(SmoothSplit { smooth, rough: rest });
    }
    let f = factor(&rest, effort)?;
    f.require_complete("smooth part beyond the prime table")?;
    let mut rough = BigUint::one();
    for (p, e) in f.factors {
        if &p <= y {
            smooth *= p.pow(e);
        } else {
            rough *= p.pow(e);
        }
    }
    Ok(SmoothSplit { smooth, rough })
}

pub fn is_smooth(n: &BigUint, y: &BigUint, effort: &Effort) -> Result<bool> {
    Ok(smooth_part(n, y, effort)?.rough.is_one())
}

/// Fast path for machine-sized values: trial division by primes `<= y`.
pub fn is_smooth_u64(mut n: u64, y: u64) -> bool {
    if n == 0 {
        return false;
    }
    let table = primes_up_to(y.min(u32::MAX as u64));
    for &p in table.primes_to(y.min(table.limit())) {
        if p * p > n {
            return n <= y;
        }
        while n % p == 0 {
            n /= p;
        }
    }
    n == 1 || n <= y
}

/// Product `k = p₂·p₃⋯p_r` of the first `r-1` odd primes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OddPrimorial {
    pub r: usize,
    #[serde(serialize_with = "serialize_decimal")]
    pub k: BigUint,
    #[serde(serialize_with = "serialize_decimal")]
    pub largest_prime: BigUint,
}

impl OddPrimorial {
    pub fn primes(&self) -> Vec<u64> {
        sieve::first_primes(self.r).primes()[1..self.r].to_vec()
    }
}

pub fn odd_primorial(r: usize) -> Result<OddPrimorial> {
    if r < 2 {
        return Err(invalid(format!("odd primorial needs r >= 2, got {r}")));
    }
    let table = sieve::first_primes(r);
    let odd = &table.primes()[1..r];
    let k = odd.iter().fold(BigUint::one(), |acc, &p| acc * p);
    Ok(OddPrimorial { r, k, largest_prime: BigUint::from(odd[odd.len() - 1]) })
}

/// `φ(n) = ∏ p^(e-1) (p - 1)`.
pub fn euler_phi(f: &Factorization) -> Result<BigUint> {
    f.require_complete("euler_phi")?;
    Ok(f.factors
        .iter()
        .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(e - 1) * (p - 1u32)))
}

/// Number of divisors `τ(n) = ∏ (e + 1)`.
pub fn tau(f: &Factorization) -> Result<BigUint> {
    f.require_complete("tau")?;
    Ok(f.factors.iter().fold(BigUint::one(), |acc, (_, e)| acc * (e + 1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MertensProduct {
    pub x: u64,
    /// `∏_{p <= x} (1 - 1/p)`.
    pub product: f64,
    /// `e^{-γ} / log x`.
    pub asymptotic: f64,
    pub ratio: f64,
}

pub fn mertens_product(x: u64) -> Result<MertensProduct> {
    if x < 2 {
        return Err(invalid("Mertens product needs x >= 2"));
    }
    let table = primes_up_to(x);
    let product = table
        .primes_to(x)
        .iter()
        .fold(1.0f64, |acc, &p| acc * (1.0 - 1.0 / p as f64));
    let asymptotic = (-EULER_GAMMA).exp() / (x as f64).ln();
    Ok(MertensProduct { x, product, asymptotic, ratio: product / asymptotic })
}

/// Natural logarithm of a big integer (relative error near f64 precision).
pub fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().map_or(f64::NAN, f64::ln);
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().expect("64 top bits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn log2_big(n: &BigUint) -> f64 {
    ln_big(n) / std::f64::consts::LN_2
}

pub(crate) fn serialize_decimal<S: Serializer>(n: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_str_radix(10))
}

pub(crate) fn serialize_signed_decimal<S: Serializer>(
    n: &BigInt,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_str_radix(10))
}

pub(crate) fn serialize_opt_decimal<S: Serializer>(
    n: &Option<BigUint>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match n {
        Some(v) => s.serialize_some(&v.to_str_radix(10)),
        None => s.serialize_none(),
    }
}

fn serialize_factor_list<S: Serializer>(
    factors: &[(BigUint, u32)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry {
        prime: String,
        exponent: u32,
    }
    s.collect_seq(factors.iter().map(|(p, e)| Entry { prime: p.to_str_radix(10), exponent: *e }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn listed(f: &Factorization) -> Vec<(u64, u32)> {
        f.factors.iter().map(|(p, e)| (p.to_u64().unwrap(), *e)).collect()
    }

    #[test]
    fn factor_named_values() {
        let e = Effort::default();
        let one = factor(&big(1), &e).unwrap();
        assert!(one.factors.is_empty() && one.complete);
        let f = factor(&big(32769), &e).unwrap();
        assert_eq!(listed(&f), vec![(3, 2), (11, 1), (331, 1)]);
        assert!(f.complete);
        assert!(factor(&BigUint::zero(), &e).is_err());
    }

    #[test]
    fn factor_two_pow_105_plus_one() {
        let n = (BigUint::one() << 105u32) + 1u32;
        let f = factor(&n, &Effort::default()).unwrap();
        assert!(f.complete);
        assert_eq!(f.reassemble(), n);
        assert!(f.factors.iter().all(|(p, _)| is_prime(p)));
        assert!(f.largest_prime().unwrap() < &(BigUint::one() << 49u32));
    }

    #[test]
    fn exhausted_budget_is_reported() {
        let n = big(2_147_483_647) * big(2_147_483_629) * big(9);
        let f = factor(&n, &Effort::trial_only(100)).unwrap();
        assert!(!f.complete);
        assert_eq!(listed(&f), vec![(3, 2)]);
        assert_eq!(f.cofactor, big(2_147_483_647) * big(2_147_483_629));
        assert_eq!(f.reassemble(), n);
        assert!(euler_phi(&f).is_err());
        assert!(tau(&f).is_err());
    }

    #[test]
    fn smooth_part_values() {
        let e = Effort::default();
        assert_eq!(
            smooth_part(&big(1), &big(5), &e).unwrap(),
            SmoothSplit { smooth: big(1), rough: big(1) }
        );
        assert_eq!(
            smooth_part(&big(32769), &big(331), &e).unwrap(),
            SmoothSplit { smooth: big(32769), rough: big(1) }
        );
        assert_eq!(
            smooth_part(&big(32769), &big(330), &e).unwrap(),
            SmoothSplit { smooth: big(99), rough: big(331) }
        );
        assert!(is_smooth(&big(1), &big(2), &e).unwrap());
        assert!(smooth_part(&big(10), &big(1), &e).is_err());
    }

    #[test]
    fn smooth_part_beyond_table() {
        // y larger than any sieve: falls back to factoring.
        let y = BigUint::one() << 70u32;
        let p = big(18_446_744_073_709_551_557);
        let split = smooth_part(&(&p * &p * big(6)), &y, &Effort::default()).unwrap();
        assert_eq!(split.rough, big(1));
        let y = big(1) << 40u32;
        let split = smooth_part(&(&p * big(6)), &y, &Effort::default()).unwrap();
        assert_eq!((split.smooth, split.rough), (big(6), p));
    }

    #[test]
    fn primorials() {
        assert_eq!(odd_primorial(2).unwrap().k, big(3));
        assert_eq!(odd_primorial(4).unwrap().k, big(105));
        let six = odd_primorial(6).unwrap();
        assert_eq!(six.k, big(15015));
        assert_eq!(six.largest_prime, big(13));
        assert_eq!(six.primes(), vec![3, 5, 7, 11, 13]);
        assert!(odd_primorial(1).is_err());
        let f = factor(&six.k, &Effort::default()).unwrap();
        assert!(f.factors.iter().all(|(_, e)| *e == 1));
        assert!(six.k.is_odd());
    }

    #[test]
    fn phi_and_tau() {
        let e = Effort::default();
        let phi = |n: u64| euler_phi(&factor(&big(n), &e).unwrap()).unwrap();
        let t = |n: u64| tau(&factor(&big(n), &e).unwrap()).unwrap();
        assert_eq!(phi(1), big(1));
        assert_eq!(phi(105), big(48));
        assert_eq!(phi(15015), big(5760));
        assert_eq!(t(1), big(1));
        assert_eq!(t(12), big(6));
        assert_eq!(t(105), big(8));
        for n in 1..500u64 {
            let brute_phi = (1..=n).filter(|k| k.gcd(&n) == 1).count() as u64;
            let brute_tau = (1..=n).filter(|d| n % d == 0).count() as u64;
            assert_eq!(phi(n), big(brute_phi));
            assert_eq!(t(n), big(brute_tau));
        }
    }

    #[test]
    fn mertens_values() {
        assert_eq!(mertens_product(2).unwrap().product, 0.5);
        assert!((mertens_product(10).unwrap().product - 8.0 / 35.0).abs() < 1e-15);
        let big_x = mertens_product(1_000_000).unwrap();
        assert!((0.95..=1.05).contains(&big_x.ratio), "{big_x:?}");
        assert!(mertens_product(1).is_err());
    }

    #[test]
    fn ln_of_big_values() {
        let n = BigUint::one() << 5000u32;
        assert!((ln_big(&n) - 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!((ln_big(&big(1000)) - 1000f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn is_smooth_u64_matches_big() {
        let e = Effort::default();
        for n in 1..3000u64 {
            for y in [2u64, 3, 7, 31, 100] {
                assert_eq!(is_smooth_u64(n, y), is_smooth(&big(n), &big(y), &e).unwrap(), "{n} {y}");
            }
        }
    }

    proptest! {
        #[test]
        fn factor_round_trip(n in 1u64..u64::MAX) {
            let f = factor(&big(n), &Effort::default()).unwrap();
            prop_assert_eq!(f.reassemble(), big(n));
            prop_assert!(f.complete);
            prop_assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
            prop_assert!(f.factors.iter().all(|(p, _)| is_prime(p)));
        }

        #[test]
        fn smooth_split_multiplies_back(n in 1u64..1u64 << 40, y in 2u64..5000) {
            let s = smooth_part(&big(n), &big(y), &Effort::default()).unwrap();
            prop_assert_eq!(&s.smooth * &s.rough, big(n));
            let table = primes_up_to(y);
            for &p in table.primes_to(y) {
                prop_assert!((&s.rough % p) != BigUint::zero());
            }
        }
    }
}
