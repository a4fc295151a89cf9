//! Counting and enumerating `y`-smooth integers.
//!
//! `Ψ(x, y)` counts `1 <= n <= x` with no prime factor above `y`; 1 is
//! smooth for every `y`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use serde::Serialize;

use crate::arith::primes_up_to;
use crate::error::{invalid, Error, Result};

/// Default largest `x` accepted by [`psi_exact`].
pub const PSI_GUARD: u64 = 1 << 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PsiQuery {
    pub x: u64,
    pub y: u64,
    pub count: u64,
}

/// Exact `Ψ(x, y)` for `x` up to [`PSI_GUARD`].
pub fn psi_exact(x: u64, y: u64) -> Result<u64> {
    psi_exact_guarded(x, y, PSI_GUARD)
}

/// Exact `Ψ(x, y)` with an explicit feasibility guard on `x`.
///
/// Uses `Ψ(x, p_k) = Ψ(x, p_{k-1}) + Ψ(⌊x/p_k⌋, p_k)` unrolled down to the
/// closed forms for `{2}`- and `{2,3}`-smooth counts, memoised on
/// `(⌊x⌋, k)` for the duration of the call.
pub fn psi_exact_guarded(x: u64, y: u64, guard: u64) -> Result<u64> {
    if x == 0 {
        return Err(invalid("psi needs x >= 1"));
    }
    if y < 2 {
        return Err(invalid("psi needs y >= 2"));
    }
    if x > guard {
        return Err(Error::GuardExceeded { what: "psi argument x", limit: guard.to_string() });
    }
    if y >= x {
        return Ok(x);
    }
    let table = primes_up_to(y);
    let primes = table.primes_to(y);
    let mut counter = PsiCounter { primes, memo: HashMap::new() };
    Ok(counter.count(x, primes.len()))
}

struct PsiCounter<'a> {
    primes: &'a [u64],
    memo: HashMap<(u64, u32), u64>,
}

/// Below this, results are cheap enough that hashing costs more than recomputing.
const MEMO_FLOOR: u64 = 64;

impl PsiCounter<'_> {
    /// Count of `n <= x` whose prime factors lie in `primes[..k]`.
    fn count(&mut self, x: u64, mut k: usize) -> u64 {
        if x == 0 {
            return 0;
        }
        if k == 0 || x == 1 {
            return 1;
        }
        if self.primes[k - 1] >= x {
            return x;
        }
        if k == 1 {
            return psi_two(x);
        }
        if k == 2 {
            return psi_three(x);
        }
        if x >= MEMO_FLOOR {
            if let Some(&v) = self.memo.get(&(x, k as u32)) {
                return v;
            }
        }
        let key = k;
        let mut total = psi_three(x);
        // Primes with p² > x contribute ⌊x/p⌋ each.
        while k > 2 && self.primes[k - 1].saturating_mul(self.primes[k - 1]) > x {
            total += x / self.primes[k - 1];
            k -= 1;
        }
        for i in 2..k {
            total += self.count(x / self.primes[i], i + 1);
        }
        if x >= MEMO_FLOOR {
            self.memo.insert((x, key as u32), total);
        }
        total
    }
}

/// `Ψ(x, 2) = ⌊log₂ x⌋ + 1`.
fn psi_two(x: u64) -> u64 {
    u64::from(63 - x.leading_zeros()) + 1
}

/// `Ψ(x, 3) = Σ_b Ψ(⌊x/3^b⌋, 2)`.
fn psi_three(mut x: u64) -> u64 {
    let mut total = 0;
    while x > 0 {
        total += psi_two(x);
        x /= 3;
    }
    total
}

/// Count of smooth numbers by testing every `n <= x` (slow reference).
pub fn psi_naive(x: u64, y: u64) -> u64 {
    (1..=x).filter(|&n| crate::arith::is_smooth_u64(n, y)).count() as u64
}

/// Smooth integers in `(lo, hi]`, ascending.
///
/// Walks the tree of prime-exponent vectors (children of `v` with largest
/// prime index `j` are `v·p_i`, `i >= j`) in order of value using a heap
/// holding at most two pending entries per emitted number.
pub struct SmoothIter {
    primes: Vec<u64>,
    lo: u64,
    hi: u64,
    heap: BinaryHeap<Reverse<(u64, u64, usize)>>,
    emit_one: bool,
}

impl Iterator for SmoothIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.emit_one {
            self.emit_one = false;
            return Some(1);
        }
        loop {
            let Reverse((value, base, j)) = self.heap.pop()?;
            if let Some(&next) = self.primes.get(j + 1) {
                if let Some(sibling) = base.checked_mul(next).filter(|&s| s <= self.hi) {
                    self.heap.push(Reverse((sibling, base, j + 1)));
                }
            }
            if let Some(child) = value.checked_mul(self.primes[j]).filter(|&c| c <= self.hi) {
                self.heap.push(Reverse((child, value, j)));
            }
            if value > self.lo {
                return Some(value);
            }
        }
    }
}

/// Stream the `y`-smooth integers in `(lo, hi]` in ascending order; with
/// `odd_only` the prime 2 is excluded.
pub fn enumerate_smooth(lo: u64, hi: u64, y: u64, odd_only: bool) -> Result<SmoothIter> {
    if lo >= hi {
        return Err(invalid(format!("empty interval ({lo}, {hi}]")));
    }
    let primes = smooth_primes(y, odd_only);
    let mut heap = BinaryHeap::new();
    if let Some(&p) = primes.first() {
        if p <= hi {
            heap.push(Reverse((p, 1, 0)));
        }
    }
    Ok(SmoothIter { primes, lo, hi, heap, emit_one: lo < 1 })
}

fn smooth_primes(y: u64, odd_only: bool) -> Vec<u64> {
    let table = primes_up_to(y.max(2));
    let all = table.primes_to(y.max(2));
    let skip = usize::from(odd_only && !all.is_empty());
    all[skip..].to_vec()
}

/// Visit every product of `primes` (with multiplicity) that is `<= hi`,
/// including 1, in depth-first order.
pub fn for_each_smooth(hi: u64, primes: &[u64], mut visit: impl FnMut(u64)) {
    fn walk(v: u64, from: usize, hi: u64, primes: &[u64], visit: &mut impl FnMut(u64)) {
        visit(v);
        for (i, &p) in primes.iter().enumerate().skip(from) {
            match v.checked_mul(p) {
                Some(next) if next <= hi => walk(next, i, hi, primes, visit),
                _ => break,
            }
        }
    }
    if hi >= 1 {
        walk(1, 0, hi, primes, &mut visit);
    }
}

/// Lemma-style ratio check: `Ψ(cx, y) / Ψ(x, y)` with `y = ⌊(log x)^A⌋`
/// against the asymptotic `c^(1 - 1/A)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiRatio {
    pub x: u64,
    pub cx: u64,
    pub y: u64,
    pub psi_x: u64,
    pub psi_cx: u64,
    pub observed: f64,
    pub predicted: f64,
}

/// `⌊(ln x)^A⌋`.
pub fn log_power_bound(x: u64, a_param: f64) -> u64 {
    (x as f64).ln().powf(a_param).floor() as u64
}

pub fn psi_ratio_check(x: u64, c: f64, a_param: f64) -> Result<PsiRatio> {
    if !(c >= 1.0) || !c.is_finite() {
        return Err(invalid(format!("ratio factor c must be >= 1, got {c}")));
    }
    if !(a_param > 1.0) {
        return Err(invalid(format!("A must exceed 1, got {a_param}")));
    }
    let y = log_power_bound(x, a_param);
    if y < 2 {
        return Err(invalid(format!("x = {x} too small: (log x)^A < 2")));
    }
    let cx_f = (c * x as f64).floor();
    if cx_f > PSI_GUARD as f64 {
        return Err(Error::GuardExceeded { what: "psi argument cx", limit: PSI_GUARD.to_string() });
    }
    let cx = cx_f as u64;
    let psi_x = psi_exact(x, y)?;
    let psi_cx = if cx == x { psi_x } else { psi_exact(cx, y)? };
    Ok(PsiRatio {
        x,
        cx,
        y,
        psi_x,
        psi_cx,
        observed: psi_cx as f64 / psi_x as f64,
        predicted: c.powf(1.0 - 1.0 / a_param),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiExponent {
    pub x: u64,
    pub y: u64,
    pub psi: u64,
    /// `log Ψ(x, y) / log x`.
    pub exponent: f64,
}

/// `log Ψ(x, ⌊(log x)^A⌋) / log x` for each `x`; the asymptotic target is `1 - 1/A`.
pub fn psi_exponent_trend(xs: &[u64], a_param: f64) -> Result<Vec<PsiExponent>> {
    if !(a_param > 1.0) {
        return Err(invalid(format!("A must exceed 1, got {a_param}")));
    }
    xs.iter()
        .map(|&x| {
            let y = log_power_bound(x, a_param);
            if y < 2 {
                return Err(invalid(format!("x = {x} too small: (log x)^A < 2")));
            }
            let psi = psi_exact(x, y)?;
            Ok(PsiExponent { x, y, psi, exponent: (psi as f64).ln() / (x as f64).ln() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn named_counts() {
        assert_eq!(psi_exact(10, 2).unwrap(), 4);
        assert_eq!(psi_exact(100, 3).unwrap(), 20);
        assert_eq!(psi_exact(1, 2).unwrap(), 1);
        for x in [2u64, 17, 1000] {
            assert_eq!(psi_exact(x, x).unwrap(), x);
            assert_eq!(psi_exact(x, x + 50).unwrap(), x);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(psi_exact(0, 5).is_err());
        assert!(psi_exact(10, 1).is_err());
        assert!(matches!(psi_exact(PSI_GUARD + 1, 5), Err(Error::GuardExceeded { .. })));
        assert!(psi_exact_guarded(PSI_GUARD + 1, 3, u64::MAX).is_ok());
    }

    #[test]
    fn agrees_with_naive_count() {
        for y in [2u64, 3, 5, 7, 11, 31, 100] {
            for x in [1u64, 2, 3, 10, 99, 100, 101, 1023, 1024, 4097, 9999, 31_415] {
                assert_eq!(psi_exact(x, y).unwrap(), psi_naive(x, y), "Ψ({x}, {y})");
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        let v: Vec<u64> = enumerate_smooth(1, 10, 2, false).unwrap().collect();
        assert_eq!(v, vec![2, 4, 8]);
        let v: Vec<u64> = enumerate_smooth(1, 50, 5, true).unwrap().collect();
        assert_eq!(v, vec![3, 5, 9, 15, 25, 27, 45]);
        assert_eq!(enumerate_smooth(1, 1 << 40, 2, true).unwrap().count(), 0);
        let v: Vec<u64> = enumerate_smooth(0, 6, 3, false).unwrap().collect();
        assert_eq!(v, vec![1, 2, 3, 4, 6]);
        assert!(enumerate_smooth(5, 5, 3, false).is_err());
    }

    #[test]
    fn enumeration_count_matches_psi() {
        for y in [2u64, 3, 7, 31, 97] {
            for x in [10u64, 1000, 65_536, 100_000] {
                let n = enumerate_smooth(1, x, y, false).unwrap().count() as u64;
                assert_eq!(n, psi_exact(x, y).unwrap() - 1);
            }
        }
    }

    #[test]
    fn odd_count_identity() {
        // Odd smooth n <= x correspond to Ψ(x) - Ψ(⌊x/2⌋) via w ↦ 2w.
        for y in [3u64, 5, 13, 100] {
            for x in [2u64, 3, 50, 777, 10_000, 100_000] {
                let odd = enumerate_smooth(1, x, y, true).unwrap().count() as u64 + 1;
                let expect = psi_exact(x, y).unwrap() - psi_exact((x / 2).max(1), y).unwrap()
                    + u64::from(x / 2 == 0);
                assert_eq!(odd, expect, "x = {x}, y = {y}");
            }
        }
    }

    #[test]
    fn dfs_visits_same_set() {
        let primes = [3u64, 5, 7, 11];
        let mut seen = Vec::new();
        for_each_smooth(5000, &primes, |v| seen.push(v));
        seen.sort_unstable();
        let ordered: Vec<u64> = enumerate_smooth(0, 5000, 11, true).unwrap().collect();
        assert_eq!(seen, ordered);
    }

    #[test]
    fn ratio_with_unit_factor() {
        let r = psi_ratio_check(1 << 20, 1.0, 2.0).unwrap();
        assert_eq!(r.observed, 1.0);
        assert_eq!(r.predicted, 1.0);
        assert!(psi_ratio_check(1 << 20, 0.5, 2.0).is_err());
        assert!(psi_ratio_check(3, 2.0, 2.0).is_err());
    }

    #[test]
    fn exponent_trend_stays_below_one() {
        let trend = psi_exponent_trend(&[1 << 20, 1 << 24, 1 << 30], 2.0).unwrap();
        for t in &trend {
            assert!(t.exponent > 0.0 && t.exponent < 1.0, "{t:?}");
        }
        // Independent memoised recurrence: Ψ(2^30, 432) = 27589124.
        assert_eq!((trend[2].y, trend[2].psi), (432, 27_589_124));
        assert!((trend[2].exponent - 0.823_92).abs() < 1e-5, "{}", trend[2].exponent);
    }

    proptest! {
        #[test]
        fn psi_is_monotone(x in 1u64..200_000, dx in 0u64..5_000, y in 2u64..400, dy in 0u64..400) {
            let base = psi_exact(x, y).unwrap();
            prop_assert!(psi_exact(x + dx, y).unwrap() >= base);
            prop_assert!(psi_exact(x, y + dy).unwrap() >= base);
        }

        #[test]
        fn enumeration_is_strictly_ascending(lo in 0u64..10_000, len in 1u64..50_000, y in 2u64..60) {
            let v: Vec<u64> = enumerate_smooth(lo, lo + len, y, false).unwrap().collect();
            prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(v.iter().all(|&n| n > lo && n <= lo + len));
            prop_assert_eq!(v.len() as u64, psi_exact(lo + len, y).unwrap() - psi_exact(lo.max(1), y).unwrap() + u64::from(lo == 0));
        }
    }
}
