//! Pollard rho with Brent's cycle detection.
//!
//! Iteration `x ↦ x² + c` from the seed 2; the increment `c` walks 1, 2, 3, …
//! across attempts so repeated runs split the same numbers the same way.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::prime::{gcd_u64, mul_mod};

/// Products of differences accumulated between gcd evaluations.
const BATCH: u64 = 128;

/// Try to find a non-trivial divisor of the composite `n` with increment `c`,
/// giving up after `max_iters` evaluations of the polynomial.
pub fn brent_u64(n: u64, c: u64, max_iters: u64) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    let f = |x: u64| (mul_mod(x, x, n) + c) % n;
    let (mut y, mut x, mut ys) = (2 % n, 2 % n, 2 % n);
    let mut q = 1u64;
    let mut g = 1u64;
    let mut r = 1u64;
    let mut iters = 0u64;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        iters += r;
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            let steps = BATCH.min(r - k);
            for _ in 0..steps {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            iters += steps;
            g = gcd_u64(q, n);
            k += steps;
        }
        r *= 2;
        if g == 1 && iters > max_iters {
            return None;
        }
    }
    if g == n {
        // The batch overshot; replay one step at a time.
        loop {
            ys = f(ys);
            g = gcd_u64(x.abs_diff(ys), n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

pub fn brent_big(n: &BigUint, c: u64, max_iters: u64) -> Option<BigUint> {
    if let Some(small) = n.to_u64() {
        return brent_u64(small, c, max_iters).map(BigUint::from);
    }
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    let c = BigUint::from(c);
    let f = |x: &BigUint| (x * x + &c) % n;
    let diff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
    let two = BigUint::from(2u32);
    let (mut y, mut x, mut ys) = (two.clone(), two.clone(), two);
    let mut q = BigUint::one();
    let mut g = BigUint::one();
    let mut r = 1u64;
    let mut iters = 0u64;
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        iters += r;
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            let steps = BATCH.min(r - k);
            for _ in 0..steps {
                y = f(&y);
                q = (&q * diff(&x, &y)) % n;
            }
            iters += steps;
            g = q.gcd(n);
            k += steps;
        }
        r *= 2;
        if g.is_one() && iters > max_iters {
            return None;
        }
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = diff(&x, &ys).gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    (&g != n && !g.is_zero()).then_some(g)
}
