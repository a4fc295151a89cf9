//! Process-wide prime table.
//!
//! Built once with the Eratosthenes sieve and regrown (never shrunk) when a
//! caller asks for primes beyond the current limit. Readers share an `Arc`
//! snapshot, so lookups never block on a concurrent regrow.

use std::sync::{Arc, RwLock};

/// Environment variable overriding the initial sieve limit.
pub const SIEVE_LIMIT_ENV: &str = "SPARSE_SMOOTH_SIEVE_LIMIT";
pub const DEFAULT_SIEVE_LIMIT: u64 = 10_000_000;

static TABLE: RwLock<Option<Arc<PrimeTable>>> = RwLock::new(None);

#[derive(Debug)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn new(limit: u64) -> Self {
        Self { limit, primes: eratosthenes(limit) }
    }

    /// All primes `<= self.limit()`, ascending.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Primes `<= x` (x must not exceed the limit).
    pub fn primes_to(&self, x: u64) -> &[u64] {
        debug_assert!(x <= self.limit);
        &self.primes[..self.pi(x)]
    }

    /// `π(x)`, the number of primes `<= x`.
    pub fn pi(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p <= x)
    }

    pub fn contains(&self, n: u64) -> bool {
        self.primes.binary_search(&n).is_ok()
    }
}

fn eratosthenes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut i = 2;
    while i * i <= n {
        if !composite[i] {
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    (2..=n).filter(|&k| !composite[k]).map(|k| k as u64).collect()
}

/// Initial sieve limit: `SPARSE_SMOOTH_SIEVE_LIMIT` if set and parseable, else 10⁷.
pub fn initial_sieve_limit() -> u64 {
    std::env::var(SIEVE_LIMIT_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u64>().ok())
        .filter(|&v| v >= 2)
        .unwrap_or(DEFAULT_SIEVE_LIMIT)
}

/// Shared table covering at least `[2, limit]`.
pub fn primes_up_to(limit: u64) -> Arc<PrimeTable> {
    if let Some(t) = TABLE.read().unwrap().as_ref() {
        if t.limit >= limit {
            return Arc::clone(t);
        }
    }
    let mut guard = TABLE.write().unwrap();
    let current = guard.as_ref().map_or(0, |t| t.limit);
    if current >= limit {
        return Arc::clone(guard.as_ref().unwrap());
    }
    let target = limit.max(initial_sieve_limit()).max(current.saturating_mul(2));
    let table = Arc::new(PrimeTable::new(target));
    *guard = Some(Arc::clone(&table));
    table
}

/// Shared table holding at least `count` primes.
pub fn first_primes(count: usize) -> Arc<PrimeTable> {
    let mut table = primes_up_to(2);
    while table.primes().len() < count {
        table = primes_up_to(table.limit().saturating_mul(2));
    }
    table
}
