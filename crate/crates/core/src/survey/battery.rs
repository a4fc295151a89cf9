use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{euler_phi, mertens_product, odd_primorial, Factorization};
use crate::cyclotomic::height_bound_check;
use crate::error::Result;

use super::{binomial_tail_check, log_binomial_sum_check};

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryConfig {
    pub height_n_max: u64,
    pub pairs: usize,
    pub pair_bits: u64,
    pub tail_n: (u64, u64),
    pub log_sum_n: (u64, u64),
    pub mertens_x: u64,
    pub tau_n_max: u64,
    pub totient_r: (usize, usize),
    pub seed: u64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            height_n_max: 10_000,
            pairs: 100_000,
            pair_bits: 512,
            tail_n: (10, 200),
            log_sum_n: (16, 10_000),
            mertens_x: 1_000_000,
            tau_n_max: 1_000_000,
            totient_r: (5, 12),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Headline number for the check (worst ratio, worst deviation, ...).
    pub metric: f64,
    pub detail: String,
}

/// Run every lemma check in a fixed order.
pub fn run_battery(config: &BatteryConfig) -> Result<Vec<LemmaCheck>> {
    Ok(vec![
        height_check(config)?,
        subadditivity_check(config),
        tail_check(config)?,
        log_sum_check(config)?,
        mertens_check(config)?,
        divisor_growth_check(config),
        totient_check(config)?,
    ])
}

fn height_check(config: &BatteryConfig) -> Result<LemmaCheck> {
    let report = height_bound_check(config.height_n_max)?;
    Ok(LemmaCheck {
        name: "cyclotomic_height",
        passed: report.holds(),
        metric: report.max_log_ratio,
        detail: format!(
            "A_n < exp(tau(n) ln n / 2) for 2 <= n <= {}: {} violations; max ln A_n / bound = {:.4} at n = {}; max height {} at n = {}",
            config.height_n_max,
            report.violations.len(),
            report.max_log_ratio,
            report.max_log_ratio_index,
            report.max_height,
            report.max_height_index
        ),
    })
}

fn random_biguint(rng: &mut ChaCha8Rng, max_bits: u64) -> BigUint {
    let bits = rng.gen_range(1..=max_bits);
    let words: Vec<u32> = (0..bits.div_ceil(32)).map(|_| rng.gen()).collect();
    BigUint::new(words) >> ((32 - bits % 32) % 32)
}

fn subadditivity_check(config: &BatteryConfig) -> LemmaCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut failures = 0usize;
    let mut tightest = u64::MAX;
    for _ in 0..config.pairs {
        let a = random_biguint(&mut rng, config.pair_bits);
        let b = random_biguint(&mut rng, config.pair_bits);
        let lhs = (&a + &b).count_ones();
        let rhs = a.count_ones() + b.count_ones();
        if lhs > rhs {
            failures += 1;
        } else {
            tightest = tightest.min(rhs - lhs);
        }
    }
    LemmaCheck {
        name: "digit_sum_subadditivity",
        passed: failures == 0,
        metric: failures as f64,
        detail: format!(
            "s2(a+b) <= s2(a)+s2(b) on {} seeded pairs up to {} bits: {failures} failures, smallest slack {tightest}",
            config.pairs, config.pair_bits
        ),
    }
}

fn tail_check(config: &BatteryConfig) -> Result<LemmaCheck> {
    let (lo, hi) = config.tail_n;
    let mut failures = Vec::new();
    let mut max_gap = f64::NEG_INFINITY;
    for n in lo..=hi {
        for step in 1..=10 {
            let c = binomial_tail_check(n, f64::from(step) * 0.05)?;
            if !c.holds {
                failures.push((n, c.gamma));
            }
            max_gap = max_gap.max(c.log2_sum - c.log2_bound);
        }
    }
    Ok(LemmaCheck {
        name: "binomial_tail",
        passed: failures.is_empty(),
        metric: max_gap,
        detail: format!(
            "sum_(k <= gamma n) C(n,k) <= 2^(n H(gamma)) for n in {lo}..={hi}, gamma in 0.05..=0.5: {} failures; max log2(sum) - n H = {max_gap:.4}",
            failures.len()
        ),
    })
}

fn log_sum_check(config: &BatteryConfig) -> Result<LemmaCheck> {
    let (lo, hi) = config.log_sum_n;
    let mut worst = (0.0f64, lo);
    for n in lo..=hi {
        let d = log_binomial_sum_check(n)?.deviation.unwrap_or(0.0);
        if d > worst.0 {
            worst = (d, n);
        }
    }
    Ok(LemmaCheck {
        name: "log_binomial_sum",
        passed: worst.0 <= 2.0,
        metric: worst.0,
        detail: format!(
            "|sum ln C(n,k) - n^2/2| / (n ln n) for n in {lo}..={hi}: max {:.6} at n = {}",
            worst.0, worst.1
        ),
    })
}

fn mertens_check(config: &BatteryConfig) -> Result<LemmaCheck> {
    let m = mertens_product(config.mertens_x)?;
    Ok(LemmaCheck {
        name: "mertens_product",
        passed: (0.95..=1.05).contains(&m.ratio),
        metric: m.ratio,
        detail: format!(
            "prod_(p <= {}) (1 - 1/p) = {:.8e}, e^-gamma / ln x = {:.8e}, ratio {:.6}",
            m.x, m.product, m.asymptotic, m.ratio
        ),
    })
}

/// `max ln τ(n) · ln ln n / (ln n · ln 2)` over `3 <= n <= n_max`, divisor counts by sieve.
pub(crate) fn divisor_growth(n_max: u64) -> (f64, u64) {
    let size = n_max as usize + 1;
    let mut tau = vec![0u32; size];
    for d in 1..size {
        for m in (d..size).step_by(d) {
            tau[m] += 1;
        }
    }
    let mut worst = (0.0, 3);
    for (n, &t) in tau.iter().enumerate().skip(3) {
        let ln = (n as f64).ln();
        let ratio = f64::from(t).ln() * ln.ln() / (ln * std::f64::consts::LN_2);
        if ratio > worst.0 {
            worst = (ratio, n as u64);
        }
    }
    worst
}

fn divisor_growth_check(config: &BatteryConfig) -> LemmaCheck {
    let (ratio, at) = divisor_growth(config.tau_n_max);
    LemmaCheck {
        name: "divisor_growth",
        passed: ratio <= 1.6,
        metric: ratio,
        detail: format!(
            "max ln tau(n) ln ln n / (ln n ln 2) over 3 <= n <= {}: {ratio:.6} at n = {at}",
            config.tau_n_max
        ),
    }
}

fn totient_check(config: &BatteryConfig) -> Result<LemmaCheck> {
    let (lo, hi) = config.totient_r;
    let mut values = Vec::new();
    for r in lo..=hi {
        let p = odd_primorial(r)?;
        let f = Factorization::from_parts(p.primes().into_iter().map(|q| (BigUint::from(q), 1)), BigUint::one());
        let phi = euler_phi(&f)?;
        let ratio = phi.to_f64().unwrap_or(f64::NAN) / p.k.to_f64().unwrap_or(f64::NAN);
        let ln_k = crate::arith::ln_big(&p.k);
        values.push(ratio * ln_k.ln());
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rendered: Vec<String> = values.iter().map(|v| format!("{v:.4}")).collect();
    Ok(LemmaCheck {
        name: "primorial_totient",
        passed: max <= 1.3,
        metric: max,
        detail: format!("phi(k) ln ln k / k for r in {lo}..={hi}: [{}]", rendered.join(", ")),
    })
}
