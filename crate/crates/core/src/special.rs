//! Log-space helpers for Poisson and binomial band probabilities.

use statrs::function::gamma::ln_gamma;

pub(crate) fn ln_factorial(k: u64) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

pub(crate) fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `P(Y = k)` for `Y ~ Poisson(lambda)`.
pub fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * lambda.ln() - lambda - ln_factorial(k)).exp()
}

const SUBNORMAL_GUARD: f64 = 1e-290;

/// `P(lo <= Y <= hi)` for `Y ~ Poisson(lambda)`.
///
/// Terms are produced by the ratio recurrence from a log-space seed, so
/// large `lambda` and `hi` stay finite.
pub fn poisson_band(lambda: f64, lo: u64, hi: u64) -> f64 {
    if lo > hi {
        return 0.0;
    }
    if lambda == 0.0 {
        return if lo == 0 { 1.0 } else { 0.0 };
    }
    let mut term = poisson_pmf(lambda, lo);
    let mut sum = 0.0;
    for k in lo..=hi {
        if term < SUBNORMAL_GUARD && k > lo {
            // near underflow the recurrence loses precision; reseed
            term = poisson_pmf(lambda, k);
        }
        sum += term;
        term *= lambda / (k + 1) as f64;
    }
    sum
}

/// `P(Y <= k)` for `Y ~ Poisson(lambda)`.
pub fn poisson_cdf(lambda: f64, k: u64) -> f64 {
    poisson_band(lambda, 0, k).min(1.0)
}

/// `P(B = k)` for `B ~ Binomial(n, prob)`.
pub fn binomial_pmf(n: u64, prob: f64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    if prob == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if prob == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let ln = ln_choose(n, k) + k as f64 * prob.ln() + (n - k) as f64 * (-prob).ln_1p();
    ln.exp()
}

/// `P(lo <= B <= hi)` for `B ~ Binomial(n, prob)`; `hi` is clipped to `n`.
pub fn binomial_band(n: u64, prob: f64, lo: u64, hi: u64) -> f64 {
    let hi = hi.min(n);
    if lo > hi {
        return 0.0;
    }
    (lo..=hi).map(|k| binomial_pmf(n, prob, k)).sum()
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;
