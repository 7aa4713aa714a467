//! Offspring laws of a Galton-Watson process.
//!
//! Every law is validated on construction and carries a materialized
//! coefficient list `p_0..p_K`. Infinite-support families are truncated once
//! the remaining tail mass drops below `epsilon_tail`.
//!
//! Derivatives of the pgf are only ever exposed in scaled form,
//! `T_k(y) = f^(k)(y) / k!`, which stays finite where raw derivatives would
//! overflow.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{ln_choose, ln_factorial};

/// Default tail-mass bound for materializing infinite-support laws.
pub const DEFAULT_EPSILON_TAIL: f64 = 1e-12;

/// Largest accepted coefficient list for [`LawSpec::Generic`].
pub const MAX_GENERIC_COEFFS: usize = 1_000_000;

const GENERIC_NORM_TOL: f64 = 1e-9;

/// Parameters of an offspring family, as read from a JSON law spec such as
/// `{"family":"geometric","p":0.9285714285714286}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum LawSpec {
    /// `f(s) = 1 - b/(1-p) + b s/(1-p s)`.
    FractionalLinear { p: f64, b: f64 },
    /// `p_k = (1-p) p^k`.
    Geometric { p: f64 },
    /// `f(s) = exp(m (s-1))`.
    Poisson { m: f64 },
    /// `p_1 = 1-p`, `p_r = p`.
    OneOrMany { p: f64, r: u32 },
    /// Explicit finite pmf `p_0..p_K`.
    Generic { coeffs: Vec<f64> },
}

impl LawSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LawSpec::FractionalLinear { .. } => "fractional-linear",
            LawSpec::Geometric { .. } => "geometric",
            LawSpec::Poisson { .. } => "poisson",
            LawSpec::OneOrMany { .. } => "one-or-many",
            LawSpec::Generic { .. } => "generic",
        }
    }

    /// Geometric law with the given mean `m = p/(1-p)`.
    pub fn geometric_with_mean(m: f64) -> Self {
        LawSpec::Geometric { p: m / (1.0 + m) }
    }
}

/// A validated offspring distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringLaw {
    spec: LawSpec,
    coeffs: Vec<f64>,
    mean: f64,
    epsilon_tail: f64,
}

fn out_of_range(msg: impl Into<String>) -> Error {
    Error::ParamOutOfRange(msg.into())
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v.is_nan() || !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("{name} = {v} is outside [0, 1]")));
    }
    Ok(())
}

impl OffspringLaw {
    pub fn new(spec: LawSpec) -> Result<Self> {
        Self::with_epsilon_tail(spec, DEFAULT_EPSILON_TAIL)
    }

    pub fn with_epsilon_tail(spec: LawSpec, epsilon_tail: f64) -> Result<Self> {
        if !(epsilon_tail > 0.0 && epsilon_tail < 1e-3) {
            return Err(out_of_range(format!("epsilon_tail = {epsilon_tail}")));
        }
        validate(&spec)?;
        let coeffs = materialize(&spec, epsilon_tail);
        let mean = match &spec {
            LawSpec::FractionalLinear { p, b } => b / ((1.0 - p) * (1.0 - p)),
            LawSpec::Geometric { p } => p / (1.0 - p),
            LawSpec::Poisson { m } => *m,
            LawSpec::OneOrMany { p, r } => 1.0 - p + p * f64::from(*r),
            LawSpec::Generic { coeffs } => coeffs
                .iter()
                .enumerate()
                .map(|(k, &pk)| k as f64 * pk)
                .sum(),
        };
        Ok(Self { spec, coeffs, mean, epsilon_tail })
    }

    /// Convenience constructor for [`LawSpec::Generic`].
    pub fn generic(coeffs: Vec<f64>) -> Result<Self> {
        Self::new(LawSpec::Generic { coeffs })
    }

    /// The deterministic law `f(s) = s^n` whose family tree is the complete
    /// `n`-ary tree.
    pub fn deterministic(n: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        Self::generic(coeffs).expect("point mass is a valid pmf")
    }

    pub fn spec(&self) -> &LawSpec {
        &self.spec
    }

    pub fn family_name(&self) -> &'static str {
        self.spec.name()
    }

    /// Materialized `p_0..p_K`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn pk(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn epsilon_tail(&self) -> f64 {
        self.epsilon_tail
    }

    /// Largest `k` with `p_k > 0` when the support is finite.
    pub fn max_degree(&self) -> Option<usize> {
        match self.spec {
            LawSpec::OneOrMany { .. } | LawSpec::Generic { .. } => {
                self.coeffs.iter().rposition(|&c| c > 0.0)
            }
            _ => None,
        }
    }

    /// The standing assumption under which `V_N` is studied: `p_k < 1` for
    /// every `k`, and `p_k > 0` for some `k > arity`.
    ///
    /// It depends on the arity, so it is a predicate rather than a
    /// construction check.
    pub fn standing_assumption(&self, arity: usize) -> bool {
        let no_point_mass = self.coeffs.iter().all(|&c| c < 1.0);
        let mass_above = match self.max_degree() {
            Some(k) => k > arity,
            None => true,
        };
        no_point_mass && mass_above
    }

    /// `f(s)`.
    pub fn pgf(&self, s: f64) -> Result<f64> {
        check_unit("s", s)?;
        Ok(match &self.spec {
            LawSpec::FractionalLinear { p, b } => 1.0 - b / (1.0 - p) + b * s / (1.0 - p * s),
            LawSpec::Geometric { p } => (1.0 - p) / (1.0 - p * s),
            LawSpec::Poisson { m } => (m * (s - 1.0)).exp(),
            LawSpec::OneOrMany { p, r } => (1.0 - p) * s + p * s.powi(*r as i32),
            LawSpec::Generic { .. } => horner(&self.coeffs, s),
        })
    }

    /// Scaled Taylor coefficient `T_k(y) = f^(k)(y) / k!`.
    pub fn taylor_coeff(&self, k: usize, y: f64) -> Result<f64> {
        check_unit("y", y)?;
        Ok(self.taylor_coeff_unchecked(k, y))
    }

    /// `ln T_k(y)`; `-inf` where the coefficient vanishes.
    pub fn ln_taylor_coeff(&self, k: usize, y: f64) -> Result<f64> {
        check_unit("y", y)?;
        Ok(self.ln_taylor_coeff_unchecked(k, y))
    }

    pub(crate) fn taylor_coeff_unchecked(&self, k: usize, y: f64) -> f64 {
        match &self.spec {
            LawSpec::FractionalLinear { .. } | LawSpec::Geometric { .. } | LawSpec::Poisson { .. }
                if k > 0 =>
            {
                self.ln_taylor_coeff_unchecked(k, y).exp()
            }
            LawSpec::FractionalLinear { .. } | LawSpec::Geometric { .. } => {
                self.pgf(y).unwrap_or(f64::NAN)
            }
            LawSpec::Poisson { m } => (m * (y - 1.0)).exp(),
            LawSpec::OneOrMany { p, r } => {
                let r = *r as usize;
                match k {
                    0 => (1.0 - p) * y + p * y.powi(r as i32),
                    1 => (1.0 - p) + p * r as f64 * y.powi(r as i32 - 1),
                    _ if k <= r => p * (ln_choose(r as u64, k as u64)).exp() * y.powi((r - k) as i32),
                    _ => 0.0,
                }
            }
            LawSpec::Generic { .. } => scaled_sum(&self.coeffs, k, y),
        }
    }

    pub(crate) fn ln_taylor_coeff_unchecked(&self, k: usize, y: f64) -> f64 {
        match &self.spec {
            LawSpec::FractionalLinear { p, b } if k > 0 => {
                b.ln() + (k as f64 - 1.0) * p.ln() - (k as f64 + 1.0) * (-p * y).ln_1p()
            }
            LawSpec::Geometric { p } => {
                (-p).ln_1p() + k as f64 * p.ln() - (k as f64 + 1.0) * (-p * y).ln_1p()
            }
            LawSpec::Poisson { m } => k as f64 * m.ln() + m * (y - 1.0) - ln_factorial(k as u64),
            _ => self.taylor_coeff_unchecked(k, y).ln(),
        }
    }

    /// Ratio `T_{k+1}(y) / T_k(y)` for families where it has a closed form.
    pub(crate) fn taylor_ratio(&self, k: usize, y: f64) -> Option<f64> {
        match &self.spec {
            LawSpec::FractionalLinear { p, .. } if k >= 1 => Some(p / (1.0 - p * y)),
            LawSpec::Geometric { p } => Some(p / (1.0 - p * y)),
            LawSpec::Poisson { m } => Some(m / (k + 1) as f64),
            _ => None,
        }
    }

    /// `p_i * C(i, k)` for `i = k..=upto` (clipped to the materialized
    /// support). Entry `d` of the result belongs to `i = k + d`.
    pub fn binomial_weights(&self, k: usize, upto: usize) -> Vec<f64> {
        let top = upto.min(self.coeffs.len().saturating_sub(1));
        if k > top {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(top - k + 1);
        let mut binom = 1.0f64;
        for i in k..=top {
            if i > k {
                binom *= i as f64 / (i - k) as f64;
            }
            let w = if binom.is_finite() {
                self.coeffs[i] * binom
            } else if self.coeffs[i] > 0.0 {
                (self.coeffs[i].ln() + ln_choose(i as u64, k as u64)).exp()
            } else {
                0.0
            };
            out.push(w);
        }
        out
    }

    /// Precomputed sampler for this law.
    pub fn sampler(&self) -> OffspringSampler {
        match &self.spec {
            LawSpec::FractionalLinear { p, b } => OffspringSampler::ZeroModifiedGeometric {
                p0: 1.0 - b / (1.0 - p),
                ln_p: p.ln(),
            },
            LawSpec::Geometric { p } => OffspringSampler::Geometric { ln_p: p.ln() },
            LawSpec::Poisson { m } => {
                OffspringSampler::Poisson(Poisson::new(*m).expect("validated Poisson mean"))
            }
            LawSpec::OneOrMany { p, r } => OffspringSampler::TwoPoint { p: *p, r: u64::from(*r) },
            LawSpec::Generic { coeffs } => {
                let mut acc = 0.0;
                let cdf = coeffs
                    .iter()
                    .map(|c| {
                        acc += c;
                        acc
                    })
                    .collect();
                OffspringSampler::Table { cdf }
            }
        }
    }

    /// Draws one offspring count. For repeated sampling build a
    /// [`OffspringSampler`] once instead.
    pub fn sample_offspring<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.sampler().sample(rng)
    }
}

fn validate(spec: &LawSpec) -> Result<()> {
    let open_unit = |v: f64| v > 0.0 && v < 1.0;
    match spec {
        LawSpec::FractionalLinear { p, b } => {
            if !open_unit(*p) {
                return Err(out_of_range(format!("fractional-linear p = {p} not in (0,1)")));
            }
            if !(*b > 0.0 && *b <= 1.0 - p) {
                return Err(out_of_range(format!("fractional-linear b = {b} not in (0, 1-p]")));
            }
        }
        LawSpec::Geometric { p } => {
            if !open_unit(*p) {
                return Err(out_of_range(format!("geometric p = {p} not in (0,1)")));
            }
        }
        LawSpec::Poisson { m } => {
            if !(*m > 0.0 && m.is_finite()) {
                return Err(out_of_range(format!("Poisson m = {m} must be positive")));
            }
        }
        LawSpec::OneOrMany { p, r } => {
            if !open_unit(*p) {
                return Err(out_of_range(format!("one-or-many p = {p} not in (0,1)")));
            }
            if *r < 2 {
                return Err(out_of_range(format!("one-or-many r = {r} must exceed 1")));
            }
        }
        LawSpec::Generic { coeffs } => {
            if coeffs.is_empty() || coeffs.len() > MAX_GENERIC_COEFFS {
                return Err(out_of_range(format!(
                    "generic law needs 1..={MAX_GENERIC_COEFFS} coefficients, got {}",
                    coeffs.len()
                )));
            }
            if let Some(bad) = coeffs.iter().find(|c| c.is_nan() || !(0.0..=1.0).contains(*c)) {
                return Err(out_of_range(format!("generic coefficient {bad} not in [0,1]")));
            }
            let sum: f64 = coeffs.iter().sum();
            if (sum - 1.0).abs() > GENERIC_NORM_TOL {
                return Err(Error::PmfNotNormalized { sum });
            }
        }
    }
    Ok(())
}

fn materialize(spec: &LawSpec, eps: f64) -> Vec<f64> {
    match spec {
        LawSpec::FractionalLinear { p, b } => {
            let mut coeffs = vec![1.0 - b / (1.0 - p)];
            let mut pk = *b;
            // tail after index K is b p^K / (1-p)
            loop {
                coeffs.push(pk);
                if pk * p / (1.0 - p) < eps {
                    break;
                }
                pk *= p;
            }
            coeffs
        }
        LawSpec::Geometric { p } => {
            let mut coeffs = Vec::new();
            let mut pk = 1.0 - p;
            // tail after index K is p^(K+1)
            loop {
                coeffs.push(pk);
                if pk * p / (1.0 - p) < eps {
                    break;
                }
                pk *= p;
            }
            coeffs
        }
        LawSpec::Poisson { m } => {
            let mut coeffs = Vec::new();
            let mut k = 0usize;
            loop {
                let pk = (k as f64 * m.ln() - m - ln_factorial(k as u64)).exp();
                coeffs.push(pk);
                // past the mode the tail is dominated by a geometric series
                let ratio = m / (k + 2) as f64;
                if ratio < 1.0 {
                    let next = pk * m / (k + 1) as f64;
                    if next / (1.0 - ratio) < eps {
                        break;
                    }
                }
                k += 1;
            }
            coeffs
        }
        LawSpec::OneOrMany { p, r } => {
            let mut coeffs = vec![0.0; *r as usize + 1];
            coeffs[1] = 1.0 - p;
            coeffs[*r as usize] = *p;
            coeffs
        }
        LawSpec::Generic { coeffs } => {
            let last = coeffs.iter().rposition(|&c| c > 0.0).unwrap_or(0);
            coeffs[..=last].to_vec()
        }
    }
}

fn horner(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
}

/// `sum_{i >= k} p_i C(i,k) y^(i-k)` by Horner over the binomial weights.
fn scaled_sum(coeffs: &[f64], k: usize, y: f64) -> f64 {
    if k >= coeffs.len() {
        return 0.0;
    }
    let mut binom = 1.0f64;
    let mut weights = Vec::with_capacity(coeffs.len() - k);
    for i in k..coeffs.len() {
        if i > k {
            binom *= i as f64 / (i - k) as f64;
        }
        if binom.is_finite() {
            weights.push(coeffs[i] * binom);
        } else if coeffs[i] > 0.0 {
            weights.push((coeffs[i].ln() + ln_choose(i as u64, k as u64)).exp());
        } else {
            weights.push(0.0);
        }
    }
    horner(&weights, y)
}

/// Exact offspring sampler with precomputed constants.
#[derive(Debug, Clone)]
pub enum OffspringSampler {
    Geometric { ln_p: f64 },
    ZeroModifiedGeometric { p0: f64, ln_p: f64 },
    Poisson(Poisson<f64>),
    TwoPoint { p: f64, r: u64 },
    Table { cdf: Vec<f64> },
}

impl OffspringSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            OffspringSampler::Geometric { ln_p } => {
                // inversion: U in (0,1]
                let u = 1.0 - rng.random::<f64>();
                (u.ln() / ln_p).floor() as u64
            }
            OffspringSampler::ZeroModifiedGeometric { p0, ln_p } => {
                let u = rng.random::<f64>();
                if u < *p0 {
                    0
                } else {
                    let v = 1.0 - (u - p0) / (1.0 - p0);
                    1 + (v.max(f64::MIN_POSITIVE).ln() / ln_p).floor() as u64
                }
            }
            OffspringSampler::Poisson(dist) => dist.sample(rng) as u64,
            OffspringSampler::TwoPoint { p, r } => {
                if rng.random::<f64>() < *p {
                    *r
                } else {
                    1
                }
            }
            OffspringSampler::Table { cdf } => {
                let u = rng.random::<f64>() * cdf.last().copied().unwrap_or(1.0);
                let idx = cdf.partition_point(|&c| c <= u);
                idx.min(cdf.len() - 1) as u64
            }
        }
    }
}
