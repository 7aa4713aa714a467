//! The law of `V_N`, the number of disjoint complete `N`-ary subtrees of
//! infinite height rooted at the ancestor.
//!
//! [`pmf_vn`] works for every offspring law: `P(V_N = j) = G_N(tau, 1-tau; j)`.
//! The named families also have closed forms (zero-modified geometric,
//! Poisson bands, binomial bands) that serve as an independent check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfun::band_sum;
use crate::offspring::{LawSpec, OffspringLaw};
use crate::solver::{tau_family, tau_iterate, SolverOptions};
use crate::special::{binomial_band, poisson_band};

/// Mass left unassigned when the pmf is cut off.
pub const TAIL_TARGET: f64 = 1e-12;
/// Hard cap on the number of listed `j` values.
pub const MAX_J: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PmfTable {
    pub arity: usize,
    /// `P(V_N = j)` for `j = 0..probs.len()`.
    pub probs: Vec<f64>,
    pub mean: f64,
    /// Mass beyond the last listed `j`.
    pub tail: f64,
    /// The `tau_N` the table was built from.
    pub tau: f64,
}

impl PmfTable {
    fn point_mass_at_zero(arity: usize) -> Self {
        Self { arity, probs: vec![1.0], mean: 0.0, tail: 0.0, tau: 0.0 }
    }

    pub fn prob(&self, j: usize) -> f64 {
        self.probs.get(j).copied().unwrap_or(0.0)
    }

    /// `P(V_N >= j)`, including the unlisted tail.
    pub fn prob_at_least(&self, j: usize) -> f64 {
        self.probs.iter().skip(j).sum::<f64>() + self.tail
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum::<f64>() + self.tail
    }
}

/// Collects band probabilities until the cumulative mass reaches
/// `1 - TAIL_TARGET`, the band function reports the end of the support, or
/// `MAX_J` entries are listed.
fn collect_bands<F: FnMut(usize) -> Option<f64>>(mut band: F) -> (Vec<f64>, f64) {
    let mut probs = Vec::new();
    let mut cumulative = 0.0;
    for j in 0..MAX_J {
        match band(j) {
            Some(p) => {
                probs.push(p);
                cumulative += p;
            }
            None => break,
        }
        if cumulative >= 1.0 - TAIL_TARGET {
            break;
        }
    }
    let mean = probs.iter().enumerate().map(|(j, p)| j as f64 * p).sum();
    (probs, mean)
}

/// Distribution of `V_N` for any offspring law, with `tau_N` from the
/// monotone iteration.
pub fn pmf_vn(law: &OffspringLaw, arity: usize) -> Result<PmfTable> {
    pmf_vn_with(law, arity, SolverOptions::default())
}

pub fn pmf_vn_with(law: &OffspringLaw, arity: usize, opts: SolverOptions) -> Result<PmfTable> {
    let tau = tau_iterate(law, arity, opts)?.tau;
    if tau == 0.0 {
        return Ok(PmfTable::point_mass_at_zero(arity));
    }
    let top = law.max_degree();
    let (probs, mean) = collect_bands(|j| {
        if top.is_some_and(|d| j * arity > d) {
            return None;
        }
        Some(band_sum(law, arity, j, tau, 1.0 - tau))
    });
    let tail = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    Ok(PmfTable { arity, probs, mean, tail, tau })
}

/// Zero-modified geometric law of `V_N` under fractional linear offspring:
/// `P(V_N = j) = c (1 - theta) theta^j` for `j >= 1` with `c = b/(p(1-p))`
/// and `theta = (p tau / (1 - p(1 - tau)))^N`.
pub fn pmf_fractional_linear(p: f64, b: f64, arity: usize) -> Result<PmfTable> {
    let law = OffspringLaw::new(LawSpec::FractionalLinear { p, b })?;
    if arity == 0 {
        return Err(Error::ParamOutOfRange("arity must be at least 1".into()));
    }
    let tau = tau_family(&law, arity)?.tau;
    if tau == 0.0 {
        return Ok(PmfTable::point_mass_at_zero(arity));
    }
    let c = b / (p * (1.0 - p));
    let theta = (p * tau / (1.0 - p * (1.0 - tau))).powi(arity as i32);
    let (probs, _) = collect_bands(|j| {
        Some(if j == 0 { 1.0 - c * theta } else { c * (1.0 - theta) * theta.powi(j as i32) })
    });
    let tail = c * theta.powi(probs.len() as i32);
    let mean = c * theta / (1.0 - theta);
    Ok(PmfTable { arity, probs, mean, tail, tau })
}

/// `P(V_N = j) = P(jN <= Y <= jN + N - 1)` with `Y ~ Poisson(m tau_N)`.
pub fn pmf_poisson(m: f64, arity: usize) -> Result<PmfTable> {
    let law = OffspringLaw::new(LawSpec::Poisson { m })?;
    if arity == 0 {
        return Err(Error::ParamOutOfRange("arity must be at least 1".into()));
    }
    let tau = tau_family(&law, arity)?.tau;
    if tau == 0.0 {
        return Ok(PmfTable::point_mass_at_zero(arity));
    }
    let lambda = m * tau;
    let n = arity as u64;
    let (probs, mean) = collect_bands(|j| {
        let lo = j as u64 * n;
        Some(poisson_band(lambda, lo, lo + n - 1))
    });
    let tail = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    Ok(PmfTable { arity, probs, mean, tail, tau })
}

/// Binomial bands for one-or-many offspring (`p_1 = 1-p`, `p_r = p`,
/// `1 <= N < r`): with `B_k ~ Binomial(k, tau_N)`,
/// `P(V_N = j) = (1-p) P(jN <= B_1 <= jN+N-1) + p P(jN <= B_r <= jN+N-1)`,
/// zero once `jN > r`. For `N >= 2` the first term is `1-p` at `j = 0` and
/// vanishes otherwise.
pub fn pmf_one_or_many(p: f64, r: u32, arity: usize) -> Result<PmfTable> {
    let law = OffspringLaw::new(LawSpec::OneOrMany { p, r })?;
    if arity == 0 || arity >= r as usize {
        return Err(Error::ParamOutOfRange(format!("need 1 <= N < r, got N = {arity}, r = {r}")));
    }
    let tau = tau_family(&law, arity)?.tau;
    if tau == 0.0 {
        return Ok(PmfTable::point_mass_at_zero(arity));
    }
    let n = arity as u64;
    let r64 = u64::from(r);
    let (probs, mean) = collect_bands(|j| {
        let lo = j as u64 * n;
        if lo > r64 {
            return None;
        }
        let hi = lo + n - 1;
        Some((1.0 - p) * binomial_band(1, tau, lo, hi) + p * binomial_band(r64, tau, lo, hi))
    });
    Ok(PmfTable { arity, probs, mean, tail: 0.0, tau })
}

/// The closed-form route for whichever named family `law` belongs to.
pub fn pmf_closed_form(law: &OffspringLaw, arity: usize) -> Result<PmfTable> {
    match *law.spec() {
        LawSpec::Geometric { p } => pmf_fractional_linear(p, p * (1.0 - p), arity),
        LawSpec::FractionalLinear { p, b } => pmf_fractional_linear(p, b, arity),
        LawSpec::Poisson { m } => pmf_poisson(m, arity),
        LawSpec::OneOrMany { p, r } => pmf_one_or_many(p, r, arity),
        LawSpec::Generic { .. } => Err(Error::UnsupportedFamily("generic")),
    }
}

/// `E(s^{V_1}) = f(q + (1-q) s)` with `q` the extinction probability.
pub fn pgf_v1(law: &OffspringLaw, s: f64) -> Result<f64> {
    if s.is_nan() || !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("s = {s} is outside [0, 1]")));
    }
    let q = 1.0 - tau_iterate(law, 1, SolverOptions::default())?.tau;
    law.pgf((q + (1.0 - q) * s).min(1.0))
}
