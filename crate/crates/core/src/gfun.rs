//! The band sum `G_N(x, y; j) = sum_{k=jN}^{jN+N-1} x^k T_k(y)`.
//!
//! Summed over all `j` the bands reassemble the Taylor expansion of `f`
//! at `x + y` about `y`; each band carries one value of the subtree count.

use crate::error::{Error, Result};
use crate::offspring::OffspringLaw;

/// Arguments of one band evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GBandQuery {
    pub arity: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
}

impl GBandQuery {
    pub fn new(arity: usize, j: usize, x: f64, y: f64) -> Self {
        Self { arity, j, x, y }
    }

    fn validate(&self) -> Result<()> {
        if self.arity == 0 {
            return Err(Error::Domain("arity must be at least 1".into()));
        }
        for (name, v) in [("x", self.x), ("y", self.y)] {
            if v.is_nan() || !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Evaluates `G_N(x, y; j)`.
pub fn g_eval(law: &OffspringLaw, q: GBandQuery) -> Result<f64> {
    q.validate()?;
    Ok(band_sum(law, q.arity, q.j, q.x, q.y))
}

pub(crate) fn band_sum(law: &OffspringLaw, arity: usize, j: usize, x: f64, y: f64) -> f64 {
    let first = j * arity;
    let last = first + arity - 1;
    if x == 0.0 {
        // 0^0 = 1: only the k = 0 term survives
        return if first == 0 { law.taylor_coeff_unchecked(0, y) } else { 0.0 };
    }
    if let Some(deg) = law.max_degree() {
        if first > deg {
            return 0.0;
        }
    }
    let ln_x = x.ln();

    if law.taylor_ratio(first.max(1), y).is_some() {
        // families with a closed-form T_{k+1}/T_k: seed in log space, then
        // step by the ratio
        let mut term = (first as f64 * ln_x + law.ln_taylor_coeff_unchecked(first, y)).exp();
        let mut sum = 0.0;
        for k in first..=last {
            sum += term;
            if k == last {
                break;
            }
            term = match law.taylor_ratio(k, y) {
                Some(r) => term * x * r,
                None => ((k + 1) as f64 * ln_x + law.ln_taylor_coeff_unchecked(k + 1, y)).exp(),
            };
            if term == 0.0 {
                term = ((k + 1) as f64 * ln_x + law.ln_taylor_coeff_unchecked(k + 1, y)).exp();
            }
        }
        return sum;
    }

    (first..=last)
        .map(|k| {
            let t = law.taylor_coeff_unchecked(k, y);
            if t == 0.0 {
                return 0.0;
            }
            let direct = x.powi(k as i32) * t;
            if direct.is_finite() && direct >= 1e-300 {
                direct
            } else {
                (k as f64 * ln_x + t.ln()).exp()
            }
        })
        .sum()
}

/// Slope of `x -> G_N(1-x, x; 0)`, which telescopes to
/// `N (1-x)^(N-1) T_N(x)`. It is non-negative on `[0,1]`, so the map driving
/// the fixed-point iteration for `P(V_N = 0)` is non-decreasing.
pub fn g0_slope(law: &OffspringLaw, arity: usize, x: f64) -> Result<f64> {
    GBandQuery::new(arity, 0, 0.0, x).validate()?;
    let t = law.taylor_coeff_unchecked(arity, x);
    Ok(arity as f64 * (1.0 - x).powi(arity as i32 - 1) * t)
}
