//! Joint law of `(V_{N,n}, nu_n)` by iterating
//! `E(s^{nu_{n+1}}; V_{N,n+1} = j) = s G_N(psi_n(s), phi_n(s); j)`
//! on truncated series, where `psi_n = E(s^{nu_n}; V_{N,n} > 0)` and
//! `phi_n = E(s^{nu_n}; V_{N,n} = 0)`.
//!
//! The coefficient of `s^t` in row `j` is `P(V_{N,n} = j, nu_n = t)`, exact
//! for `t <= T`. Mass with `nu_n > T` is not represented; it is reported per
//! level as the complement of the retained mass.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::offspring::OffspringLaw;
use crate::series::{series_taylor_coeff, TruncatedSeries};

/// `(psi_0, phi_0) = (s, 0)`: the root alone is a complete subtree of height 0.
pub fn joint_init(degree: usize) -> Result<(TruncatedSeries, TruncatedSeries)> {
    if degree < 1 {
        return Err(Error::Domain("truncation degree must be at least 1".into()));
    }
    Ok((TruncatedSeries::monomial(degree, 1, 1.0), TruncatedSeries::zeros(degree)))
}

/// Default number of rows: beyond `ceil(T/N)` every row is zero up to
/// degree `T`.
pub fn default_j_max(degree: usize, arity: usize) -> usize {
    degree.div_ceil(arity.max(1))
}

/// Output of one level of the recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct JointStep {
    /// `E(s^{nu_{n+1}}; V_{N,n+1} = j)` for `j = 0..=j_max`.
    pub rows: Vec<TruncatedSeries>,
    /// `E(s^{nu_{n+1}})` minus the listed rows.
    pub tail: TruncatedSeries,
    pub psi: TruncatedSeries,
    pub phi: TruncatedSeries,
}

/// One application of the recursion.
pub fn joint_step(
    law: &OffspringLaw,
    arity: usize,
    psi: &TruncatedSeries,
    phi: &TruncatedSeries,
    j_max: usize,
    exec: Execution,
) -> Result<JointStep> {
    if arity == 0 {
        return Err(Error::Domain("arity must be at least 1".into()));
    }
    let degree = psi.degree();
    let marginal = psi.try_add(phi)?;

    // psi^k for every k used by the requested rows; with psi(0) = 0 powers
    // above T vanish
    let mut k_top = (j_max + 1) * arity - 1;
    if psi.coeff(0) == 0.0 {
        k_top = k_top.min(degree);
    }
    if let Some(d) = law.max_degree() {
        k_top = k_top.min(d);
    }
    let mut powers = Vec::with_capacity(k_top + 1);
    powers.push(TruncatedSeries::constant(degree, 1.0));
    for k in 1..=k_top {
        let next = powers[k - 1].try_mul(psi)?;
        powers.push(next);
    }

    let rows: Vec<Result<TruncatedSeries>> = map_indexed(exec, j_max + 1, |j| {
        let mut acc = TruncatedSeries::zeros(degree);
        for k in j * arity..(j + 1) * arity {
            if k > k_top {
                break;
            }
            let tk = series_taylor_coeff(law, k, phi)?;
            acc = acc.try_add(&powers[k].try_mul(&tk)?)?;
        }
        Ok(acc.shift())
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    // classical progeny recursion h_{n+1} = s f(h_n)
    let next_marginal = series_taylor_coeff(law, 0, &marginal)?.shift();
    let phi_next = rows[0].clone();
    let psi_next = next_marginal.try_sub(&phi_next)?;
    let listed = rows.iter().try_fold(TruncatedSeries::zeros(degree), |a, r| a.try_add(r))?;
    let tail = next_marginal.try_sub(&listed)?;
    Ok(JointStep { rows, tail, psi: psi_next, phi: phi_next })
}

/// Result of iterating the recursion `n` times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointTable {
    pub arity: usize,
    pub height: usize,
    pub degree: usize,
    /// Row `j` holds `P(V_{N,n} = j, nu_n = t)` at index `t`.
    pub rows: Vec<Vec<f64>>,
    /// Progeny mass not attributed to a listed row.
    pub tail: Vec<f64>,
    /// `P(nu_k <= T)` for `k = 1..=n`.
    pub retained_mass: Vec<f64>,
    /// `phi_n` at `s = 1`: `P(V_{N,n} = 0, nu_n <= T)`.
    pub phi_mass: f64,
}

impl JointTable {
    pub fn row(&self, j: usize) -> TruncatedSeries {
        match self.rows.get(j) {
            Some(r) => TruncatedSeries::from_coeffs(r.clone()),
            None => TruncatedSeries::zeros(self.degree),
        }
    }

    pub fn prob(&self, j: usize, t: usize) -> f64 {
        self.rows.get(j).and_then(|r| r.get(t)).copied().unwrap_or(0.0)
    }

    /// `P(V_{N,n} = j, nu_n <= T)`; the missing mass is
    /// [`JointTable::truncation_deficit`].
    pub fn v_marginal(&self, j: usize) -> f64 {
        self.rows.get(j).map(|r| r.iter().sum()).unwrap_or(0.0)
    }

    /// `P(nu_n = t)` for `t = 0..=T`.
    pub fn progeny_marginal(&self) -> Vec<f64> {
        (0..=self.degree)
            .map(|t| self.rows.iter().map(|r| r[t]).sum::<f64>() + self.tail[t])
            .collect()
    }

    pub fn truncation_deficit(&self) -> f64 {
        1.0 - self.retained_mass.last().copied().unwrap_or(1.0)
    }
}

/// Iterates [`joint_step`] `height` times from [`joint_init`].
pub fn joint_run(
    law: &OffspringLaw,
    arity: usize,
    height: usize,
    degree: usize,
    j_max: usize,
    exec: Execution,
) -> Result<JointTable> {
    if height == 0 {
        return Err(Error::Domain("height must be at least 1".into()));
    }
    let (mut psi, mut phi) = joint_init(degree)?;
    let mut retained_mass = Vec::with_capacity(height);
    let mut last = None;
    for _ in 0..height {
        let step = joint_step(law, arity, &psi, &phi, j_max, exec)?;
        retained_mass.push(step.psi.mass() + step.phi.mass());
        psi = step.psi.clone();
        phi = step.phi.clone();
        last = Some(step);
    }
    let step = last.expect("height >= 1");
    Ok(JointTable {
        arity,
        height,
        degree,
        rows: step.rows.into_iter().map(TruncatedSeries::into_coeffs).collect(),
        tail: step.tail.into_coeffs(),
        retained_mass,
        phi_mass: phi.mass(),
    })
}
