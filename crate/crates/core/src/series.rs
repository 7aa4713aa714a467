//! Truncated power series in the progeny variable `s`.
//!
//! All arithmetic silently drops degrees above the truncation degree `T`.
//! Coefficients of degree `<= T` stay exact because every operand has only
//! non-negative powers.

use crate::error::{Error, Result};
use crate::offspring::OffspringLaw;

/// Polynomial `c_0 + c_1 s + ... + c_T s^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<f64>,
}

/// Binary and unary operations accepted by [`series_arith`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesOp {
    Add,
    Sub,
    Mul,
    Scale(f64),
    Shift,
}

impl TruncatedSeries {
    pub fn zeros(degree: usize) -> Self {
        Self { coeffs: vec![0.0; degree + 1] }
    }

    pub fn constant(degree: usize, c: f64) -> Self {
        let mut out = Self::zeros(degree);
        out.coeffs[0] = c;
        out
    }

    /// `c * s^power`, zero if `power > degree`.
    pub fn monomial(degree: usize, power: usize, c: f64) -> Self {
        let mut out = Self::zeros(degree);
        if power <= degree {
            out.coeffs[power] = c;
        }
        out
    }

    /// Panics on an empty list; a series has at least the constant term.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        Self { coeffs }
    }

    /// Truncation degree `T`.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, t: usize) -> f64 {
        self.coeffs.get(t).copied().unwrap_or(0.0)
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Value of the truncated polynomial at `s`.
    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    /// Sum of all retained coefficients, the value at `s = 1`.
    pub fn mass(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    fn lowest_nonzero(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0.0)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.degree() != other.degree() {
            return Err(Error::TruncationMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { coeffs })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Self { coeffs })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = Self::zeros(self.degree());
        mul_into(&self.coeffs, &other.coeffs, &mut out.coeffs);
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Multiplies by `s`, dropping the top coefficient.
    pub fn shift(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        coeffs.push(0.0);
        coeffs.extend_from_slice(&self.coeffs[..self.coeffs.len() - 1]);
        Self { coeffs }
    }

    /// `self^k` by repeated squaring.
    pub fn pow(&self, mut k: usize) -> Self {
        let mut result = Self::constant(self.degree(), 1.0);
        let mut base = self.clone();
        let mut scratch = Self::zeros(self.degree());
        while k > 0 {
            if k & 1 == 1 {
                mul_into(&result.coeffs, &base.coeffs, &mut scratch.coeffs);
                std::mem::swap(&mut result, &mut scratch);
            }
            k >>= 1;
            if k > 0 {
                mul_into(&base.coeffs, &base.coeffs, &mut scratch.coeffs);
                std::mem::swap(&mut base, &mut scratch);
            }
        }
        result
    }
}

/// Naive truncated convolution `out = a * b`, skipping leading zeros.
fn mul_into(a: &[f64], b: &[f64], out: &mut [f64]) {
    let top = out.len() - 1;
    out.iter_mut().for_each(|c| *c = 0.0);
    let lo_a = a.iter().position(|&c| c != 0.0);
    let lo_b = b.iter().position(|&c| c != 0.0);
    let (Some(lo_a), Some(lo_b)) = (lo_a, lo_b) else {
        return;
    };
    for i in lo_a..=top.saturating_sub(lo_b) {
        let ai = a[i];
        if ai == 0.0 || i + lo_b > top {
            continue;
        }
        for j in lo_b..=top - i {
            out[i + j] += ai * b[j];
        }
    }
}

/// Applies one [`SeriesOp`]; `b` is ignored by the unary operations.
pub fn series_arith(a: &TruncatedSeries, b: &TruncatedSeries, op: SeriesOp) -> Result<TruncatedSeries> {
    match op {
        SeriesOp::Add => a.try_add(b),
        SeriesOp::Sub => a.try_sub(b),
        SeriesOp::Mul => a.try_mul(b),
        SeriesOp::Scale(c) => Ok(a.scale(c)),
        SeriesOp::Shift => Ok(a.shift()),
    }
}

/// Truncated series of `T_k(phi(s)) = sum_i p_i C(i,k) phi(s)^(i-k)`.
///
/// Horner runs over the materialized coefficients. When `phi` has no
/// constant term only `i - k <= T` contributes.
pub fn series_taylor_coeff(law: &OffspringLaw, k: usize, phi: &TruncatedSeries) -> Result<TruncatedSeries> {
    let c0 = phi.coeff(0);
    if c0.is_nan() || !(0.0..1.0).contains(&c0) {
        return Err(Error::Domain(format!("series constant term {c0} is outside [0, 1)")));
    }
    let degree = phi.degree();
    let upto = match phi.lowest_nonzero() {
        None => k,
        Some(0) => usize::MAX,
        Some(low) => k.saturating_add(degree / low),
    };
    let weights = law.binomial_weights(k, upto);
    let mut acc = TruncatedSeries::zeros(degree);
    let mut scratch = TruncatedSeries::zeros(degree);
    for &w in weights.iter().rev() {
        mul_into(&acc.coeffs, &phi.coeffs, &mut scratch.coeffs);
        scratch.coeffs[0] += w;
        std::mem::swap(&mut acc, &mut scratch);
    }
    Ok(acc)
}

/// Truncated series of `G_N(psi(s), phi(s); j)`.
pub fn series_g_eval(
    law: &OffspringLaw,
    psi: &TruncatedSeries,
    phi: &TruncatedSeries,
    j: usize,
    arity: usize,
) -> Result<TruncatedSeries> {
    psi.check_same(phi)?;
    if arity == 0 {
        return Err(Error::Domain("arity must be at least 1".into()));
    }
    let psi0 = psi.coeff(0);
    if psi0.is_nan() || !(0.0..=1.0).contains(&psi0) {
        return Err(Error::Domain(format!("series constant term {psi0} is outside [0, 1]")));
    }
    let first = j * arity;
    let mut power = psi.pow(first);
    let mut out = TruncatedSeries::zeros(psi.degree());
    let mut scratch = TruncatedSeries::zeros(psi.degree());
    for k in first..first + arity {
        if power.lowest_nonzero().is_none() {
            break;
        }
        if law.max_degree().is_some_and(|d| k > d) {
            break;
        }
        let tk = series_taylor_coeff(law, k, phi)?;
        mul_into(&power.coeffs, &tk.coeffs, &mut scratch.coeffs);
        out.coeffs.iter_mut().zip(&scratch.coeffs).for_each(|(o, s)| *o += s);
        if k + 1 < first + arity {
            mul_into(&power.coeffs, &psi.coeffs, &mut scratch.coeffs);
            std::mem::swap(&mut power, &mut scratch);
        }
    }
    Ok(out)
}
