//! Fixed points and critical values.
//!
//! `tau_N = P(V_N > 0)` is reached from `tau_{N,0} = 1` by the monotone
//! iteration `1 - tau_{N,n+1} = G_N(tau_{N,n}, 1 - tau_{N,n}; 0)`. The named
//! families additionally have scalar equations whose largest root in
//! `[0,1]` is `tau_N`; both routes are exposed so they can check each other.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfun::band_sum;
use crate::offspring::{LawSpec, OffspringLaw};
use crate::special::{binomial_band, ln_factorial, poisson_band, poisson_cdf};

/// Tolerance and iteration cap for [`tau_iterate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Keep every `tau_{N,n}` in the result.
    pub record_trajectory: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 1_000_000, record_trajectory: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointResult {
    pub tau: f64,
    pub iterations: usize,
    /// `|(1 - tau) - G_N(tau, 1 - tau; 0)|`.
    pub residual: f64,
    /// `tau_{N,0}, tau_{N,1}, ...` when requested.
    pub trajectory: Option<Vec<f64>>,
}

/// `x - G_N(1-x, x; 0)` with `x = P(V_N = 0)`.
fn extinction_gap(law: &OffspringLaw, arity: usize, x: f64) -> f64 {
    x - band_sum(law, arity, 0, 1.0 - x, x)
}

fn check_arity(arity: usize) -> Result<()> {
    if arity == 0 {
        return Err(Error::Domain("arity must be at least 1".into()));
    }
    Ok(())
}

/// Bisection to machine precision on a bracket where `f(lo)` and `f(hi)`
/// have opposite signs.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `tau_N` by the monotone iteration from `tau_{N,0} = 1`, polished by
/// bisection on `x - G_N(1-x, x; 0)` when a sign change is found next to
/// the converged iterate.
pub fn tau_iterate(law: &OffspringLaw, arity: usize, opts: SolverOptions) -> Result<FixedPointResult> {
    check_arity(arity)?;
    let mut tau = 1.0f64;
    let mut trajectory = opts.record_trajectory.then(|| vec![1.0]);
    let mut iterations = 0;
    let mut step = f64::INFINITY;
    while iterations < opts.max_iter {
        let next = (1.0 - band_sum(law, arity, 0, tau, 1.0 - tau)).clamp(0.0, tau);
        iterations += 1;
        step = tau - next;
        tau = next;
        if let Some(t) = trajectory.as_mut() {
            t.push(tau);
        }
        if step < opts.tol {
            break;
        }
    }
    if step >= opts.tol {
        return Err(Error::NoConvergence { iterations, last_step: step });
    }

    // the iterate sits at or below the smallest root in x = 1 - tau; look
    // for the first sign change just above it
    let x0 = 1.0 - tau;
    let gap = |x: f64| extinction_gap(law, arity, x);
    let mut lo = x0;
    let mut width = opts.tol.max(f64::EPSILON);
    let limit = (x0 + 1e-4).min(1.0);
    while lo < limit {
        let hi = (x0 + width).min(limit);
        if gap(hi) > 0.0 {
            if gap(lo) <= 0.0 {
                tau = 1.0 - bisect(gap, lo, hi);
            }
            break;
        }
        lo = hi;
        width *= 2.0;
    }
    let tau = tau.clamp(0.0, 1.0);
    Ok(FixedPointResult {
        tau,
        iterations,
        residual: gap(1.0 - tau).abs(),
        trajectory,
    })
}

/// Residual of the family equation whose largest root in `[0,1]` is `tau_N`.
/// Positive values lie between roots.
pub fn family_residual(law: &OffspringLaw, arity: usize, tau: f64) -> Result<f64> {
    check_arity(arity)?;
    let n = arity as i32;
    Ok(match *law.spec() {
        LawSpec::Geometric { p } => {
            // (tau + 1/m)^N = tau^(N-1)
            let inv_m = (1.0 - p) / p;
            tau.powi(n - 1) - (tau + inv_m).powi(n)
        }
        LawSpec::FractionalLinear { p, b } => {
            // 1 - p(1 - tau) = (b/(1-p))^(1/N) (p tau)^(1 - 1/N)
            let inv = 1.0 / arity as f64;
            (b / (1.0 - p)).powf(inv) * (p * tau).powf(1.0 - inv) - (1.0 - p * (1.0 - tau))
        }
        LawSpec::Poisson { m } => {
            // (1 - tau) e^{m tau} = sum_{j<N} (m tau)^j / j!, scaled by e^{-m tau}
            (1.0 - tau) - poisson_cdf(m * tau, arity as u64 - 1)
        }
        LawSpec::OneOrMany { p, r } => {
            // tau = P(Binomial(X, tau) >= N); the lone-child term only
            // matters for N = 1
            let lone = if arity == 1 { (1.0 - p) * tau } else { 0.0 };
            lone + p * binomial_band(u64::from(r), tau, arity as u64, u64::from(r)) - tau
        }
        LawSpec::Generic { .. } => return Err(Error::UnsupportedFamily("generic")),
    })
}

const SCAN_POINTS: usize = 1024;

/// Largest root in `(0, 1]` of [`family_residual`], by a sign scan over a
/// 1024-point grid from 1 downward and bisection. Returns `tau = 0` when
/// only the trivial root exists.
pub fn tau_family(law: &OffspringLaw, arity: usize) -> Result<FixedPointResult> {
    let r = |t: f64| family_residual(law, arity, t).unwrap_or(f64::NAN);
    family_residual(law, arity, 1.0)?;
    let grid = |i: usize| 1.0 - i as f64 / SCAN_POINTS as f64;
    let mut tau = 0.0;
    let mut prev = r(1.0);
    if prev == 0.0 {
        tau = 1.0;
    } else {
        for i in 1..=SCAN_POINTS {
            let t = grid(i);
            let cur = r(t);
            if cur == 0.0 && i < SCAN_POINTS {
                tau = t;
                break;
            }
            if cur * prev < 0.0 {
                tau = bisect(r, t, grid(i - 1));
                break;
            }
            prev = cur;
        }
    }
    Ok(FixedPointResult {
        tau,
        iterations: 0,
        residual: extinction_gap(law, arity, 1.0 - tau).abs(),
        trajectory: None,
    })
}

/// Families for which [`critical_mean`] is available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum CriticalFamily {
    Geometric,
    Poisson,
    /// Critical value over `p` for a fixed `r`.
    OneOrMany { r: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalValue {
    pub arity: usize,
    /// `m_crit * tau_crit`.
    pub y: f64,
    pub m_crit: f64,
    pub tau_crit: f64,
    pub family: CriticalFamily,
}

/// `e^{-y} (y^N/(N-1)! + sum_{j<N} y^j/j!) - 1`.
pub fn critical_y_residual(arity: usize, y: f64) -> f64 {
    let n = arity as u64;
    poisson_cdf(y, n - 1) + n as f64 * poisson_band(y, n, n) - 1.0
}

/// Positive root of `y^N/(N-1)! + sum_{j<N} y^j/j! = e^y` (N >= 2).
pub fn critical_y(arity: usize) -> Result<f64> {
    if arity < 2 {
        return Err(Error::Domain("critical_y needs arity >= 2".into()));
    }
    // the residual is positive just above 0 and tends to -1
    let step = 0.05;
    let mut lo = step;
    while critical_y_residual(arity, lo + step) > 0.0 {
        lo += step;
        if lo > 1e4 {
            return Err(Error::NoCriticalValue(format!("no root of the critical equation for N = {arity}")));
        }
    }
    Ok(bisect(|y| critical_y_residual(arity, y), lo, lo + step))
}

/// Which branch of the real solutions of `y = z e^y` to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeBranch {
    /// `y in [0, 1]`, equal to `sum_{k>=1} k^(k-1) z^k / k!`.
    Principal,
    /// `y >= 1`, the second real solution for `0 < z <= 1/e`.
    Upper,
}

/// Cayley tree function: the solution of `y = z e^y` on the chosen branch.
/// Safeguarded Newton iteration inside a bracket.
pub fn cayley_tree(z: f64, branch: TreeBranch) -> Result<f64> {
    let e_inv = (-1.0f64).exp();
    if z.is_nan() || z < 0.0 || z > e_inv * (1.0 + 1e-15) {
        return Err(Error::Domain(format!("z = {z} is outside [0, 1/e]")));
    }
    let z = z.min(e_inv);
    if z == 0.0 {
        return match branch {
            TreeBranch::Principal => Ok(0.0),
            TreeBranch::Upper => Err(Error::Domain("the upper branch needs z > 0".into())),
        };
    }
    let g = |y: f64| y - z * y.exp();
    let dg = |y: f64| 1.0 - z * y.exp();
    let (mut lo, mut hi, mut y) = match branch {
        TreeBranch::Principal => (0.0, 1.0, z),
        TreeBranch::Upper => {
            let mut hi = 2.0;
            while g(hi) > 0.0 {
                hi *= 2.0;
            }
            // y = ln y - ln z converges from above on this branch
            let mut y = hi;
            for _ in 0..8 {
                y = (y.ln() - z.ln()).max(1.0);
            }
            (1.0, hi, y)
        }
    };
    // g(lo) >= 0 on the upper bracket, g(lo) <= 0 on the principal one
    let lo_sign = g(lo) < 0.0;
    for _ in 0..200 {
        let gy = g(y);
        if gy == 0.0 {
            break;
        }
        if (gy < 0.0) == lo_sign {
            lo = y;
        } else {
            hi = y;
        }
        let d = dg(y);
        let newton = y - gy / d;
        let next = if d != 0.0 && newton > lo.min(hi) && newton < lo.max(hi) {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - y).abs() <= 4.0 * f64::EPSILON * y.abs().max(1.0) {
            y = next;
            break;
        }
        y = next;
    }
    Ok(y)
}

/// Number of grid points for the inner maximisation in tangency searches.
const TANGENCY_GRID: usize = 1024;

/// `max_{tau in (0,1]} R(tau)` with its argmax, by grid search and golden
/// section refinement.
fn max_residual<F: Fn(f64) -> f64>(r: F) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, 1.0);
    for i in 1..=TANGENCY_GRID {
        let t = i as f64 / TANGENCY_GRID as f64;
        let v = r(t);
        if v > best.0 {
            best = (v, t);
        }
    }
    let h = 1.0 / TANGENCY_GRID as f64;
    let (mut a, mut b) = ((best.1 - h).max(0.0), (best.1 + h).min(1.0));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (r(c), r(d));
    for _ in 0..120 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = r(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = r(d);
        }
    }
    let (v, t) = if fc > fd { (fc, c) } else { (fd, d) };
    if v > best.0 {
        (v, t)
    } else {
        best
    }
}

/// Bisection on a monotone parameter for the boundary where the family
/// equation first acquires a non-trivial root (a double root at the
/// boundary). Returns the boundary parameter and the tangency root.
fn tangency_boundary<B, F>(build: B, mut lo: f64, mut hi: f64, residual: F) -> (f64, f64)
where
    B: Fn(f64) -> OffspringLaw,
    F: Fn(&OffspringLaw, f64) -> f64,
{
    let exists = |param: f64| {
        let law = build(param);
        max_residual(|t| residual(&law, t))
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if exists(mid).0 >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (hi, exists(hi).1)
}

/// Critical offspring mean `m^c_N`: below it `tau_N = 0`, at or above it
/// `tau_N > 0`.
pub fn critical_mean(family: CriticalFamily, arity: usize) -> Result<CriticalValue> {
    check_arity(arity)?;
    if arity == 1 {
        return match family {
            CriticalFamily::Geometric | CriticalFamily::Poisson => Ok(CriticalValue {
                arity,
                y: 0.0,
                m_crit: 1.0,
                tau_crit: 0.0,
                family,
            }),
            CriticalFamily::OneOrMany { .. } => Err(Error::NoCriticalValue(
                "one-or-many laws never die out, so tau_1 = 1 for every p".into(),
            )),
        };
    }
    match family {
        CriticalFamily::Poisson => {
            let y = critical_y(arity)?;
            let m_crit = (y + ln_factorial(arity as u64 - 1) - (arity as f64 - 1.0) * y.ln()).exp();
            Ok(CriticalValue { arity, y, m_crit, tau_crit: y / m_crit, family })
        }
        CriticalFamily::Geometric => {
            let build = |m: f64| OffspringLaw::new(LawSpec::geometric_with_mean(m)).expect("m > 0");
            let residual = |law: &OffspringLaw, t: f64| family_residual(law, arity, t).unwrap_or(f64::NAN);
            let mut hi = 2.0;
            while max_residual(|t| residual(&build(hi), t)).0 < 0.0 {
                hi *= 2.0;
            }
            let (m_crit, tau_crit) = tangency_boundary(build, 1.0, hi, residual);
            Ok(CriticalValue { arity, y: m_crit * tau_crit, m_crit, tau_crit, family })
        }
        CriticalFamily::OneOrMany { r } => {
            if (r as usize) <= arity {
                return Err(Error::NoCriticalValue(format!("r = {r} must exceed N = {arity}")));
            }
            let build = |p: f64| OffspringLaw::new(LawSpec::OneOrMany { p, r }).expect("p in (0,1)");
            let residual = |law: &OffspringLaw, t: f64| family_residual(law, arity, t).unwrap_or(f64::NAN);
            let top = 1.0 - 1e-12;
            if max_residual(|t| residual(&build(top), t)).0 < 0.0 {
                return Err(Error::NoCriticalValue(format!("no p in (0,1) gives tau_{arity} > 0 for r = {r}")));
            }
            let (p_crit, tau_crit) = tangency_boundary(build, 1e-12, top, residual);
            let m_crit = 1.0 - p_crit + p_crit * f64::from(r);
            Ok(CriticalValue { arity, y: m_crit * tau_crit, m_crit, tau_crit, family })
        }
    }
}

/// Sufficient condition for `tau_N > 0` (N >= 2):
/// `2N sum_{j>=N} p_j/(j+1) <= (1 - sum_{j<N} p_j)^2`.
///
/// Reported raw. For laws with no mass at or above `N` both sides vanish
/// and the predicate is true although `tau_N = 0`.
pub fn sufficient_condition(law: &OffspringLaw, arity: usize) -> bool {
    let coeffs = law.coeffs();
    let below: f64 = coeffs.iter().take(arity).sum();
    let weighted: f64 = coeffs
        .iter()
        .enumerate()
        .skip(arity)
        .map(|(j, &p)| p / (j + 1) as f64)
        .sum();
    2.0 * arity as f64 * weighted <= (1.0 - below).powi(2)
}
