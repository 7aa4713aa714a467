use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::offspring::OffspringLaw;

/// Cap on the number of child-outcome tuples visited.
pub const MAX_ENUMERATED_TUPLES: u64 = 10_000_000;

const MAX_SUPPORT: usize = 4;
const MAX_HEIGHT: usize = 3;

/// Exact `P(V_{N,n} = j, nu_n = t)` by enumerating, level by level, every
/// offspring count of the root and every tuple of child outcomes.
///
/// No generating functions are involved. Keys are `(j, t)`.
pub fn brute_force_joint(law: &OffspringLaw, arity: usize, height: usize) -> Result<BTreeMap<(u64, u64), f64>> {
    if arity == 0 {
        return Err(Error::Domain("arity must be at least 1".into()));
    }
    if law.max_degree().is_none() {
        return Err(Error::TooLarge(format!("{} law has infinite support", law.family_name())));
    }
    let support: Vec<(usize, f64)> = law
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(k, &p)| (k, p))
        .collect();
    if support.len() > MAX_SUPPORT {
        return Err(Error::TooLarge(format!("support of size {} exceeds {MAX_SUPPORT}", support.len())));
    }
    if height > MAX_HEIGHT {
        return Err(Error::TooLarge(format!("height {height} exceeds {MAX_HEIGHT}")));
    }

    let arity = arity as u64;
    let mut outcomes: Vec<((u64, u64), f64)> = vec![((1, 1), 1.0)];
    let mut visited = 0u64;
    for _ in 0..height {
        let mut next: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        for &(children, p_children) in &support {
            let tuples = (outcomes.len() as u64).checked_pow(children as u32).unwrap_or(u64::MAX);
            visited = visited.saturating_add(tuples);
            if visited > MAX_ENUMERATED_TUPLES {
                return Err(Error::TooLarge(format!("more than {MAX_ENUMERATED_TUPLES} trees")));
            }
            // odometer over the child outcome indices
            let mut idx = vec![0usize; children];
            loop {
                let mut prob = p_children;
                let mut positive = 0u64;
                let mut nu = 1u64;
                for &i in &idx {
                    let ((v, n), p) = outcomes[i];
                    prob *= p;
                    nu += n;
                    if v > 0 {
                        positive += 1;
                    }
                }
                *next.entry((positive / arity, nu)).or_insert(0.0) += prob;
                let mut pos = 0;
                while pos < children {
                    idx[pos] += 1;
                    if idx[pos] < outcomes.len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if pos == children {
                    break;
                }
            }
        }
        outcomes = next.into_iter().collect();
    }
    Ok(outcomes.into_iter().collect())
}
