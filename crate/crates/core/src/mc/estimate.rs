use std::collections::BTreeMap;

use serde::Serialize;

use super::tree::{count_vnn, replicate_rng, simulate_vnn, SampleOutcome};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::offspring::OffspringLaw;
use crate::special::{wilson_interval, Z95};

/// Default per-replicate node budget.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Replicates allowed to be censored before an estimate is refused.
const MAX_CENSORED_FRAC: f64 = 1e-3;

/// Replicates per work item; fixed so that the work split does not depend
/// on the thread count.
const CHUNK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrackMode {
    /// Pruned evaluation of `V_{N,n}` alone.
    SubtreesOnly,
    /// Full trees, also recording `nu_n`.
    WithProgeny,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub arity: usize,
    pub height: usize,
    pub reps: u64,
    pub seed: u64,
    pub budget: u64,
    pub mode: TrackMode,
    pub execution: Execution,
}

impl McConfig {
    pub fn new(arity: usize, height: usize, reps: u64, seed: u64) -> Self {
        McConfig {
            arity,
            height,
            reps,
            seed,
            budget: DEFAULT_BUDGET,
            mode: TrackMode::SubtreesOnly,
            execution: Execution::Auto,
        }
    }
}

/// Estimate of `P(V_{N,n} = j)` among completed replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub j: u64,
    pub count: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub wilson: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub arity: usize,
    pub height: usize,
    pub seed: u64,
    pub reps: u64,
    pub completed: u64,
    pub censored_frac: f64,
    pub estimates: Vec<Estimate>,
    /// Estimate of `P(V_{N,n} > 0)`.
    pub tau_hat: f64,
    pub tau_stderr: f64,
    pub tau_wilson: (f64, f64),
    pub mean_v: f64,
    pub mean_progeny: Option<f64>,
}

impl MonteCarloSummary {
    pub fn p_hat(&self, j: u64) -> f64 {
        self.estimates.iter().find(|e| e.j == j).map(|e| e.p_hat).unwrap_or(0.0)
    }
}

#[derive(Default)]
struct Tally {
    counts: BTreeMap<u64, u64>,
    censored: u64,
    progeny_sum: u128,
}

fn validate(cfg: &McConfig) -> Result<()> {
    if cfg.reps == 0 {
        return Err(Error::ParamOutOfRange("reps must be positive".into()));
    }
    if cfg.arity == 0 {
        return Err(Error::Domain("arity must be at least 1".into()));
    }
    if cfg.budget == 0 {
        return Err(Error::ParamOutOfRange("budget must be positive".into()));
    }
    Ok(())
}

/// Runs the replicates and summarizes them, however many were censored.
///
/// Replicate `i` draws from its own stream `i` of a ChaCha8 generator seeded
/// with `seed`, and tallies are merged in replicate order, so the result is
/// the same for every [`Execution`].
pub fn mc_run(law: &OffspringLaw, cfg: &McConfig) -> Result<MonteCarloSummary> {
    validate(cfg)?;
    let sampler = law.sampler();
    let chunks = cfg.reps.div_ceil(CHUNK);
    let tallies = map_indexed(cfg.execution, chunks as usize, |c| {
        let start = c as u64 * CHUNK;
        let end = (start + CHUNK).min(cfg.reps);
        let mut tally = Tally::default();
        for i in start..end {
            let mut rng = replicate_rng(cfg.seed, i);
            let out = match cfg.mode {
                TrackMode::SubtreesOnly => count_vnn(&sampler, cfg.arity, cfg.height, &mut rng, cfg.budget),
                TrackMode::WithProgeny => simulate_vnn(&sampler, cfg.arity, cfg.height, &mut rng, cfg.budget),
            };
            match out {
                SampleOutcome::Complete { subtrees, progeny } => {
                    *tally.counts.entry(subtrees).or_insert(0) += 1;
                    tally.progeny_sum += progeny.unwrap_or(0) as u128;
                }
                SampleOutcome::Censored => tally.censored += 1,
            }
        }
        tally
    });

    let mut total = Tally::default();
    for t in tallies {
        for (j, c) in t.counts {
            *total.counts.entry(j).or_insert(0) += c;
        }
        total.censored += t.censored;
        total.progeny_sum += t.progeny_sum;
    }

    let completed = cfg.reps - total.censored;
    let n = completed as f64;
    let estimates: Vec<Estimate> = total
        .counts
        .iter()
        .map(|(&j, &count)| {
            let p_hat = count as f64 / n;
            Estimate {
                j,
                count,
                p_hat,
                stderr: (p_hat * (1.0 - p_hat) / n).sqrt(),
                wilson: wilson_interval(count, completed, Z95),
            }
        })
        .collect();
    let positive: u64 = total.counts.iter().filter(|(&j, _)| j > 0).map(|(_, &c)| c).sum();
    let (tau_hat, tau_stderr, mean_v) = if completed == 0 {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        let tau = positive as f64 / n;
        let v_sum: f64 = total.counts.iter().map(|(&j, &c)| j as f64 * c as f64).sum();
        (tau, (tau * (1.0 - tau) / n).sqrt(), v_sum / n)
    };
    let mean_progeny = match cfg.mode {
        TrackMode::WithProgeny if completed > 0 => Some(total.progeny_sum as f64 / n),
        _ => None,
    };
    Ok(MonteCarloSummary {
        arity: cfg.arity,
        height: cfg.height,
        seed: cfg.seed,
        reps: cfg.reps,
        completed,
        censored_frac: total.censored as f64 / cfg.reps as f64,
        estimates,
        tau_hat,
        tau_stderr,
        tau_wilson: wilson_interval(positive, completed, Z95),
        mean_v,
        mean_progeny,
    })
}

/// [`mc_run`], refusing results where more than 0.1% of replicates hit the
/// node budget.
pub fn mc_estimate(law: &OffspringLaw, cfg: &McConfig) -> Result<MonteCarloSummary> {
    let summary = mc_run(law, cfg)?;
    if summary.censored_frac > MAX_CENSORED_FRAC {
        return Err(Error::BudgetDominated { censored_frac: summary.censored_frac });
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::offspring::LawSpec;

    #[test]
    fn rejects_zero_reps() {
        let law = OffspringLaw::deterministic(2);
        let cfg = McConfig::new(2, 2, 0, 1);
        assert!(matches!(mc_estimate(&law, &cfg), Err(Error::ParamOutOfRange(_))));
    }

    #[test]
    fn deterministic_law_is_exact() {
        let law = OffspringLaw::deterministic(2);
        let mut cfg = McConfig::new(2, 5, 300, 9);
        cfg.mode = TrackMode::WithProgeny;
        let s = mc_estimate(&law, &cfg).unwrap();
        assert_eq!(s.estimates.len(), 1);
        assert_eq!(s.estimates[0].j, 1);
        assert_eq!(s.tau_hat, 1.0);
        assert_eq!(s.mean_progeny, Some(63.0));
    }

    #[test]
    fn budget_domination_is_reported() {
        let law = OffspringLaw::deterministic(3);
        let mut cfg = McConfig::new(2, 12, 50, 1);
        cfg.budget = 100;
        assert!(matches!(mc_estimate(&law, &cfg), Err(Error::BudgetDominated { .. })));
        let s = mc_run(&law, &cfg).unwrap();
        assert_eq!(s.censored_frac, 1.0);
        assert_eq!(s.completed, 0);
    }

    #[test]
    fn independent_of_execution() {
        let law = OffspringLaw::new(LawSpec::Poisson { m: 4.0 }).unwrap();
        let mut cfg = McConfig::new(2, 4, 5000, 42);
        cfg.execution = Execution::Sequential;
        let a = mc_estimate(&law, &cfg).unwrap();
        cfg.execution = Execution::Parallel { workers: 4 };
        let b = mc_estimate(&law, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
