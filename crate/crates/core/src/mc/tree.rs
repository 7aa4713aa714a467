use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::offspring::OffspringSampler;

/// Result of evaluating one random tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleOutcome {
    Complete {
        /// `V_{N,n}` at the root.
        subtrees: u64,
        /// `nu_n`, when the whole tree up to depth `n` was generated.
        progeny: Option<u64>,
    },
    /// More than `budget` nodes were generated.
    Censored,
}

impl SampleOutcome {
    pub fn subtrees(&self) -> Option<u64> {
        match self {
            SampleOutcome::Complete { subtrees, .. } => Some(*subtrees),
            SampleOutcome::Censored => None,
        }
    }

    pub fn progeny(&self) -> Option<u64> {
        match self {
            SampleOutcome::Complete { progeny, .. } => *progeny,
            SampleOutcome::Censored => None,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self, SampleOutcome::Censored)
    }
}

/// The random stream of replicate `index` under `seed`.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Generates the tree to depth `height` and returns `V_{N,h}` at the root
/// for every `h = 0..=height` together with `nu_height`, or `None` when more
/// than `budget` nodes are needed.
///
/// Depth-first; only per-depth counters are kept, never the tree.
pub fn simulate_heights<R: Rng + ?Sized>(
    sampler: &OffspringSampler,
    arity: usize,
    height: usize,
    rng: &mut R,
    budget: u64,
) -> Option<(Vec<u64>, u64)> {
    assert!(arity >= 1, "arity must be at least 1");
    if height == 0 {
        return Some((vec![1], 1));
    }
    let arity = arity as u64;
    let stride = height + 1;
    // counts[d * stride + h]: children of the open node at depth d whose
    // V_{N,h-1} is positive
    let mut counts = vec![0u64; height * stride];
    let mut remaining = vec![0u64; height];
    let mut nodes = 1u64;
    let mut depth = 0usize;
    remaining[0] = sampler.sample(rng);
    loop {
        if remaining[depth] == 0 {
            let reach = height - depth;
            let row = depth * stride;
            let mut profile = Vec::with_capacity(reach + 1);
            profile.push(1u64);
            profile.extend((1..=reach).map(|h| counts[row + h] / arity));
            if depth == 0 {
                return Some((profile, nodes));
            }
            let parent = (depth - 1) * stride;
            for (h, &v) in profile.iter().enumerate() {
                if v > 0 {
                    counts[parent + h + 1] += 1;
                }
            }
            depth -= 1;
            continue;
        }
        remaining[depth] -= 1;
        nodes += 1;
        if nodes > budget {
            return None;
        }
        if depth + 1 == height {
            counts[depth * stride + 1] += 1;
        } else {
            depth += 1;
            remaining[depth] = sampler.sample(rng);
            counts[depth * stride..(depth + 1) * stride].fill(0);
        }
    }
}

/// `(V_{N,n}, nu_n)` from a fully generated tree.
pub fn simulate_vnn<R: Rng + ?Sized>(
    sampler: &OffspringSampler,
    arity: usize,
    height: usize,
    rng: &mut R,
    budget: u64,
) -> SampleOutcome {
    match simulate_heights(sampler, arity, height, rng, budget) {
        Some((profile, nu)) => SampleOutcome::Complete {
            subtrees: profile[height],
            progeny: Some(nu),
        },
        None => SampleOutcome::Censored,
    }
}

/// `V_{N,n}` without `nu_n`, generating only what the count depends on.
///
/// Below the root a node is positive as soon as `N` of its children are,
/// and negative once too few unvisited children remain; nodes with fewer
/// than `N` children are never expanded. `budget` bounds visited nodes.
pub fn count_vnn<R: Rng + ?Sized>(
    sampler: &OffspringSampler,
    arity: usize,
    height: usize,
    rng: &mut R,
    budget: u64,
) -> SampleOutcome {
    assert!(arity >= 1, "arity must be at least 1");
    if height == 0 {
        return SampleOutcome::Complete { subtrees: 1, progeny: None };
    }
    let arity = arity as u64;
    let mut remaining = vec![0u64; height];
    let mut positives = vec![0u64; height];
    let mut nodes = 1u64;
    let mut depth = 0usize;
    remaining[0] = sampler.sample(rng);
    loop {
        let decided = if depth > 0 && positives[depth] >= arity {
            Some(true)
        } else if positives[depth] + remaining[depth] < arity || remaining[depth] == 0 {
            Some(false)
        } else {
            None
        };
        if let Some(positive) = decided {
            if depth == 0 {
                return SampleOutcome::Complete {
                    subtrees: positives[0] / arity,
                    progeny: None,
                };
            }
            depth -= 1;
            if positive {
                positives[depth] += 1;
            }
            continue;
        }
        remaining[depth] -= 1;
        nodes += 1;
        if nodes > budget {
            return SampleOutcome::Censored;
        }
        if depth + 1 == height {
            positives[depth] += 1;
            continue;
        }
        let children = sampler.sample(rng);
        if children >= arity {
            depth += 1;
            remaining[depth] = children;
            positives[depth] = 0;
        }
    }
}
