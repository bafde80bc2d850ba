//! Randomized coloring allocation with symmetry breaking.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ApproxError;
use crate::model::{complete_partial, Allocation, Instance};
use crate::value::{to_f64, Rational};

/// What one trial drew and kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialTrace {
    /// Items in drawn order; earlier items win conflicts.
    pub permutation: Vec<usize>,
    /// Tentative owner of each item.
    pub tentative: Vec<usize>,
    /// Whether each item kept its tentative owner.
    pub survivors: Vec<bool>,
}

/// Generator for trial `trial` under master seed `master`: one ChaCha8
/// stream per trial, so trials can run in any order or in parallel.
pub fn trial_rng(master: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng
}

/// One trial with the generator `trial_rng(seed, 0)`.
pub fn randomized_allocation(inst: &Instance, seed: u64) -> Result<(Allocation, TrialTrace), ApproxError> {
    randomized_allocation_with(inst, &mut trial_rng(seed, 0))
}

/// Draws a uniform order of the items and a uniform tentative owner per item.
/// For every conflict whose endpoints share a tentative owner, the later item
/// in the order loses its owner (judged on the tentative assignment, so an
/// item may be dropped by an already dropped neighbor). Dropped items go to
/// the lowest-index agent without a conflicting item.
pub fn randomized_allocation_with<R: Rng>(
    inst: &Instance,
    rng: &mut R,
) -> Result<(Allocation, TrialTrace), ApproxError> {
    let n = inst.n_agents();
    let m = inst.n_items();
    let delta = inst.graph().max_degree();
    if n <= delta {
        return Err(ApproxError::TooFewAgents { agents: n, max_degree: delta });
    }
    let mut permutation: Vec<usize> = (0..m).collect();
    permutation.shuffle(rng);
    let tentative: Vec<usize> = (0..m).map(|_| rng.random_range(0..n)).collect();
    let mut rank = vec![0usize; m];
    for (r, &j) in permutation.iter().enumerate() {
        rank[j] = r;
    }
    let mut survivors = vec![true; m];
    for &(a, b) in inst.edges() {
        if tentative[a] == tentative[b] {
            let later = if rank[a] > rank[b] { a } else { b };
            survivors[later] = false;
        }
    }
    let mut bundles = vec![Vec::new(); n];
    for j in (0..m).filter(|&j| survivors[j]) {
        bundles[tentative[j]].push(j);
    }
    let partial = Allocation::new(bundles)?;
    let alloc = complete_partial(inst, &partial)?;
    Ok((alloc, TrialTrace { permutation, tentative, survivors }))
}

/// Guaranteed proportionality fraction `1 − 1/e − c·n·√(ln n / W)` of the
/// randomized allocation when every agent's total is `W` in units of its
/// largest item. Floating point; for analysis only.
pub fn randprop_lower_bound(n: usize, w: &Rational, c: f64) -> Result<f64, ApproxError> {
    if n == 0 {
        return Err(ApproxError::Precondition("n must be at least 1".into()));
    }
    let w = to_f64(w);
    if w.is_nan() || w <= 0.0 {
        return Err(ApproxError::Precondition("W must be positive".into()));
    }
    if c.is_nan() || c <= 8f64.sqrt() {
        return Err(ApproxError::Precondition(format!("c = {c} must exceed sqrt(8)")));
    }
    let n = n as f64;
    Ok(1.0 - (-1f64).exp() - c * n * (n.ln() / w).sqrt())
}
