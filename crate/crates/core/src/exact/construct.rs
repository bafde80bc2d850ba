//! Constructive approximate maximin share allocation. Uses exact
//! subroutines (chromatic number, maximin partitions), so it is exponential
//! in the worst case.

use num_traits::{One, Zero};

use super::{mms_exact, ExactError, MmsProfile};
use crate::approx::{bag_filling, BagFillingInput, FillOrder};
use crate::budget::SearchBudget;
use crate::criteria::alpha_mms;
use crate::graphtools::{chromatic_number_exact, optimal_coloring};
use crate::model::{complete_partial, Allocation, Instance};
use crate::value::{int, ratio, Rational};

/// Which construction served the agents left after the single-item matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructCase {
    /// Nobody left to serve.
    Matched,
    /// One agent left; it takes an untouched bundle of its own partition.
    SingleAgent,
    /// Three agents, all left, with a 2- or 3-chromatic graph.
    ThreeAgents,
    /// Bag filling on one agent's partition, then on an optimal coloring.
    PartitionThenColoring,
    /// Repeated bag filling on the partitions of the agents still waiting.
    RepeatedPartitions,
    /// `n' = Δ+1 = χ`: the others bag-fill one partition, the owner keeps an
    /// untouched bundle.
    UntouchedBundle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Construction {
    /// Guaranteed fraction for this instance's `n`, `χ` and `Δ`.
    pub alpha: Rational,
    /// `min_i v_i(A_i)/μ_i` actually reached.
    pub achieved: Rational,
    pub allocation: Allocation,
    pub case: ConstructCase,
}

/// Guaranteed fraction of the maximin share: 1 for `n ≤ 2`, 2/3 for `n = 3`,
/// `n/(2n−1)` for `n ≥ 4` with `χ ≤ 2`, `χ/(3χ−3)` for `n ≥ 4` with `χ ≥ 3`,
/// improved for `n ≥ 4`, `Δ ≥ 2` and `χ = Δ+1` to `(χ+1)/(3χ−1)` when
/// `χ < 7` and `(χ−1)/(3χ−6)` otherwise.
pub fn existence_alpha(n: usize, chi: usize, max_degree: usize) -> Rational {
    let (n, c) = (n as i64, chi as i64);
    match n {
        0..=2 => int(1),
        3 => ratio(2, 3),
        _ if max_degree >= 2 && chi == max_degree + 1 => {
            if c < 7 {
                ratio(c + 1, 3 * c - 1)
            } else {
                ratio(c - 1, 3 * c - 6)
            }
        }
        _ if c <= 2 => ratio(n, 2 * n - 1),
        _ => ratio(c, 3 * c - 3),
    }
}

/// Builds an allocation giving every agent at least `existence_alpha · μ_i`.
///
/// Agents are scaled to `μ_i = 1`, single items worth at least `α` are
/// matched greedily, and the agents left are served by the construction
/// chosen from `n'`, `χ(G)` and `Δ(G)`. The result is checked against the
/// guarantee before it is returned.
pub fn construct_alpha_mms(
    inst: &Instance,
    mms: &MmsProfile,
    budget: SearchBudget,
) -> Result<Construction, ExactError> {
    let n = inst.n_agents();
    let graph = inst.graph();
    let delta = graph.max_degree();
    if n <= delta {
        return Err(ExactError::Precondition(format!("needs more agents ({n}) than the maximum degree ({delta})")));
    }
    let chi = chromatic_number_exact(graph, budget)?;
    let alpha = existence_alpha(n, chi, delta);
    let factors: Vec<Rational> = mms.mu.iter().map(|m| if m.is_zero() { Rational::one() } else { m.recip() }).collect();
    let s = inst.scale_valuations(&factors)?;

    let mut bundles: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut waiting: Vec<usize> = (0..n).filter(|&i| !mms.mu[i].is_zero()).collect();
    let mut items = Vec::new();
    for j in 0..inst.n_items() {
        match waiting.iter().position(|&i| *s.value(i, j) >= alpha) {
            Some(k) => bundles[waiting.remove(k)].push(j),
            None => items.push(j),
        }
    }
    let matched: Vec<usize> = (0..inst.n_items()).filter(|j| items.binary_search(j).is_err()).collect();
    let n_left = waiting.len();
    let ctx = Ctx { s: &s, alpha: &alpha, mms };

    let case = if n_left == 0 {
        ConstructCase::Matched
    } else if n_left == 1 {
        let i = waiting[0];
        bundles[i] = mms.partitions[i]
            .bundles()
            .iter()
            .filter(|b| b.iter().all(|j| matched.binary_search(j).is_err()))
            .max_by(|a, b| s.bundle_value(i, a).cmp(&s.bundle_value(i, b)))
            .cloned()
            .unwrap_or_default();
        ConstructCase::SingleAgent
    } else if n == 3 && n_left == 3 && (chi == 2 || chi == 3) {
        three_agents(&ctx, &mut bundles)?;
        ConstructCase::ThreeAgents
    } else if n_left == delta + 1 && chi == delta + 1 {
        let i = waiting[0];
        let reduced = s.restrict(&waiting, &items)?;
        let (_, local) = mms_exact(&reduced, 0, budget)?;
        let sources: Vec<Vec<usize>> = local
            .bundles()
            .iter()
            .map(|b| b.iter().map(|&k| items[k]).collect::<Vec<_>>())
            .filter(|b| !b.is_empty())
            .collect();
        let others: Vec<usize> = waiting[1..].to_vec();
        let out = ctx.fill(&others, sources.clone(), None);
        for (a, b) in out.assignments {
            bundles[a] = b;
        }
        bundles[i] = (0..sources.len())
            .filter(|k| out.touched.binary_search(k).is_err())
            .map(|k| sources[k].clone())
            .max_by(|a, b| s.bundle_value(i, a).cmp(&s.bundle_value(i, b)))
            .ok_or_else(|| ExactError::ConstructionFailed("every bundle was touched".into()))?;
        ConstructCase::UntouchedBundle
    } else {
        let i = waiting[0];
        let first = ctx.fill(&waiting, ctx.partition_within(i, &items), Some(i));
        let mut free = items.clone();
        for (a, b) in first.assignments {
            free.retain(|j| b.binary_search(j).is_err());
            bundles[a] = b;
        }
        let mut rest: Vec<usize> = waiting.iter().copied().filter(|&a| bundles[a].is_empty()).collect();
        if n_left >= chi {
            let coloring = optimal_coloring(&graph.induced(&free), budget)?;
            let classes: Vec<Vec<usize>> =
                coloring.classes().into_iter().map(|c| c.into_iter().map(|k| free[k]).collect()).collect();
            for (a, b) in ctx.fill(&rest, classes, None).assignments {
                bundles[a] = b;
            }
            ConstructCase::PartitionThenColoring
        } else {
            while let Some(&next) = rest.first() {
                let out = ctx.fill(&rest, ctx.partition_within(next, &free), None);
                if out.assignments.is_empty() {
                    return Err(ExactError::ConstructionFailed(format!("agent {next} received nothing")));
                }
                for (a, b) in out.assignments {
                    free.retain(|j| b.binary_search(j).is_err());
                    rest.retain(|&x| x != a);
                    bundles[a] = b;
                }
            }
            ConstructCase::RepeatedPartitions
        }
    };

    let partial = Allocation::new(bundles)?;
    let allocation = complete_partial(inst, &partial)?;
    if !inst.is_feasible(&allocation) {
        return Err(ExactError::ConstructionFailed("infeasible bundle".into()));
    }
    if let Some(i) = (0..n).find(|&i| inst.bundle_value(i, allocation.bundle(i)) < &alpha * &mms.mu[i]) {
        return Err(ExactError::ConstructionFailed(format!("agent {i} is below the guarantee")));
    }
    let achieved = alpha_mms(inst, &allocation, &mms.mu);
    Ok(Construction { alpha, achieved, allocation, case })
}

struct Ctx<'a> {
    /// Valuations scaled to `μ_i = 1`.
    s: &'a Instance,
    alpha: &'a Rational,
    mms: &'a MmsProfile,
}

impl Ctx<'_> {
    fn fill(
        &self,
        agents: &[usize],
        sources: Vec<Vec<usize>>,
        protected: Option<usize>,
    ) -> crate::approx::BagFillingOutput {
        bag_filling(
            self.s,
            &BagFillingInput {
                agents: agents.to_vec(),
                sources,
                limits: vec![self.alpha.clone(); agents.len()],
                protected,
                order: FillOrder::Ascending,
            },
        )
    }

    /// Agent `i`'s maximin partition with every item outside `keep` removed.
    fn partition_within(&self, i: usize, keep: &[usize]) -> Vec<Vec<usize>> {
        self.mms.partitions[i]
            .bundles()
            .iter()
            .map(|b| b.iter().copied().filter(|j| keep.binary_search(j).is_ok()).collect::<Vec<_>>())
            .filter(|b| !b.is_empty())
            .collect()
    }
}

/// Three agents, nobody matched. Agent `a` (the lowest) owns the partition;
/// the other two either take distinct bundles worth 2/3 to them, or one
/// bundle is split in two parts each worth 2/3 to `i`, and `i'` chooses first.
fn three_agents(ctx: &Ctx, bundles: &mut [Vec<usize>]) -> Result<(), ExactError> {
    let s = ctx.s;
    let t = ratio(2, 3);
    let (a, i, i2) = (0, 1, 2);
    let parts: Vec<Vec<usize>> = ctx.mms.partitions[a].bundles().to_vec();
    let l = parts.len();
    for k in 0..l {
        for k2 in (0..l).filter(|&k2| k2 != k) {
            if s.bundle_value(i, &parts[k]) >= t && s.bundle_value(i2, &parts[k2]) >= t {
                bundles[i] = parts[k].clone();
                bundles[i2] = parts[k2].clone();
                bundles[a] = best_untouched(s, a, &parts, &[k, k2]);
                return Ok(());
            }
        }
    }
    let k = (0..l)
        .find(|&k| s.bundle_value(i, &parts[k]) >= t)
        .ok_or_else(|| ExactError::ConstructionFailed("no bundle worth 2/3".into()))?;
    let (b1, b2, used) = match split_for(s, i, &parts, k, &t) {
        Some(x) => x,
        None => exhaustive_split(s, i, i2, &parts, k, &t)
            .ok_or_else(|| ExactError::ConstructionFailed("no split of the shared bundle".into()))?,
    };
    if s.bundle_value(i2, &b1) >= s.bundle_value(i2, &b2) {
        bundles[i2] = b1;
        bundles[i] = b2;
    } else {
        bundles[i2] = b2;
        bundles[i] = b1;
    }
    let mut touched = vec![k];
    touched.extend(used);
    bundles[a] = best_untouched(s, a, &parts, &touched);
    Ok(())
}

fn best_untouched(s: &Instance, a: usize, parts: &[Vec<usize>], touched: &[usize]) -> Vec<usize> {
    (0..parts.len())
        .filter(|k| !touched.contains(k))
        .map(|k| parts[k].clone())
        .max_by(|x, y| s.bundle_value(a, x).cmp(&s.bundle_value(a, y)))
        .unwrap_or_default()
}

type Split = (Vec<usize>, Vec<usize>, Option<usize>);

/// Splits `parts[k]`, possibly with items of one other bundle, into two
/// independent sets each worth at least `t` to agent `i`, following the case
/// analysis on the two most valuable items. Returns the index of the other
/// bundle if one was used. `None` when the recipe does not verify.
fn split_for(s: &Instance, i: usize, parts: &[Vec<usize>], k: usize, t: &Rational) -> Option<Split> {
    let g = s.graph();
    let v = |j: usize| s.value(i, j).clone();
    let ak = &parts[k];
    let third = ratio(1, 3);
    let mut by_value = ak.clone();
    by_value.sort_by(|&x, &y| v(y).cmp(&v(x)).then(x.cmp(&y)));
    let heavy = by_value.iter().filter(|&&j| v(j) > third).count();
    let owner_of = |j: usize| parts.iter().position(|p| p.contains(&j));

    let candidate: Split = if s.bundle_value(i, ak) >= int(2) || heavy <= 1 {
        let mut b1 = Vec::new();
        let mut acc = Rational::zero();
        for &j in &by_value {
            if acc >= *t {
                break;
            }
            acc += v(j);
            b1.push(j);
        }
        let b2 = by_value.iter().copied().filter(|j| !b1.contains(j)).collect();
        (b1, b2, None)
    } else {
        let (j, j2) = (by_value[0], by_value[1]);
        let rest: Vec<usize> = ak.iter().copied().filter(|&x| x != j && x != j2).collect();
        if s.bundle_value(i, &rest) >= *t {
            (rest, vec![j, j2], None)
        } else {
            let cj: Vec<usize> = g.neighbors(j).to_vec();
            if s.bundle_value(i, &cj) <= *t {
                let (k2, extra) = (0..parts.len())
                    .filter(|&k2| k2 != k)
                    .map(|k2| {
                        let e: Vec<usize> = parts[k2].iter().copied().filter(|x| !cj.contains(x)).collect();
                        (k2, e)
                    })
                    .max_by(|(_, x), (_, y)| s.bundle_value(i, x).cmp(&s.bundle_value(i, y)))?;
                let mut b1 = vec![j];
                b1.extend(extra);
                let b2 = ak.iter().copied().filter(|&x| x != j).collect();
                (b1, b2, Some(k2))
            } else {
                let j3 = *cj.iter().max_by(|&&x, &&y| v(x).cmp(&v(y)).then(y.cmp(&x)))?;
                if g.has_edge(j3, j2) {
                    let mut b1 = vec![j3];
                    b1.extend(rest);
                    (b1, vec![j, j2], owner_of(j3))
                } else {
                    let b2 = ak.iter().copied().filter(|&x| x != j2).collect();
                    (vec![j2, j3], b2, owner_of(j3))
                }
            }
        }
    };
    let (mut b1, mut b2, used) = candidate;
    b1.sort_unstable();
    b2.sort_unstable();
    let ok = g.is_independent(&b1)
        && g.is_independent(&b2)
        && b1.iter().all(|j| !b2.contains(j))
        && s.bundle_value(i, &b1) >= *t
        && s.bundle_value(i, &b2) >= *t;
    ok.then_some((b1, b2, used))
}

/// Every way to place the items of `parts[k] ∪ parts[k2]` into two bundles or
/// neither; keeps the split where both bundles are independent and worth `t`
/// to `i`, maximizing the better bundle's value to `i2`.
fn exhaustive_split(s: &Instance, i: usize, i2: usize, parts: &[Vec<usize>], k: usize, t: &Rational) -> Option<Split> {
    let g = s.graph();
    let mut best: Option<(Rational, Split)> = None;
    for k2 in (0..parts.len()).filter(|&k2| k2 != k) {
        let pool: Vec<usize> = parts[k].iter().chain(&parts[k2]).copied().collect();
        let total = 3usize.pow(pool.len() as u32);
        for code in 0..total {
            let (mut b1, mut b2) = (Vec::new(), Vec::new());
            let mut c = code;
            for &j in &pool {
                match c % 3 {
                    1 => b1.push(j),
                    2 => b2.push(j),
                    _ => {}
                }
                c /= 3;
            }
            if s.bundle_value(i, &b1) < *t || s.bundle_value(i, &b2) < *t {
                continue;
            }
            if !g.is_independent(&b1) || !g.is_independent(&b2) {
                continue;
            }
            let score = s.bundle_value(i2, &b1).max(s.bundle_value(i2, &b2));
            if best.as_ref().is_none_or(|(b, _)| score > *b) {
                b1.sort_unstable();
                b2.sort_unstable();
                best = Some((score, (b1, b2, Some(k2))));
            }
        }
    }
    best.map(|(_, x)| x)
}
