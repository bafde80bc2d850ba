use num_traits::{Signed, Zero};

use super::GraphError;
use crate::budget::{Meter, SearchBudget};
use crate::model::ConflictGraph;
use crate::value::{common_denominator, scaled_integers, Rational};

/// An independent set and its total weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedIsResult {
    pub set: Vec<usize>,
    pub weight: Rational,
}

impl WeightedIsResult {
    fn from_set(set: Vec<usize>, weights: &[Rational]) -> Self {
        let weight = set.iter().fold(Rational::zero(), |acc, &v| acc + &weights[v]);
        WeightedIsResult { set, weight }
    }
}

/// Maximum-weight independent set by branch and bound over bitmasks.
pub fn mwis_exact(
    graph: &ConflictGraph,
    weights: &[Rational],
    budget: SearchBudget,
) -> Result<WeightedIsResult, GraphError> {
    assert_eq!(weights.len(), graph.n_vertices(), "one weight per vertex");
    if weights.iter().any(Signed::is_negative) {
        return Err(GraphError::Unsupported);
    }
    let nbr = graph.neighbor_masks().ok_or(GraphError::Unsupported)?;
    let scale = common_denominator(weights);
    let w = scaled_integers(weights, &scale).ok_or(GraphError::Unsupported)?;
    let n = graph.n_vertices();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut search = Search { nbr: &nbr, w: &w, best: -1, best_set: 0, meter: Meter::new(budget) };
    search.run(all, 0, 0)?;
    let set = (0..n).filter(|&v| search.best_set >> v & 1 == 1).collect();
    Ok(WeightedIsResult::from_set(set, weights))
}

struct Search<'a> {
    nbr: &'a [u64],
    w: &'a [i64],
    best: i128,
    best_set: u64,
    meter: Meter,
}

impl Search<'_> {
    fn mass(&self, mut set: u64) -> i128 {
        let mut s = 0i128;
        while set != 0 {
            let v = set.trailing_zeros() as usize;
            set &= set - 1;
            s += self.w[v] as i128;
        }
        s
    }

    fn run(&mut self, mut cand: u64, mut chosen: u64, mut weight: i128) -> Result<(), GraphError> {
        self.meter.tick()?;
        // Vertices with no remaining neighbor are always taken; a vertex of
        // remaining degree one is taken when it outweighs its neighbor.
        loop {
            let mut changed = false;
            let mut rest = cand;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                if cand >> v & 1 == 0 {
                    continue;
                }
                let live = self.nbr[v] & cand;
                let take = live == 0 || (live.count_ones() == 1 && self.w[v] >= self.w[live.trailing_zeros() as usize]);
                if take {
                    chosen |= 1 << v;
                    weight += self.w[v] as i128;
                    cand &= !(live | 1 << v);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if cand == 0 {
            if weight > self.best {
                self.best = weight;
                self.best_set = chosen;
            }
            return Ok(());
        }
        if weight + self.mass(cand) <= self.best {
            return Ok(());
        }
        // Branch on the vertex with the most remaining neighbors, heavier first on ties.
        let mut rest = cand;
        let mut pick = 0usize;
        let mut key = (0u32, i64::MIN);
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let k = ((self.nbr[v] & cand).count_ones(), self.w[v]);
            if k > key {
                key = k;
                pick = v;
            }
        }
        self.run(cand & !(self.nbr[pick] | 1 << pick), chosen | 1 << pick, weight + self.w[pick] as i128)?;
        self.run(cand & !(1 << pick), chosen, weight)
    }
}

/// Exact search up to this many vertices.
const EXACT_LIMIT: usize = 40;
const EXACT_NODES: u64 = 5_000_000;

/// An independent set of weight at least `3/(Δ+2)` of the optimum on graphs
/// small enough for exact search (which then returns the optimum); larger
/// graphs, or searches that run out of nodes, fall back to greedy
/// heaviest-first selection.
pub fn mwis_approx(graph: &ConflictGraph, weights: &[Rational]) -> WeightedIsResult {
    if graph.n_vertices() <= EXACT_LIMIT {
        let budget = SearchBudget::new(EXACT_NODES, std::time::Duration::from_secs(60));
        if let Ok(r) = mwis_exact(graph, weights, budget) {
            return r;
        }
    }
    let mut order: Vec<usize> = (0..graph.n_vertices()).collect();
    order.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(a.cmp(&b)));
    let mut blocked = vec![false; graph.n_vertices()];
    let mut set = Vec::new();
    for v in order {
        if blocked[v] {
            continue;
        }
        set.push(v);
        for &w in graph.neighbors(v) {
            blocked[w] = true;
        }
    }
    set.sort_unstable();
    WeightedIsResult::from_set(set, weights)
}
