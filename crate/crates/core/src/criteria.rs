//! Fairness predicates and scores, the envy graph and envy-cycle removal.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use crate::model::{Allocation, Instance};
use crate::value::{int, Rational};

/// `v_i(A_i) ≥ v_i(A_k) − max_{j∈A_k} v_ij` for every pair of agents.
pub fn is_ef1(inst: &Instance, alloc: &Allocation) -> bool {
    let n = alloc.n_agents();
    (0..n).all(|i| {
        let own = inst.bundle_value(i, alloc.bundle(i));
        (0..n).filter(|&k| k != i).all(|k| {
            let other = alloc.bundle(k);
            let Some(best) = other.iter().map(|&j| inst.value(i, j)).max() else {
                return true;
            };
            own >= inst.bundle_value(i, other) - best
        })
    })
}

/// Pairs `(i, k)` where agent `i` still envies `k` after removing `k`'s best item.
pub fn ef1_violations(inst: &Instance, alloc: &Allocation) -> Vec<(usize, usize)> {
    let n = alloc.n_agents();
    let mut out = Vec::new();
    for i in 0..n {
        let own = inst.bundle_value(i, alloc.bundle(i));
        for k in (0..n).filter(|&k| k != i) {
            let other = alloc.bundle(k);
            if let Some(best) = other.iter().map(|&j| inst.value(i, j)).max() {
                if own < inst.bundle_value(i, other) - best {
                    out.push((i, k));
                }
            }
        }
    }
    out
}

/// `min_i v_i(A_i) / (v_i(M)/n)`; agents with `v_i(M) = 0` count as 1.
pub fn prop_ratio(inst: &Instance, alloc: &Allocation) -> Rational {
    let n = int(inst.n_agents() as i64);
    (0..inst.n_agents())
        .map(|i| {
            let total = inst.total_value(i);
            if total.is_zero() {
                Rational::one()
            } else {
                inst.bundle_value(i, alloc.bundle(i)) * &n / total
            }
        })
        .min()
        .unwrap_or_else(Rational::one)
}

/// Nash welfare as (number of agents with positive value, product of the
/// positive values). Ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NashWelfare {
    pub count_positive: usize,
    pub product: Rational,
}

impl Ord for NashWelfare {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count_positive.cmp(&other.count_positive).then_with(|| self.product.cmp(&other.product))
    }
}

impl PartialOrd for NashWelfare {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn nash_welfare(inst: &Instance, alloc: &Allocation) -> NashWelfare {
    let mut count_positive = 0;
    let mut product = Rational::one();
    for i in 0..alloc.n_agents() {
        let v = inst.bundle_value(i, alloc.bundle(i));
        if !v.is_zero() {
            count_positive += 1;
            product *= v;
        }
    }
    NashWelfare { count_positive, product }
}

/// `min_i v_i(A_i)/μ_i`; agents with `μ_i = 0` count as 1.
pub fn alpha_mms(inst: &Instance, alloc: &Allocation, mu: &[Rational]) -> Rational {
    (0..inst.n_agents())
        .map(|i| if mu[i].is_zero() { Rational::one() } else { inst.bundle_value(i, alloc.bundle(i)) / &mu[i] })
        .min()
        .unwrap_or_else(Rational::one)
}

/// Per-agent scores for one allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FairnessReport {
    pub ef1: bool,
    pub prop_ratio: Rational,
    pub nash_welfare: NashWelfare,
    pub mms_ratio: Option<Rational>,
}

pub fn fairness_report(inst: &Instance, alloc: &Allocation, mu: Option<&[Rational]>) -> FairnessReport {
    FairnessReport {
        ef1: is_ef1(inst, alloc),
        prop_ratio: prop_ratio(inst, alloc),
        nash_welfare: nash_welfare(inst, alloc),
        mms_ratio: mu.map(|mu| alpha_mms(inst, alloc, mu)),
    }
}

/// Directed envy relation: `i → k` iff `v_i(A_i) < v_i(A_k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyGraph {
    pub n_agents: usize,
    out: Vec<Vec<usize>>,
}

impl EnvyGraph {
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.out.iter().enumerate().flat_map(|(i, ks)| ks.iter().map(move |&k| (i, k))).collect()
    }

    pub fn envies(&self, i: usize, k: usize) -> bool {
        self.out[i].binary_search(&k).is_ok()
    }

    pub fn is_envied(&self, k: usize) -> bool {
        self.out.iter().any(|ks| ks.binary_search(&k).is_ok())
    }

    /// Some directed cycle, found from the lowest-index start.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        let n = self.n_agents;
        // 0 = unvisited, 1 = on stack, 2 = done.
        let mut state = vec![0u8; n];
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for s in 0..n {
            if state[s] != 0 {
                continue;
            }
            stack.push((s, 0));
            state[s] = 1;
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                if let Some(&w) = self.out[v].get(*next) {
                    *next += 1;
                    match state[w] {
                        0 => {
                            state[w] = 1;
                            stack.push((w, 0));
                        }
                        1 => {
                            let start = stack.iter().position(|&(u, _)| u == w).unwrap();
                            return Some(stack[start..].iter().map(|&(u, _)| u).collect());
                        }
                        _ => {}
                    }
                } else {
                    state[v] = 2;
                    stack.pop();
                }
            }
        }
        None
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// Order with every envier before the agents it envies (Kahn's algorithm,
    /// lowest index first). `None` when the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.n_agents;
        let mut indeg = vec![0usize; n];
        for ks in &self.out {
            for &k in ks {
                indeg[k] += 1;
            }
        }
        let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &k in &self.out[v] {
                indeg[k] -= 1;
                if indeg[k] == 0 {
                    ready.insert(k);
                }
            }
        }
        (order.len() == n).then_some(order)
    }
}

pub fn envy_graph(inst: &Instance, alloc: &Allocation) -> EnvyGraph {
    let n = alloc.n_agents();
    let mut out = vec![Vec::new(); n];
    for (i, row) in out.iter_mut().enumerate() {
        let own = inst.bundle_value(i, alloc.bundle(i));
        for k in (0..n).filter(|&k| k != i) {
            if own < inst.bundle_value(i, alloc.bundle(k)) {
                row.push(k);
            }
        }
    }
    EnvyGraph { n_agents: n, out }
}

/// Rotates bundles along envy cycles until the envy graph is acyclic. Each
/// agent on a rotated cycle strictly gains, so this terminates.
pub fn decycle(inst: &Instance, alloc: &Allocation) -> Allocation {
    let mut current = alloc.clone();
    loop {
        let graph = envy_graph(inst, &current);
        let Some(cycle) = graph.find_cycle() else {
            return current;
        };
        let mut source: Vec<usize> = (0..current.n_agents()).collect();
        for (k, &i) in cycle.iter().enumerate() {
            source[i] = cycle[(k + 1) % cycle.len()];
        }
        current = current.permuted(&source);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::ratio;

    fn fig2_left() -> Instance {
        Instance::from_integers(&[vec![2, 2, 3], vec![6, 5, 6]], &[(0, 1), (1, 2)]).unwrap()
    }

    fn example2() -> Instance {
        let mut edges = Vec::new();
        for a in 0..3 {
            for b in 3..6 {
                edges.push((a, b));
            }
        }
        Instance::from_integers(&vec![vec![2, 2, 2, 3, 3, 3]; 4], &edges).unwrap()
    }

    fn alloc(b: &[&[usize]]) -> Allocation {
        Allocation::new(b.iter().map(|x| x.to_vec()).collect()).unwrap()
    }

    #[test]
    fn ef1_examples() {
        assert!(!is_ef1(&example2(), &alloc(&[&[3], &[4], &[5], &[0, 1, 2]])));
        assert!(is_ef1(&fig2_left(), &alloc(&[&[1], &[0, 2]])));
        assert!(is_ef1(&example2(), &alloc(&[&[0], &[3], &[], &[5]])));
    }

    #[test]
    fn proportionality() {
        let one = Instance::from_integers(&[vec![1, 2]], &[]).unwrap();
        assert_eq!(prop_ratio(&one, &alloc(&[&[0, 1]])), int(1));
        let ident = Instance::from_integers(&[vec![1; 4], vec![1; 4]], &[]).unwrap();
        assert_eq!(prop_ratio(&ident, &alloc(&[&[0, 1], &[2, 3]])), int(1));
        assert_eq!(prop_ratio(&fig2_left(), &alloc(&[&[0, 2], &[1]])), ratio(10, 17));
    }

    #[test]
    fn nash_values() {
        let inst = fig2_left();
        let nw = nash_welfare(&inst, &alloc(&[&[0, 2], &[1]]));
        assert_eq!((nw.count_positive, nw.product), (2, int(25)));
        let nw = nash_welfare(&inst, &alloc(&[&[0, 1, 2], &[]]));
        assert_eq!((nw.count_positive, nw.product), (1, int(7)));
        let nw = nash_welfare(&inst, &Allocation::empty(2));
        assert_eq!((nw.count_positive, nw.product), (0, int(1)));
        let a = NashWelfare { count_positive: 2, product: int(1) };
        let b = NashWelfare { count_positive: 1, product: int(100) };
        assert!(a > b);
    }

    #[test]
    fn mms_ratio_conventions() {
        let inst = Instance::from_integers(&[vec![0, 0], vec![1, 1]], &[]).unwrap();
        let r = alpha_mms(&inst, &alloc(&[&[], &[0, 1]]), &[int(0), int(2)]);
        assert_eq!(r, int(1));
    }

    #[test]
    fn envy_edges() {
        let inst = fig2_left();
        assert!(envy_graph(&inst, &Allocation::empty(2)).edges().is_empty());
        assert_eq!(envy_graph(&inst, &alloc(&[&[0, 2], &[1]])).edges(), vec![(1, 0)]);
        let ones = Instance::from_integers(&[vec![1, 1], vec![1, 1]], &[]).unwrap();
        assert_eq!(envy_graph(&ones, &alloc(&[&[], &[0, 1]])).edges(), vec![(0, 1)]);
    }

    #[test]
    fn decycle_swaps_mutual_envy() {
        let inst = Instance::from_integers(&[vec![1, 5], vec![5, 1]], &[]).unwrap();
        let a = alloc(&[&[0], &[1]]);
        let d = decycle(&inst, &a);
        assert_eq!(d.bundles(), &[vec![1], vec![0]]);
        assert!(envy_graph(&inst, &d).is_acyclic());
        let fixed = alloc(&[&[1], &[0]]);
        assert_eq!(decycle(&inst, &fixed), fixed);
    }

    #[test]
    fn topological_order_puts_enviers_first() {
        let inst = fig2_left();
        let g = envy_graph(&inst, &alloc(&[&[0, 2], &[1]]));
        assert_eq!(g.topological_order().unwrap(), vec![1, 0]);
    }
}
