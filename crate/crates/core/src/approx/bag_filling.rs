//! Bag filling over a fixed family of feasible source sets.

use num_traits::Zero;

use crate::model::Instance;
use crate::value::Rational;

/// Order in which items are drawn from a source into the bag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillOrder {
    /// Ascending item index.
    #[default]
    Ascending,
    /// Largest `v_ij / x_i` over the remaining agents first.
    DescendingValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BagFillingInput {
    /// Participating agents `N'`.
    pub agents: Vec<usize>,
    /// Disjoint feasible sources `A_1..A_l`.
    pub sources: Vec<Vec<usize>>,
    /// Limit `x_i` for each entry of `agents`, in the same order.
    pub limits: Vec<Rational>,
    /// Agent that loses every tie for a bag, if any.
    pub protected: Option<usize>,
    pub order: FillOrder,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BagFillingOutput {
    /// `(agent, bundle)` in the order bags were handed out.
    pub assignments: Vec<(usize, Vec<usize>)>,
    /// What remains of each source.
    pub leftovers: Vec<Vec<usize>>,
    /// Indices of sources that gave at least one item, ascending.
    pub touched: Vec<usize>,
}

impl BagFillingOutput {
    pub fn bundle_of(&self, agent: usize) -> Option<&[usize]> {
        self.assignments.iter().find(|(a, _)| *a == agent).map(|(_, b)| b.as_slice())
    }

    pub fn unassigned<'a>(&'a self, agents: &'a [usize]) -> impl Iterator<Item = usize> + 'a {
        agents.iter().copied().filter(|&a| self.bundle_of(a).is_none())
    }
}

/// Repeatedly picks the lowest-index source some remaining agent values at
/// its limit, fills a bag from it item by item until some remaining agent is
/// satisfied, and gives the bag to the first satisfied agent in index order
/// (the protected agent last). Stops when no source qualifies.
pub fn bag_filling(inst: &Instance, input: &BagFillingInput) -> BagFillingOutput {
    assert_eq!(input.agents.len(), input.limits.len(), "one limit per agent");
    let mut remaining: Vec<(usize, Rational)> =
        input.agents.iter().copied().zip(input.limits.iter().cloned()).collect();
    remaining.sort_by_key(|&(a, _)| (Some(a) == input.protected, a));
    let mut sources: Vec<Vec<usize>> = input
        .sources
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s
        })
        .collect();
    let mut touched = vec![false; sources.len()];
    let mut assignments = Vec::new();

    loop {
        let pick = sources.iter().position(|src| remaining.iter().any(|(a, x)| inst.bundle_value(*a, src) >= *x));
        let Some(k) = pick else { break };
        let order = fill_order(inst, &sources[k], &remaining, input.order);
        let mut bag = Vec::new();
        let mut bag_values: Vec<Rational> = vec![Rational::zero(); remaining.len()];
        let mut winner = remaining.iter().position(|(_, x)| x.is_zero());
        for j in order {
            if winner.is_some() {
                break;
            }
            bag.push(j);
            for (slot, (a, _)) in bag_values.iter_mut().zip(&remaining) {
                *slot += inst.value(*a, j);
            }
            winner = remaining.iter().zip(&bag_values).position(|((_, x), v)| v >= x);
        }
        let w = winner.expect("the chosen source satisfies some agent");
        let (agent, _) = remaining.remove(w);
        bag.sort_unstable();
        sources[k].retain(|j| bag.binary_search(j).is_err());
        touched[k] = true;
        assignments.push((agent, bag));
        if remaining.is_empty() {
            break;
        }
    }
    BagFillingOutput { assignments, leftovers: sources, touched: (0..touched.len()).filter(|&k| touched[k]).collect() }
}

fn fill_order(inst: &Instance, source: &[usize], remaining: &[(usize, Rational)], order: FillOrder) -> Vec<usize> {
    let mut items = source.to_vec();
    if order == FillOrder::DescendingValue {
        let key = |j: usize| {
            remaining
                .iter()
                .filter(|(_, x)| !x.is_zero())
                .map(|(a, x)| inst.value(*a, j) / x)
                .max()
                .unwrap_or_else(Rational::zero)
        };
        items.sort_by(|&a, &b| key(b).cmp(&key(a)).then(a.cmp(&b)));
    }
    items
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::int;

    #[test]
    fn single_agent_takes_whole_source() {
        let inst = Instance::from_integers(&[vec![1, 2, 3]], &[]).unwrap();
        let out = bag_filling(
            &inst,
            &BagFillingInput {
                agents: vec![0],
                sources: vec![vec![0, 1, 2]],
                limits: vec![int(6)],
                protected: None,
                order: FillOrder::Ascending,
            },
        );
        assert_eq!(out.assignments, vec![(0, vec![0, 1, 2])]);
        assert_eq!(out.touched, vec![0]);
        assert!(out.leftovers[0].is_empty());
    }

    #[test]
    fn protected_agent_loses_ties() {
        let inst = Instance::from_integers(&vec![vec![1; 4]; 3], &[]).unwrap();
        let input = BagFillingInput {
            agents: vec![0, 1, 2],
            sources: vec![vec![0, 1, 2, 3]],
            limits: vec![int(1); 3],
            protected: Some(0),
            order: FillOrder::Ascending,
        };
        let out = bag_filling(&inst, &input);
        let order: Vec<usize> = out.assignments.iter().map(|(a, _)| *a).collect();
        assert_eq!(order, vec![1, 2, 0]);
    }

    #[test]
    fn stops_when_no_source_qualifies() {
        let inst = Instance::from_integers(&[vec![1, 1], vec![1, 1]], &[]).unwrap();
        let out = bag_filling(
            &inst,
            &BagFillingInput {
                agents: vec![0, 1],
                sources: vec![vec![0], vec![1]],
                limits: vec![int(2), int(1)],
                protected: None,
                order: FillOrder::Ascending,
            },
        );
        assert_eq!(out.assignments, vec![(1, vec![0])]);
        assert_eq!(out.leftovers, vec![vec![], vec![1]]);
    }
}
