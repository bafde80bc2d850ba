//! EF1 allocations for path-shaped conflicts with binary values, and for
//! conflict graphs whose components are no larger than the number of agents.

use num_traits::{One, Zero};

use super::ApproxError;
use crate::criteria::{decycle, envy_graph};
use crate::model::{complete_partial, Allocation, Instance};

/// State after one placement step of [`path_ef1_steps`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathStep {
    pub allocation: Allocation,
    /// Owner of the last placed item while its path is still unfinished.
    pub last: Option<usize>,
}

/// EF1 allocation when every component of the conflict graph is a path,
/// values are 0 or 1, and there are more than two agents.
pub fn path_ef1(inst: &Instance) -> Result<Allocation, ApproxError> {
    path_ef1_steps(inst).map(|(alloc, _)| alloc)
}

/// As [`path_ef1`], also returning the state after every step (before the
/// items nobody values are handed out).
pub fn path_ef1_steps(inst: &Instance) -> Result<(Allocation, Vec<PathStep>), ApproxError> {
    let n = inst.n_agents();
    let m = inst.n_items();
    if n <= 2 {
        return Err(ApproxError::Precondition(format!("needs more than two agents, found {n}")));
    }
    if let Some((i, j)) = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .find(|&(i, j)| !(inst.value(i, j).is_zero() || inst.value(i, j).is_one()))
    {
        return Err(ApproxError::Precondition(format!("value of item {j} for agent {i} is not 0 or 1")));
    }
    let graph = inst.graph();
    for comp in graph.components() {
        let edges = comp.iter().map(|&v| graph.degree(v)).sum::<usize>() / 2;
        if edges + 1 != comp.len() || comp.iter().any(|&v| graph.degree(v) > 2) {
            return Err(ApproxError::Precondition(format!("component {comp:?} is not a path")));
        }
    }

    let valued: Vec<usize> = (0..m).filter(|&j| (0..n).any(|i| inst.value(i, j).is_one())).collect();
    let sub = graph.induced(&valued);
    let likes = |i: usize, j: usize| inst.value(i, j).is_one();
    let mut alloc = Allocation::empty(n);
    let mut steps = Vec::new();

    for comp in sub.components() {
        let path = walk_path(&sub, &comp).into_iter().map(|k| valued[k]).collect::<Vec<_>>();
        // Item whose owner is the agent that must not receive the next item.
        let mut last_item: Option<usize> = None;
        let mut pos = 0;
        while pos < path.len() {
            let order = envy_graph(inst, &alloc).topological_order().expect("envy graph kept acyclic");
            let last = last_item.map(|j| owner_of(&alloc, j));
            let j = path[pos];
            let next = path.get(pos + 1).copied();
            let first_liking = order.iter().copied().find(|&a| Some(a) != last && likes(a, j));
            match (first_liking, next) {
                (Some(a), _) => {
                    alloc.push_item(a, j);
                    last_item = Some(j);
                    pos += 1;
                }
                (None, None) => {
                    let a = order.iter().copied().find(|&a| Some(a) != last).expect("n > 2");
                    alloc.push_item(a, j);
                    last_item = Some(j);
                    pos += 1;
                }
                (None, Some(j2)) => {
                    let a3 = order
                        .iter()
                        .copied()
                        .find(|&a| likes(a, j2))
                        .expect("every remaining item is liked by someone");
                    let a2 = (0..n).find(|&a| a != a3 && Some(a) != last).expect("n > 2");
                    alloc.push_item(a2, j);
                    alloc.push_item(a3, j2);
                    last_item = Some(j2);
                    pos += 2;
                }
            }
            alloc = decycle(inst, &alloc);
            let unfinished = pos < path.len();
            steps.push(PathStep {
                allocation: alloc.clone(),
                last: if unfinished { last_item.map(|j| owner_of(&alloc, j)) } else { None },
            });
        }
    }
    let full = complete_partial(inst, &alloc)?;
    Ok((full, steps))
}

fn owner_of(alloc: &Allocation, item: usize) -> usize {
    (0..alloc.n_agents()).find(|&i| alloc.bundle(i).binary_search(&item).is_ok()).expect("item already placed")
}

/// Vertices of a path component from its lower-index endpoint to the other.
fn walk_path(graph: &crate::model::ConflictGraph, comp: &[usize]) -> Vec<usize> {
    let start = comp.iter().copied().find(|&v| graph.degree(v) <= 1).expect("a path has an endpoint");
    let mut out = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    while let Some(&next) = graph.neighbors(cur).iter().find(|&&w| w != prev) {
        out.push(next);
        prev = cur;
        cur = next;
    }
    out
}

/// EF1 allocation when no component of the conflict graph has more items than
/// there are agents. Components are handled in order of their smallest item;
/// within one, agents take turns along a topological order of the envy graph
/// (enviers first), each taking its favorite remaining item of the component,
/// so nobody receives two items of one component. Envy cycles are removed
/// after each component.
pub fn component_ef1(inst: &Instance) -> Result<Allocation, ApproxError> {
    let n = inst.n_agents();
    let comps = inst.graph().components();
    if let Some(c) = comps.iter().find(|c| c.len() > n) {
        return Err(ApproxError::Precondition(format!("component of {} items exceeds {n} agents", c.len())));
    }
    let mut alloc = Allocation::empty(n);
    for comp in comps {
        let order = envy_graph(inst, &alloc).topological_order().expect("envy graph kept acyclic");
        let mut left = comp;
        for a in order {
            if left.is_empty() {
                break;
            }
            let k = (0..left.len())
                .max_by(|&x, &y| inst.value(a, left[x]).cmp(inst.value(a, left[y])).then(left[y].cmp(&left[x])))
                .expect("non-empty");
            alloc.push_item(a, left.remove(k));
        }
        alloc = decycle(inst, &alloc);
    }
    Ok(alloc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::is_ef1;

    #[test]
    fn all_ones_path_spreads_items() {
        let inst = Instance::from_integers(&vec![vec![1; 3]; 4], &[(0, 1), (1, 2)]).unwrap();
        let a = path_ef1(&inst).unwrap();
        assert!(a.bundles().iter().all(|b| b.len() <= 1));
        assert!(is_ef1(&inst, &a) && inst.is_feasible(&a) && a.is_complete(3));
    }

    #[test]
    fn unvalued_item_is_placed_last() {
        let inst = Instance::from_integers(&vec![vec![1, 0, 1, 1]; 3], &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let (a, steps) = path_ef1_steps(&inst).unwrap();
        assert!(steps.iter().all(|s| !s.allocation.bundles().iter().flatten().any(|&j| j == 1)));
        assert!(is_ef1(&inst, &a) && inst.is_feasible(&a) && a.is_complete(4));
    }

    #[test]
    fn path_rejects_bad_input() {
        let two = Instance::from_integers(&[vec![1, 1], vec![1, 1]], &[(0, 1)]).unwrap();
        assert!(path_ef1(&two).is_err());
        let tri = Instance::from_integers(&vec![vec![1; 3]; 3], &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(path_ef1(&tri).is_err());
        let big = Instance::from_integers(&vec![vec![2, 1]; 3], &[]).unwrap();
        assert!(path_ef1(&big).is_err());
    }

    #[test]
    fn component_rounds() {
        let inst = Instance::from_integers(&vec![vec![1; 3]; 3], &[(0, 1), (1, 2)]).unwrap();
        let a = component_ef1(&inst).unwrap();
        assert!(a.bundles().iter().all(|b| b.len() == 1));
        let free = Instance::from_integers(&[vec![5, 4, 3, 2, 1], vec![1, 2, 3, 4, 5]], &[]).unwrap();
        let a = component_ef1(&free).unwrap();
        assert!(is_ef1(&free, &a) && a.is_complete(5));
        let big = Instance::from_integers(&vec![vec![1; 3]; 2], &[(0, 1), (1, 2)]).unwrap();
        assert!(component_ef1(&big).is_err());
    }
}
