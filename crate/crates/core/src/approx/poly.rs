//! Polynomial-time approximate maximin share allocation.

use num_traits::Zero;

use super::bag_filling::{bag_filling, BagFillingInput, FillOrder};
use super::reduce::reduce_high_value;
use super::ApproxError;
use crate::graphtools::{
    bipartite_2coloring, brooks_coloring_with, greedy_coloring, is_delta_colorable_with, mwis_approx,
};
use crate::model::{complete_partial, Allocation, Instance};
use crate::value::{int, ratio, Rational};

/// Which branch produced the bundles of the agents left after the reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyStep {
    /// Every agent was matched to a single item or needed nothing.
    ReductionOnly,
    /// One agent left; it takes an approximate maximum-weight independent set.
    IndependentSet,
    /// Bag filling on the two color classes of a bipartite graph.
    Bipartite,
    /// Bag filling on a `Δ`-coloring.
    DeltaColoring,
    /// Bag filling on one item per offending component plus a `Δ`-coloring of the rest.
    SingleItemRemoval,
    /// Bag filling on a greedy `(Δ+1)`-coloring.
    GreedyColoring,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyResult {
    /// Guaranteed fraction of each agent's maximin share.
    pub alpha: Rational,
    pub allocation: Allocation,
    pub step: PolyStep,
}

/// `1/2` for bipartite graphs, else `3/7` when `Δ = 2` and `2/(Δ+2)` when `Δ > 2`.
pub fn poly_alpha(max_degree: usize, bipartite: bool) -> Rational {
    if bipartite || max_degree <= 1 {
        ratio(1, 2)
    } else if max_degree == 2 {
        ratio(3, 7)
    } else {
        ratio(2, max_degree as i64 + 2)
    }
}

/// Approximate MMS allocation without computing any maximin share.
///
/// Normalizes to `v_i(M) = n`, matches single items worth at least `alpha`,
/// then serves the remaining agents by bag filling on a coloring chosen by
/// the structure of the remaining graph, and finally hands out leftovers to
/// conflict-free agents.
pub fn mms_approx_poly(inst: &Instance) -> Result<PolyResult, ApproxError> {
    let n = inst.n_agents();
    let graph = inst.graph();
    let delta = graph.max_degree();
    if n <= delta {
        return Err(ApproxError::TooFewAgents { agents: n, max_degree: delta });
    }
    let two_coloring = bipartite_2coloring(graph).ok();
    let alpha = poly_alpha(delta, two_coloring.is_some());
    let red = reduce_high_value(inst, &alpha);
    let mut bundles: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j) in &red.matched {
        bundles[i].push(j);
    }
    let agents = &red.agents;
    let items = &red.items;
    let scaled = &red.scaled;
    let sub = graph.induced(items);
    let global = |local: Vec<Vec<usize>>| -> Vec<Vec<usize>> {
        local
            .into_iter()
            .map(|c| c.into_iter().map(|k| items[k]).collect::<Vec<_>>())
            .filter(|c| !c.is_empty())
            .collect()
    };
    let restrict_classes = |classes: Vec<Vec<usize>>| -> Vec<Vec<usize>> {
        classes
            .into_iter()
            .map(|c| c.into_iter().filter(|j| items.binary_search(j).is_ok()).collect::<Vec<_>>())
            .filter(|c| !c.is_empty())
            .collect()
    };

    let fill = |valuations: &Instance, sources: Vec<Vec<usize>>, protected: Option<usize>| {
        bag_filling(
            valuations,
            &BagFillingInput {
                agents: agents.clone(),
                sources,
                limits: vec![alpha.clone(); agents.len()],
                protected,
                order: FillOrder::Ascending,
            },
        )
    };

    let step = if agents.is_empty() {
        PolyStep::ReductionOnly
    } else if agents.len() == 1 {
        let i = agents[0];
        let weights: Vec<Rational> = items.iter().map(|&j| scaled.value(i, j).clone()).collect();
        let is = mwis_approx(&sub, &weights);
        let mut best: Vec<usize> = is.set.iter().map(|&k| items[k]).collect();
        // A color class of a 2-coloring already holds half the remaining value.
        if let Some(c) = &two_coloring {
            for class in restrict_classes(c.classes()) {
                if scaled.bundle_value(i, &class) > scaled.bundle_value(i, &best) {
                    best = class;
                }
            }
        }
        bundles[i] = best;
        PolyStep::IndependentSet
    } else {
        let (out, step) = if let Some(c) = &two_coloring {
            (fill(scaled, restrict_classes(c.classes()), None), PolyStep::Bipartite)
        } else {
            let (colorable, offenders) = is_delta_colorable_with(&sub, delta);
            if colorable {
                let coloring = brooks_coloring_with(&sub, delta).expect("checked colorable");
                (fill(scaled, global(coloring.classes()), None), PolyStep::DeltaColoring)
            } else if delta >= agents.len() {
                let i = agents[0];
                let mut b: Vec<usize> = offenders
                    .iter()
                    .map(|comp| {
                        comp.iter()
                            .map(|&k| items[k])
                            .min_by(|&x, &y| scaled.value(i, x).cmp(scaled.value(i, y)).then(x.cmp(&y)))
                            .expect("components are non-empty")
                    })
                    .collect();
                b.sort_unstable();
                let rest: Vec<usize> = items.iter().copied().filter(|j| b.binary_search(j).is_err()).collect();
                let coloring = brooks_coloring_with(&graph.induced(&rest), delta)
                    .expect("one vertex removed from each offending component");
                let classes: Vec<Vec<usize>> = coloring
                    .classes()
                    .into_iter()
                    .map(|c| c.into_iter().map(|k| rest[k]).collect::<Vec<_>>())
                    .filter(|c| !c.is_empty())
                    .collect();
                let rescaled = rescale_protected(scaled, i, &rest, items, agents.len());
                let mut sources = vec![b];
                sources.extend(classes);
                (fill(&rescaled, sources, Some(i)), PolyStep::SingleItemRemoval)
            } else {
                let coloring = greedy_coloring(&sub);
                (fill(scaled, global(coloring.classes()), None), PolyStep::GreedyColoring)
            }
        };
        for (agent, bag) in out.assignments {
            bundles[agent] = bag;
        }
        step
    };

    let partial = Allocation::new(bundles).expect("bundles come from disjoint sources");
    let allocation = complete_partial(inst, &partial)?;
    Ok(PolyResult { alpha, allocation, step })
}

/// Scales agent `i` so that `v_i(rest) = n'`, unless that pushes
/// `v_i(items)` above `n' + 1`, in which case `v_i(items) = n' + 1`.
fn rescale_protected(scaled: &Instance, i: usize, rest: &[usize], items: &[usize], n_left: usize) -> Instance {
    let v_rest = scaled.bundle_value(i, rest);
    let v_all = scaled.bundle_value(i, items);
    let cap = int(n_left as i64 + 1);
    let mut f = if v_rest.is_zero() { &cap / &v_all } else { int(n_left as i64) / &v_rest };
    if &v_all * &f > cap {
        f = &cap / &v_all;
    }
    let mut factors = vec![int(1); scaled.n_agents()];
    factors[i] = f;
    scaled.scale_valuations(&factors).expect("positive factor")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::alpha_mms;
    use crate::exact::mms_profile;
    use crate::SearchBudget;

    fn check(inst: &Instance) -> PolyResult {
        let r = mms_approx_poly(inst).unwrap();
        assert!(r.allocation.is_complete(inst.n_items()));
        assert!(inst.is_feasible(&r.allocation));
        let prof = mms_profile(inst, SearchBudget::unlimited()).unwrap();
        assert!(alpha_mms(inst, &r.allocation, &prof.mu) >= r.alpha, "{inst:?} {r:?}");
        r
    }

    #[test]
    fn alpha_by_degree() {
        assert_eq!(poly_alpha(1, true), ratio(1, 2));
        assert_eq!(poly_alpha(2, false), ratio(3, 7));
        assert_eq!(poly_alpha(3, false), ratio(2, 5));
        assert_eq!(poly_alpha(5, true), ratio(1, 2));
    }

    #[test]
    fn matching_graph() {
        let inst = Instance::from_integers(
            &[vec![5, 1, 4, 2, 3, 3], vec![1, 1, 1, 1, 1, 1], vec![0, 6, 0, 2, 2, 2]],
            &[(0, 1), (2, 3), (4, 5)],
        )
        .unwrap();
        assert_eq!(check(&inst).alpha, ratio(1, 2));
    }

    #[test]
    fn triangles_with_three_agents() {
        let inst = Instance::from_integers(
            &[vec![3, 1, 2, 2, 2, 1], vec![1, 1, 1, 1, 1, 1], vec![2, 2, 2, 3, 3, 3]],
            &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)],
        )
        .unwrap();
        assert_eq!(check(&inst).alpha, ratio(3, 7));
    }

    #[test]
    fn k4_components_with_four_agents() {
        let mut edges = Vec::new();
        for base in [0, 4] {
            for a in 0..4 {
                for b in a + 1..4 {
                    edges.push((base + a, base + b));
                }
            }
        }
        let rows =
            vec![vec![1, 2, 3, 4, 5, 6, 7, 8], vec![8, 7, 6, 5, 4, 3, 2, 1], vec![1; 8], vec![2, 2, 1, 1, 2, 2, 1, 1]];
        let inst = Instance::from_integers(&rows, &edges).unwrap();
        assert_eq!(check(&inst).alpha, ratio(2, 5));
    }

    #[test]
    fn rejects_too_few_agents() {
        let inst = Instance::from_integers(&[vec![1, 1]], &[(0, 1)]).unwrap();
        assert!(matches!(mms_approx_poly(&inst), Err(ApproxError::TooFewAgents { .. })));
    }
}
