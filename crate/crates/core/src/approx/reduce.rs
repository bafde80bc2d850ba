//! Removal of single high-value items with running renormalization.

use num_traits::{One, Zero};

use crate::model::Instance;
use crate::value::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    /// `(agent, item)` pairs in matching order.
    pub matched: Vec<(usize, usize)>,
    /// Remaining agents `N'`, ascending.
    pub agents: Vec<usize>,
    /// Agents left without any positive value; they need nothing more.
    pub dropped: Vec<usize>,
    /// Remaining items `M'`, ascending.
    pub items: Vec<usize>,
    /// Full-size instance whose rows for `N'` satisfy `v_i(M') = |N'|`.
    pub scaled: Instance,
}

impl Reduction {
    /// The remaining agents and items as an instance of their own.
    pub fn reduced(&self) -> Option<Instance> {
        self.scaled.restrict(&self.agents, &self.items).ok()
    }
}

/// Normalizes to `v_i(M) = n`, then repeatedly gives the lowest-index item
/// worth at least `alpha` to some remaining agent to the lowest-index such
/// agent, rescaling the rest to `v_i(M') = |N'|` after each match.
pub fn reduce_high_value(inst: &Instance, alpha: &Rational) -> Reduction {
    let n = inst.n_agents();
    let mut factor = vec![Rational::one(); n];
    let mut agents: Vec<usize> = (0..n).collect();
    let mut items: Vec<usize> = (0..inst.n_items()).collect();
    let mut matched = Vec::new();
    let mut dropped = Vec::new();
    renormalize(inst, &mut agents, &items, &mut factor, &mut dropped);
    'outer: while !agents.is_empty() {
        for (pos, &j) in items.iter().enumerate() {
            let hit = agents.iter().position(|&i| inst.value(i, j) * &factor[i] >= *alpha);
            if let Some(k) = hit {
                matched.push((agents.remove(k), j));
                items.remove(pos);
                renormalize(inst, &mut agents, &items, &mut factor, &mut dropped);
                continue 'outer;
            }
        }
        break;
    }
    let scaled = inst.scale_valuations(&factor).expect("scaling factors stay positive");
    Reduction { matched, agents, dropped, items, scaled }
}

fn renormalize(
    inst: &Instance,
    agents: &mut Vec<usize>,
    items: &[usize],
    factor: &mut [Rational],
    dropped: &mut Vec<usize>,
) {
    agents.retain(|&i| {
        let keep = !inst.bundle_value(i, items).is_zero();
        if !keep {
            dropped.push(i);
        }
        keep
    });
    let target = int(agents.len() as i64);
    for &i in agents.iter() {
        factor[i] = &target / inst.bundle_value(i, items);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::ratio;

    #[test]
    fn nothing_large_means_no_matching() {
        let inst = Instance::from_integers(&[vec![1, 1, 1, 1], vec![1, 1, 1, 1]], &[]).unwrap();
        let r = reduce_high_value(&inst, &ratio(3, 4));
        assert!(r.matched.is_empty());
        assert_eq!(r.agents, vec![0, 1]);
        assert_eq!(r.scaled.total_value(0), int(2));
    }

    #[test]
    fn large_item_is_matched_and_rest_rescaled() {
        // Agent 0 values item 0 at 3/2 after normalization to a total of 2;
        // agent 1's remaining items are then worth 1/3 each.
        let inst = Instance::from_integers(&[vec![9, 1, 1, 1], vec![1, 1, 1, 1]], &[]).unwrap();
        let r = reduce_high_value(&inst, &ratio(1, 2));
        assert_eq!(r.matched, vec![(0, 0)]);
        assert_eq!(r.agents, vec![1]);
        assert_eq!(r.items, vec![1, 2, 3]);
        assert_eq!(r.scaled.bundle_value(1, &r.items), int(1));
        let reduced = r.reduced().unwrap();
        assert_eq!((reduced.n_agents(), reduced.n_items()), (1, 3));
    }

    #[test]
    fn zero_value_agents_are_dropped() {
        let inst = Instance::from_integers(&[vec![0, 0], vec![1, 1]], &[]).unwrap();
        let r = reduce_high_value(&inst, &ratio(3, 2));
        assert_eq!(r.dropped, vec![0]);
        // Agent 1 alone: total rescaled to 1, both items 1/2 < 3/2.
        assert_eq!(r.agents, vec![1]);
    }
}
