use num_bigint::BigInt;
use num_traits::Zero;

use super::ExactError;
use crate::budget::{Meter, SearchBudget};
use crate::graphtools::k_coloring;
use crate::model::{Allocation, Instance};
use crate::value::{common_denominator, scaled_integers, Rational};

/// Maximin share of every agent with a witnessing partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MmsProfile {
    pub mu: Vec<Rational>,
    /// One feasible `n`-partition per agent whose worst bundle is worth `mu[i]`
    /// to that agent. Bundle order carries no meaning.
    pub partitions: Vec<Allocation>,
    /// Set when the items cannot be split into `n` independent sets; `mu`
    /// is then all zero and the partitions are empty.
    pub infeasible: bool,
}

/// Maximin shares of all agents. Agents with identical valuations share one search.
pub fn mms_profile(inst: &Instance, budget: SearchBudget) -> Result<MmsProfile, ExactError> {
    let n = inst.n_agents();
    let mut mu: Vec<Rational> = Vec::with_capacity(n);
    let mut partitions: Vec<Allocation> = Vec::with_capacity(n);
    for i in 0..n {
        if let Some(k) = (0..i).find(|&k| inst.valuations()[k] == inst.valuations()[i]) {
            mu.push(mu[k].clone());
            partitions.push(partitions[k].clone());
            continue;
        }
        match mms_exact(inst, i, budget) {
            Ok((m, p)) => {
                mu.push(m);
                partitions.push(p);
            }
            Err(ExactError::Infeasible) => {
                return Ok(MmsProfile {
                    mu: vec![Rational::zero(); n],
                    partitions: vec![Allocation::empty(n); n],
                    infeasible: true,
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(MmsProfile { mu, partitions, infeasible: false })
}

/// `μ_i`: the best worst-bundle value over feasible `n`-partitions, with a witness.
///
/// Branch and bound over item-to-bundle assignments, items by descending
/// value, with empty bundles treated as interchangeable.
pub fn mms_exact(inst: &Instance, agent: usize, budget: SearchBudget) -> Result<(Rational, Allocation), ExactError> {
    let n = inst.n_agents();
    let m = inst.n_items();
    let nbr = inst.graph().neighbor_masks().ok_or(ExactError::TooLarge)?;
    if k_coloring(inst.graph(), n, budget)?.is_none() {
        return Err(ExactError::Infeasible);
    }
    let row = &inst.valuations()[agent];
    let scale = common_denominator(row);
    let w = scaled_integers(row, &scale).ok_or(ExactError::TooLarge)?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| w[b].cmp(&w[a]).then(a.cmp(&b)));
    let mut suffix = vec![0i64; m + 1];
    for p in (0..m).rev() {
        suffix[p] = suffix[p + 1] + w[order[p]];
    }
    let mut s = Search {
        n,
        nbr: &nbr,
        w: &w,
        order: &order,
        suffix: &suffix,
        upper: suffix[0] / n as i64,
        vals: vec![0; n],
        masks: vec![0; n],
        used: 0,
        best: -1,
        best_masks: vec![0; n],
        meter: Meter::new(budget),
    };
    s.run(0)?;
    if s.best < 0 {
        return Err(ExactError::Infeasible);
    }
    let bundles = s.best_masks.iter().map(|&b| super::bits(b).collect()).collect();
    let mu = Rational::new(BigInt::from(s.best), scale);
    Ok((mu, Allocation::new(bundles).expect("disjoint by construction")))
}

struct Search<'a> {
    n: usize,
    nbr: &'a [u64],
    w: &'a [i64],
    order: &'a [usize],
    suffix: &'a [i64],
    upper: i64,
    vals: Vec<i64>,
    masks: Vec<u64>,
    used: usize,
    best: i64,
    best_masks: Vec<u64>,
    meter: Meter,
}

impl Search<'_> {
    /// `min_k (R + b_1 + … + b_k) / k` over the `k` smallest bundle values.
    fn bound(&self, rest: i64) -> i64 {
        let mut sorted = self.vals.clone();
        sorted.sort_unstable();
        let mut acc = rest;
        let mut bound = i64::MAX;
        for (k, &b) in sorted.iter().enumerate() {
            acc += b;
            bound = bound.min(acc / (k as i64 + 1));
        }
        bound
    }

    fn run(&mut self, p: usize) -> Result<(), ExactError> {
        self.meter.tick()?;
        if p == self.order.len() {
            let worst = *self.vals.iter().min().unwrap();
            if worst > self.best {
                self.best = worst;
                self.best_masks.clone_from(&self.masks);
            }
            return Ok(());
        }
        if self.bound(self.suffix[p]) <= self.best {
            return Ok(());
        }
        let j = self.order[p];
        let open = (self.used + 1).min(self.n);
        let mut cand: Vec<usize> = (0..open).filter(|&b| self.masks[b] & self.nbr[j] == 0).collect();
        cand.sort_by_key(|&b| (self.vals[b], b));
        for b in cand {
            let opened = b == self.used;
            self.vals[b] += self.w[j];
            self.masks[b] |= 1 << j;
            if opened {
                self.used += 1;
            }
            self.run(p + 1)?;
            if opened {
                self.used -= 1;
            }
            self.vals[b] -= self.w[j];
            self.masks[b] &= !(1 << j);
            if self.best >= self.upper {
                return Ok(());
            }
        }
        Ok(())
    }
}
