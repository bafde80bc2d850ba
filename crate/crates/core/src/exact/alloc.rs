use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{ExactError, MmsProfile};
use crate::budget::{Meter, SearchBudget};
use crate::graphtools::k_coloring;
use crate::model::{Allocation, Instance};
use crate::value::{common_denominator, scaled_integers, Rational};

/// Feasible complete allocation maximizing `min_i v_i(A_i)/μ_i` over agents
/// with `μ_i > 0`, and that ratio. With no such agent the ratio is 1.
///
/// `stop_at` ends the search as soon as the ratio reaches it (pass `1` to
/// decide whether an MMS allocation exists).
pub fn mms_allocation_exact(
    inst: &Instance,
    mms: &MmsProfile,
    budget: SearchBudget,
    stop_at: Option<&Rational>,
) -> Result<(Rational, Allocation), ExactError> {
    let n = inst.n_agents();
    let m = inst.n_items();
    if mms.infeasible {
        return Err(ExactError::Infeasible);
    }
    let nbr = inst.graph().neighbor_masks().ok_or(ExactError::TooLarge)?;
    if k_coloring(inst.graph(), n, budget)?.is_none() {
        return Err(ExactError::Infeasible);
    }
    let counted: Vec<usize> = (0..n).filter(|&i| !mms.mu[i].is_zero()).collect();
    // Per-agent integer scale shared by the row and its share.
    let mut w = vec![vec![0i64; m]; n];
    let mut mu = vec![1i64; n];
    for i in 0..n {
        let row = &inst.valuations()[i];
        let scale = common_denominator(row.iter().chain(std::iter::once(&mms.mu[i])));
        w[i] = scaled_integers(row, &scale).ok_or(ExactError::TooLarge)?;
        if !mms.mu[i].is_zero() {
            mu[i] = scaled_integers(std::slice::from_ref(&mms.mu[i]), &scale).ok_or(ExactError::TooLarge)?[0];
        }
    }
    let norm = |i: usize, j: usize| w[i][j] as f64 / mu[i] as f64;
    let mut order: Vec<usize> = (0..m).collect();
    let key = |j: usize| counted.iter().map(|&i| norm(i, j)).fold(0.0, f64::max);
    order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
    let mut suffix = vec![vec![0i64; m + 1]; n];
    let mut best_gain = vec![0f64; m + 1];
    for p in (0..m).rev() {
        for i in 0..n {
            suffix[i][p] = suffix[i][p + 1] + w[i][order[p]];
        }
        best_gain[p] = best_gain[p + 1] + key(order[p]);
    }
    let group: Vec<usize> = (0..n)
        .map(|i| (0..i).find(|&k| inst.valuations()[k] == inst.valuations()[i] && mms.mu[k] == mms.mu[i]).unwrap_or(i))
        .collect();
    let stop = stop_at.map(|r| (r.numer().clone(), r.denom().clone()));

    let mut s = Search {
        n,
        nbr: &nbr,
        w: &w,
        mu: &mu,
        counted: &counted,
        order: &order,
        suffix: &suffix,
        best_gain: &best_gain,
        group: &group,
        vals: vec![0; n],
        masks: vec![0; n],
        best: None,
        best_masks: vec![0; n],
        stop,
        done: false,
        meter: Meter::new(budget),
    };
    s.run(0)?;
    let Some((num, den)) = s.best else {
        return Err(ExactError::Infeasible);
    };
    let ratio = if counted.is_empty() { Rational::one() } else { Rational::new(BigInt::from(num), BigInt::from(den)) };
    let bundles = s.best_masks.iter().map(|&b| super::bits(b).collect()).collect();
    Ok((ratio, Allocation::new(bundles).expect("disjoint by construction")))
}

struct Search<'a> {
    n: usize,
    nbr: &'a [u64],
    w: &'a [Vec<i64>],
    mu: &'a [i64],
    counted: &'a [usize],
    order: &'a [usize],
    suffix: &'a [Vec<i64>],
    best_gain: &'a [f64],
    group: &'a [usize],
    vals: Vec<i64>,
    masks: Vec<u64>,
    /// Best ratio so far as `(num, den)`.
    best: Option<(i128, i128)>,
    best_masks: Vec<u64>,
    stop: Option<(BigInt, BigInt)>,
    done: bool,
    meter: Meter,
}

fn less_eq(a: (i128, i128), b: (i128, i128)) -> bool {
    a.0 * b.1 <= b.0 * a.1
}

impl Search<'_> {
    /// Smallest ratio among counted agents, or `1/1` when there are none.
    fn worst(&self, extra: impl Fn(usize) -> i64) -> (i128, i128) {
        let mut out: Option<(i128, i128)> = None;
        for &i in self.counted {
            let r = ((self.vals[i] + extra(i)) as i128, self.mu[i] as i128);
            if out.is_none_or(|o| less_eq(r, o) && r != o) {
                out = Some(r);
            }
        }
        out.unwrap_or((1, 1))
    }

    /// Largest level `t` such that lifting every counted agent's ratio to `t`
    /// costs no more than the best-case ratio mass of the remaining items.
    fn water_level(&self, p: usize) -> f64 {
        let mut r: Vec<f64> = self.counted.iter().map(|&i| self.vals[i] as f64 / self.mu[i] as f64).collect();
        r.sort_by(f64::total_cmp);
        let mut budget = self.best_gain[p];
        let mut level = r[0];
        for k in 1..=r.len() {
            let next = if k < r.len() { r[k] } else { f64::INFINITY };
            let cost = (next - level) * k as f64;
            if cost >= budget {
                return level + budget / k as f64;
            }
            budget -= cost;
            level = next;
        }
        level
    }

    fn reached_stop(&self) -> bool {
        match (&self.stop, self.best) {
            (Some((p, q)), Some((a, b))) => BigInt::from(a) * q >= p * BigInt::from(b),
            _ => false,
        }
    }

    fn run(&mut self, p: usize) -> Result<(), ExactError> {
        self.meter.tick()?;
        if p == self.order.len() {
            let r = self.worst(|_| 0);
            if self.best.is_none_or(|b| !less_eq(r, b)) {
                self.best = Some(r);
                self.best_masks.clone_from(&self.masks);
                if self.counted.is_empty() || self.reached_stop() {
                    self.done = true;
                }
            }
            return Ok(());
        }
        if let Some(best) = self.best {
            if less_eq(self.worst(|i| self.suffix[i][p]), best) {
                return Ok(());
            }
            if !self.counted.is_empty() && self.water_level(p) + 1e-9 <= best.0 as f64 / best.1 as f64 {
                return Ok(());
            }
        }
        let j = self.order[p];
        let mut cand: Vec<usize> = (0..self.n)
            .filter(|&i| self.masks[i] & self.nbr[j] == 0)
            .filter(|&i| {
                // Among identical agents only the first empty one may open a bundle.
                self.masks[i] != 0 || !(0..i).any(|k| self.group[k] == self.group[i] && self.masks[k] == 0)
            })
            .collect();
        let ratio = |i: usize| {
            if self.counted.contains(&i) {
                self.vals[i] as f64 / self.mu[i] as f64
            } else {
                f64::INFINITY
            }
        };
        cand.sort_by(|&a, &b| ratio(a).total_cmp(&ratio(b)).then(a.cmp(&b)));
        for i in cand {
            self.vals[i] += self.w[i][j];
            self.masks[i] |= 1 << j;
            self.run(p + 1)?;
            self.vals[i] -= self.w[i][j];
            self.masks[i] &= !(1 << j);
            if self.done {
                return Ok(());
            }
        }
        Ok(())
    }
}
