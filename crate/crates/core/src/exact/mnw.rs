use num_bigint::BigInt;
use num_traits::One;

use super::ExactError;
use crate::budget::{Meter, SearchBudget};
use crate::graphtools::k_coloring;
use crate::model::{Allocation, Instance};
use crate::value::{common_denominator, scaled_integers};

/// Feasible complete allocation maximizing Nash welfare (number of agents
/// with positive value first, then the product of positive values). With
/// `require_ef1`, only EF1 allocations are considered.
pub fn mnw_exact(inst: &Instance, require_ef1: bool, budget: SearchBudget) -> Result<Allocation, ExactError> {
    let mode = if require_ef1 { Mode::NashEf1 } else { Mode::Nash };
    match run(inst, mode, budget)? {
        Outcome::Found(a) => Ok(a),
        Outcome::NoColoring => Err(ExactError::Infeasible),
        Outcome::NothingFound => Err(if require_ef1 { ExactError::NoEf1Allocation } else { ExactError::Infeasible }),
    }
}

/// Some feasible complete EF1 allocation, or `None` if there is none.
pub fn ef1_exists(inst: &Instance, budget: SearchBudget) -> Result<Option<Allocation>, ExactError> {
    match run(inst, Mode::FirstEf1, budget)? {
        Outcome::Found(a) => Ok(Some(a)),
        _ => Ok(None),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Nash,
    NashEf1,
    FirstEf1,
}

enum Outcome {
    Found(Allocation),
    NoColoring,
    NothingFound,
}

fn run(inst: &Instance, mode: Mode, budget: SearchBudget) -> Result<Outcome, ExactError> {
    let n = inst.n_agents();
    let m = inst.n_items();
    let nbr = inst.graph().neighbor_masks().ok_or(ExactError::TooLarge)?;
    if k_coloring(inst.graph(), n, budget)?.is_none() {
        return Ok(Outcome::NoColoring);
    }
    let scale = common_denominator(inst.valuations().iter().flatten());
    let w: Vec<Vec<i64>> = inst
        .valuations()
        .iter()
        .map(|row| scaled_integers(row, &scale))
        .collect::<Option<_>>()
        .ok_or(ExactError::TooLarge)?;
    let totals: Vec<i64> = w.iter().map(|r| r.iter().sum()).collect();
    let share = |i: usize, j: usize| {
        if totals[i] == 0 {
            0.0
        } else {
            w[i][j] as f64 / totals[i] as f64
        }
    };
    let mut order: Vec<usize> = (0..m).collect();
    let key = |j: usize| (0..n).map(|i| share(i, j)).fold(0.0, f64::max);
    order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
    let mut suffix = vec![vec![0i64; m + 1]; n];
    for p in (0..m).rev() {
        for i in 0..n {
            suffix[i][p] = suffix[i][p + 1] + w[i][order[p]];
        }
    }
    let group: Vec<usize> = (0..n).map(|i| (0..i).find(|&k| w[k] == w[i]).unwrap_or(i)).collect();
    let mut s = Search {
        n,
        mode,
        nbr: &nbr,
        w: &w,
        order: &order,
        suffix: &suffix,
        group: &group,
        cross: vec![vec![0; n]; n],
        top: vec![vec![0; n]; n],
        masks: vec![0; n],
        best: None,
        best_masks: vec![0; n],
        done: false,
        meter: Meter::new(budget),
    };
    s.run(0)?;
    Ok(match s.best {
        Some(_) => {
            let bundles = s.best_masks.iter().map(|&b| super::bits(b).collect()).collect();
            Outcome::Found(Allocation::new(bundles).expect("disjoint by construction"))
        }
        None => Outcome::NothingFound,
    })
}

#[derive(Debug, Clone)]
struct Welfare {
    count: usize,
    product: BigInt,
    log: f64,
}

struct Search<'a> {
    n: usize,
    mode: Mode,
    nbr: &'a [u64],
    w: &'a [Vec<i64>],
    order: &'a [usize],
    suffix: &'a [Vec<i64>],
    group: &'a [usize],
    /// `cross[i][k] = v_i(A_k)`.
    cross: Vec<Vec<i64>>,
    /// `top[i][k]`: largest value to `i` of an item in `A_k`.
    top: Vec<Vec<i64>>,
    masks: Vec<u64>,
    best: Option<Welfare>,
    best_masks: Vec<u64>,
    done: bool,
    meter: Meter,
}

impl Search<'_> {
    fn own(&self, i: usize) -> i64 {
        self.cross[i][i]
    }

    /// Some agent already envies another beyond one item, even if it gets
    /// every remaining item.
    fn ef1_hopeless(&self, p: usize) -> bool {
        (0..self.n).any(|i| {
            let reach = self.own(i) + self.suffix[i][p];
            (0..self.n).any(|k| k != i && reach < self.cross[i][k] - self.top[i][k])
        })
    }

    fn welfare(&self) -> Welfare {
        let mut count = 0;
        let mut product = BigInt::one();
        let mut log = 0.0;
        for i in 0..self.n {
            let v = self.own(i);
            if v > 0 {
                count += 1;
                product *= v;
                log += (v as f64).ln();
            }
        }
        Welfare { count, product, log }
    }

    /// Upper bound on the log product when every agent in `pot` must end
    /// positive: each remaining item adds at most `max_i v_ij / R_i` to the
    /// sum of normalized gains `g_i / R_i`, each capped at 1.
    fn log_bound(&self, p: usize, pot: &[usize]) -> f64 {
        let rest: Vec<f64> = pot.iter().map(|&i| self.suffix[i][p] as f64).collect();
        let own: Vec<f64> = pot.iter().map(|&i| self.own(i) as f64).collect();
        let mut mass = 0.0;
        for &j in &self.order[p..] {
            let best = pot
                .iter()
                .zip(&rest)
                .filter(|(_, &r)| r > 0.0)
                .map(|(&i, &r)| self.w[i][j] as f64 / r)
                .fold(0.0, f64::max);
            mass += best;
        }
        let lift = |level: f64| -> f64 {
            own.iter().zip(&rest).filter(|(_, &r)| r > 0.0).map(|(&v, &r)| (level - v / r).clamp(0.0, 1.0)).sum()
        };
        let active = rest.iter().filter(|&&r| r > 0.0).count() as f64;
        let level = if mass >= active {
            f64::INFINITY
        } else {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            while lift(hi) < mass {
                hi *= 2.0;
            }
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if lift(mid) < mass {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        };
        own.iter()
            .zip(&rest)
            .map(|(&v, &r)| {
                let y = if r > 0.0 { (level - v / r).clamp(0.0, 1.0) } else { 0.0 };
                (v + r * y).ln()
            })
            .sum()
    }

    /// Lagrangian bound: `ln y ≤ −ln λ − 1 + λy` for every `λ > 0`, and the
    /// remaining items add at most `Σ_j max_i λ_i v_ij` to `Σ_i λ_i y_i`.
    /// A few fixed-point updates `λ_i = 1/(v_i(A_i) + x_i)` tighten it.
    fn tangent_bound(&self, p: usize, pot: &[usize]) -> f64 {
        let own: Vec<f64> = pot.iter().map(|&i| self.own(i) as f64).collect();
        let mut lambda: Vec<f64> = pot
            .iter()
            .zip(&own)
            .map(|(&i, &v)| 1.0 / (v + self.suffix[i][p] as f64 / pot.len() as f64).max(1.0))
            .collect();
        let mut best = f64::INFINITY;
        for _ in 0..4 {
            let mut x = vec![0.0; pot.len()];
            let mut bound: f64 = lambda.iter().zip(&own).map(|(&l, &v)| -l.ln() - 1.0 + l * v).sum();
            for &j in &self.order[p..] {
                let (k, top) = pot
                    .iter()
                    .enumerate()
                    .map(|(k, &i)| (k, lambda[k] * self.w[i][j] as f64))
                    .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
                bound += top;
                x[k] += self.w[pot[k]][j] as f64;
            }
            best = best.min(bound);
            for k in 0..pot.len() {
                lambda[k] = 1.0 / (own[k] + x[k]).max(1.0);
            }
        }
        best
    }

    fn pruned(&self, p: usize) -> bool {
        if self.mode != Mode::Nash && self.ef1_hopeless(p) {
            return true;
        }
        if self.mode == Mode::FirstEf1 {
            return false;
        }
        let Some(best) = &self.best else { return false };
        let pot: Vec<usize> = (0..self.n).filter(|&i| self.own(i) > 0 || self.suffix[i][p] > 0).collect();
        let positive = (0..self.n).filter(|&i| self.own(i) > 0).count();
        let count_bound = pot.len().min(positive + (self.order.len() - p));
        if count_bound < best.count {
            return true;
        }
        count_bound == best.count
            && pot.len() == best.count
            && (self.tangent_bound(p, &pot) + 1e-9 < best.log || self.log_bound(p, &pot) + 1e-9 < best.log)
    }

    fn assign(&mut self, i: usize, j: usize) -> Vec<i64> {
        let saved: Vec<i64> = (0..self.n).map(|a| self.top[a][i]).collect();
        for a in 0..self.n {
            self.cross[a][i] += self.w[a][j];
            self.top[a][i] = self.top[a][i].max(self.w[a][j]);
        }
        self.masks[i] |= 1 << j;
        saved
    }

    fn unassign(&mut self, i: usize, j: usize, saved: Vec<i64>) {
        for (a, top) in saved.into_iter().enumerate() {
            self.cross[a][i] -= self.w[a][j];
            self.top[a][i] = top;
        }
        self.masks[i] &= !(1 << j);
    }

    fn run(&mut self, p: usize) -> Result<(), ExactError> {
        self.meter.tick()?;
        if self.pruned(p) {
            return Ok(());
        }
        if p == self.order.len() {
            let w = self.welfare();
            let better = match &self.best {
                None => true,
                Some(b) => (w.count, &w.product) > (b.count, &b.product),
            };
            if better {
                self.best = Some(w);
                self.best_masks.clone_from(&self.masks);
                if self.mode == Mode::FirstEf1 {
                    self.done = true;
                }
            }
            return Ok(());
        }
        let j = self.order[p];
        let mut cand: Vec<usize> = (0..self.n)
            .filter(|&i| self.masks[i] & self.nbr[j] == 0)
            .filter(|&i| self.masks[i] != 0 || !(0..i).any(|k| self.group[k] == self.group[i] && self.masks[k] == 0))
            .collect();
        match self.mode {
            Mode::FirstEf1 => cand.sort_by_key(|&i| (self.own(i), i)),
            _ => {
                // Largest relative gain first: v_ij / (v_i(A_i) + v_ij).
                let gain = |i: usize| {
                    let v = self.w[i][j] as f64;
                    let own = self.own(i) as f64;
                    if v + own == 0.0 {
                        0.0
                    } else {
                        v / (own + v)
                    }
                };
                cand.sort_by(|&a, &b| gain(b).total_cmp(&gain(a)).then(a.cmp(&b)));
            }
        }
        for i in cand {
            let saved = self.assign(i, j);
            self.run(p + 1)?;
            self.unassign(i, j, saved);
            if self.done {
                return Ok(());
            }
        }
        Ok(())
    }
}
