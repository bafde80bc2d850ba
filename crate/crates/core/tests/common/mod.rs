//! Brute-force oracles and random instance builders shared by the
//! integration tests. Nothing here calls the search routines under test.

#![allow(dead_code)]

use conflict_fair::criteria::is_ef1;
use conflict_fair::value::{int, ratio, Rational};
use conflict_fair::{Allocation, Instance};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn alloc_of(owner: &[usize], n: usize) -> Allocation {
    let mut b = vec![Vec::new(); n];
    for (j, &i) in owner.iter().enumerate() {
        b[i].push(j);
    }
    Allocation::new(b).unwrap()
}

/// Every feasible complete allocation, by brute force over `n^m` owner vectors.
pub fn all_feasible(inst: &Instance) -> Vec<Allocation> {
    let (n, m) = (inst.n_agents(), inst.n_items());
    let mut out = Vec::new();
    let mut owner = vec![0usize; m];
    loop {
        if inst.edges().iter().all(|&(a, b)| owner[a] != owner[b]) {
            out.push(alloc_of(&owner, n));
        }
        let mut k = 0;
        while k < m && owner[k] + 1 == n {
            owner[k] = 0;
            k += 1;
        }
        if k == m {
            return out;
        }
        owner[k] += 1;
    }
}

/// `(positive agents, product of positive values)` of an allocation.
pub fn nw(inst: &Instance, a: &Allocation) -> (usize, Rational) {
    let mut count = 0;
    let mut prod = int(1);
    for i in 0..inst.n_agents() {
        let v = inst.bundle_value(i, a.bundle(i));
        if !v.is_zero() {
            count += 1;
            prod *= v;
        }
    }
    (count, prod)
}

pub fn brute_ef1_exists(inst: &Instance) -> bool {
    all_feasible(inst).iter().any(|a| is_ef1(inst, a))
}

/// Best Nash welfare over all (or only EF1) feasible allocations, and every
/// allocation reaching it.
pub fn brute_mnw(inst: &Instance, ef1_only: bool) -> Option<((usize, Rational), Vec<Allocation>)> {
    let mut best: Option<(usize, Rational)> = None;
    let mut arg = Vec::new();
    for a in all_feasible(inst) {
        if ef1_only && !is_ef1(inst, &a) {
            continue;
        }
        let w = nw(inst, &a);
        match &best {
            Some(b) if w < *b => {}
            Some(b) if w == *b => arg.push(a),
            _ => {
                best = Some(w);
                arg = vec![a];
            }
        }
    }
    best.map(|b| (b, arg))
}

/// Maximin share of `agent` by enumerating set partitions of the items into
/// at most `n` independent blocks (restricted growth strings). `None` when
/// no feasible partition exists.
pub fn brute_mms(inst: &Instance, agent: usize) -> Option<Rational> {
    let (n, m) = (inst.n_agents(), inst.n_items());
    let v = &inst.valuations()[agent];
    let mut block = vec![0usize; m];
    let mut best: Option<Rational> = None;
    fn rec(
        j: usize,
        used: usize,
        block: &mut Vec<usize>,
        n: usize,
        inst: &Instance,
        v: &[Rational],
        best: &mut Option<Rational>,
    ) {
        let m = block.len();
        if j == m {
            let mut sums = vec![Rational::zero(); n];
            for (k, &b) in block.iter().enumerate() {
                sums[b] += &v[k];
            }
            let worst = sums.into_iter().min().unwrap();
            if best.as_ref().is_none_or(|b| worst > *b) {
                *best = Some(worst);
            }
            return;
        }
        for b in 0..(used + 1).min(n) {
            let clash = inst.graph().neighbors(j).iter().any(|&u| u < j && block[u] == b);
            if clash {
                continue;
            }
            block[j] = b;
            rec(j + 1, used.max(b + 1), block, n, inst, v, best);
        }
    }
    rec(0, 0, &mut block, n, inst, v, &mut best);
    best
}

/// Two-colorability by breadth-first search.
pub fn is_bipartite(inst: &Instance) -> bool {
    let m = inst.n_items();
    let mut side: Vec<Option<bool>> = vec![None; m];
    for s in 0..m {
        if side[s].is_some() {
            continue;
        }
        side[s] = Some(false);
        let mut queue = vec![s];
        while let Some(u) = queue.pop() {
            for &w in inst.graph().neighbors(u) {
                match side[w] {
                    None => {
                        side[w] = Some(!side[u].unwrap());
                        queue.push(w);
                    }
                    Some(x) if x == side[u].unwrap() => return false,
                    _ => {}
                }
            }
        }
    }
    true
}

/// Chromatic number by trying `k = 1, 2, ...` with plain backtracking.
pub fn brute_chromatic(inst: &Instance) -> usize {
    let m = inst.n_items();
    if m == 0 {
        return 0;
    }
    fn colorable(j: usize, k: usize, col: &mut Vec<usize>, inst: &Instance) -> bool {
        if j == col.len() {
            return true;
        }
        for c in 0..k {
            if inst.graph().neighbors(j).iter().all(|&u| u > j || col[u] != c) {
                col[j] = c;
                if colorable(j + 1, k, col, inst) {
                    return true;
                }
            }
        }
        false
    }
    (1..=m).find(|&k| colorable(0, k, &mut vec![0; m], inst)).unwrap()
}

/// Guaranteed fraction of the maximin share for the constructive existence
/// result, written out from the case table. An edgeless graph uses the
/// two-color row.
pub fn existence_alpha(n: usize, chi: usize, delta: usize) -> Rational {
    let (n_, c) = (n as i64, chi.max(2) as i64);
    match n {
        0..=2 => int(1),
        3 => ratio(2, 3),
        _ if delta >= 2 && chi == delta + 1 => {
            if c < 7 {
                ratio(c + 1, 3 * c - 1)
            } else {
                ratio(c - 1, 3 * c - 6)
            }
        }
        _ if c == 2 => ratio(n_, 2 * n_ - 1),
        _ => ratio(c, 3 * c - 3),
    }
}

/// Guaranteed fraction for the polynomial-time approximation.
pub fn poly_alpha_expected(delta: usize, bipartite: bool) -> Rational {
    if bipartite || delta <= 1 {
        ratio(1, 2)
    } else if delta == 2 {
        ratio(3, 7)
    } else {
        ratio(2, delta as i64 + 2)
    }
}

/// Random simple graph on `m` vertices with edge probability `p`, keeping
/// only edges that leave every degree below `max_deg`.
pub fn random_graph<R: Rng>(rng: &mut R, m: usize, p: f64, max_deg: usize) -> Vec<(usize, usize)> {
    let mut deg = vec![0; m];
    let mut edges = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            if rng.random_bool(p) && deg[a] + 1 < max_deg && deg[b] + 1 < max_deg {
                deg[a] += 1;
                deg[b] += 1;
                edges.push((a, b));
            }
        }
    }
    edges
}

pub fn random_values<R: Rng>(rng: &mut R, n: usize, m: usize, hi: i64) -> Vec<Vec<i64>> {
    (0..n).map(|_| (0..m).map(|_| rng.random_range(0..=hi)).collect()).collect()
}

/// Items shuffled and cut into paths, each joined end to end.
pub fn random_paths<R: Rng>(rng: &mut R, m: usize) -> Vec<(usize, usize)> {
    let mut items: Vec<usize> = (0..m).collect();
    items.shuffle(rng);
    let mut edges = Vec::new();
    for w in items.windows(2) {
        if rng.random_bool(0.75) {
            edges.push((w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    edges
}

/// Items cut into connected components of at most `max_size` vertices: a
/// random spanning tree per component plus a few extra edges.
pub fn random_components<R: Rng>(rng: &mut R, m: usize, max_size: usize) -> Vec<(usize, usize)> {
    let mut items: Vec<usize> = (0..m).collect();
    items.shuffle(rng);
    let mut edges = Vec::new();
    let mut start = 0;
    while start < m {
        let size = rng.random_range(1..=max_size.min(m - start));
        let comp = &items[start..start + size];
        for k in 1..size {
            let parent = comp[rng.random_range(0..k)];
            edges.push((comp[k].min(parent), comp[k].max(parent)));
        }
        for a in 0..size {
            for b in a + 1..size {
                let e = (comp[a].min(comp[b]), comp[a].max(comp[b]));
                if !edges.contains(&e) && rng.random_bool(0.2) {
                    edges.push(e);
                }
            }
        }
        start += size;
    }
    edges
}
