use std::collections::VecDeque;

use super::GraphError;
use crate::budget::{Meter, SearchBudget};
use crate::model::ConflictGraph;

/// Proper vertex coloring with colors `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    pub color_of: Vec<usize>,
    pub k: usize,
}

impl Coloring {
    fn from_colors(color_of: Vec<usize>) -> Self {
        let k = color_of.iter().map(|&c| c + 1).max().unwrap_or(0);
        Coloring { color_of, k }
    }

    /// Color classes, each sorted; class `c` holds the vertices of color `c`.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (v, &c) in self.color_of.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    pub fn is_proper(&self, graph: &ConflictGraph) -> bool {
        self.color_of.len() == graph.n_vertices()
            && self.color_of.iter().all(|&c| c < self.k)
            && graph.edges().iter().all(|&(a, b)| self.color_of[a] != self.color_of[b])
    }
}

/// Ascending vertex order, lowest free color. Uses at most `Δ+1` colors.
pub fn greedy_coloring(graph: &ConflictGraph) -> Coloring {
    let order: Vec<usize> = (0..graph.n_vertices()).collect();
    Coloring::from_colors(greedy_in_order(graph, &order))
}

fn greedy_in_order(graph: &ConflictGraph, order: &[usize]) -> Vec<usize> {
    let mut color = vec![usize::MAX; graph.n_vertices()];
    for &v in order {
        color[v] = lowest_free(graph, &color, v);
    }
    color
}

fn lowest_free(graph: &ConflictGraph, color: &[usize], v: usize) -> usize {
    let mut used: Vec<bool> = vec![false; graph.degree(v) + 1];
    for &w in graph.neighbors(v) {
        if let Some(slot) = used.get_mut(color[w]) {
            *slot = true;
        }
    }
    used.iter().position(|&u| !u).unwrap()
}

/// 2-coloring by breadth-first search, or an odd cycle.
pub fn bipartite_2coloring(graph: &ConflictGraph) -> Result<Coloring, GraphError> {
    let n = graph.n_vertices();
    let mut color = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    for s in 0..n {
        if color[s] != usize::MAX {
            continue;
        }
        color[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in graph.neighbors(v) {
                if color[w] == usize::MAX {
                    color[w] = 1 - color[v];
                    parent[w] = v;
                    queue.push_back(w);
                } else if color[w] == color[v] {
                    return Err(GraphError::NotBipartite { cycle: odd_cycle(&parent, v, w) });
                }
            }
        }
    }
    Ok(Coloring::from_colors(color))
}

/// Closes the BFS-tree paths from `a` and `b` at their lowest common ancestor.
fn odd_cycle(parent: &[usize], a: usize, b: usize) -> Vec<usize> {
    let path = |mut v: usize| {
        let mut p = vec![v];
        while parent[v] != usize::MAX {
            v = parent[v];
            p.push(v);
        }
        p
    };
    let pa = path(a);
    let pb = path(b);
    let lca = *pa.iter().find(|v| pb.contains(v)).expect("same BFS tree");
    let mut cycle: Vec<usize> = pa.iter().copied().take_while(|&v| v != lca).collect();
    cycle.push(lca);
    let tail: Vec<usize> = pb.iter().copied().take_while(|&v| v != lca).collect();
    cycle.extend(tail.into_iter().rev());
    cycle
}

fn is_complete(graph: &ConflictGraph) -> bool {
    let n = graph.n_vertices();
    (0..n).all(|v| graph.degree(v) == n - 1)
}

fn is_odd_cycle(graph: &ConflictGraph) -> bool {
    let n = graph.n_vertices();
    n % 2 == 1 && n >= 3 && (0..n).all(|v| graph.degree(v) == 2)
}

/// Components that cannot be colored with `delta` colors: `K_{delta+1}`, and odd
/// cycles when `delta == 2`. Every other graph with maximum degree at most
/// `delta` is `delta`-colorable.
pub fn is_delta_colorable_with(graph: &ConflictGraph, delta: usize) -> (bool, Vec<Vec<usize>>) {
    let offenders: Vec<Vec<usize>> = graph
        .components()
        .into_iter()
        .filter(|comp| {
            let sub = graph.induced(comp);
            (comp.len() == delta + 1 && is_complete(&sub)) || (delta == 2 && is_odd_cycle(&sub))
        })
        .collect();
    (offenders.is_empty(), offenders)
}

pub fn is_delta_colorable(graph: &ConflictGraph) -> (bool, Vec<Vec<usize>>) {
    is_delta_colorable_with(graph, graph.max_degree())
}

/// A coloring with at most `Δ(G)` colors, built per component along the
/// constructive proof of Brooks' theorem.
pub fn brooks_coloring(graph: &ConflictGraph) -> Result<Coloring, GraphError> {
    brooks_coloring_with(graph, graph.max_degree())
}

/// As [`brooks_coloring`] with an explicit color budget `delta ≥ Δ(G)`.
pub fn brooks_coloring_with(graph: &ConflictGraph, delta: usize) -> Result<Coloring, GraphError> {
    assert!(delta >= graph.max_degree(), "delta below the maximum degree");
    let (ok, offenders) = is_delta_colorable_with(graph, delta);
    if !ok {
        return Err(GraphError::NotDeltaColorable { components: offenders });
    }
    let mut color = vec![0usize; graph.n_vertices()];
    for comp in graph.components() {
        let sub = graph.induced(&comp);
        let local = color_component(&sub, delta);
        debug_assert!(local.iter().all(|&c| c < delta));
        for (k, &v) in comp.iter().enumerate() {
            color[v] = local[k];
        }
    }
    let out = Coloring::from_colors(color);
    debug_assert!(out.is_proper(graph));
    Ok(out)
}

/// Colors a connected graph with maximum degree at most `delta`, which is
/// neither `K_{delta+1}` nor (for `delta == 2`) an odd cycle.
fn color_component(g: &ConflictGraph, delta: usize) -> Vec<usize> {
    let n = g.n_vertices();
    if g.max_degree() < delta {
        return greedy_in_order(g, &(0..n).collect::<Vec<_>>());
    }
    if delta == 2 {
        return bipartite_2coloring(g).expect("even cycle or path").color_of;
    }
    if let Some(root) = (0..n).find(|&v| g.degree(v) < delta) {
        return color_from_root(g, root, &[]);
    }
    // Regular from here on.
    if let Some(x) = (0..n).find(|&x| !connected_without(g, &[x])) {
        return color_through_cut_vertex(g, x, delta);
    }
    for v in 0..n {
        let ns = g.neighbors(v);
        for (a, &u) in ns.iter().enumerate() {
            for &w in &ns[a + 1..] {
                if !g.has_edge(u, w) && connected_without(g, &[u, w]) {
                    return color_from_root(g, v, &[u, w]);
                }
            }
        }
    }
    unreachable!("2-connected regular non-clique graphs admit a Brooks triple")
}

fn connected_without(g: &ConflictGraph, removed: &[usize]) -> bool {
    let n = g.n_vertices();
    let Some(start) = (0..n).find(|v| !removed.contains(v)) else {
        return true;
    };
    let mut seen = vec![false; n];
    for &r in removed {
        seen[r] = true;
    }
    seen[start] = true;
    let mut stack = vec![start];
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in g.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count + removed.len() == n
}

/// Gives `pre` color 0, then colors the rest greedily from the farthest BFS
/// layer (from `root`, avoiding `pre`) inwards, `root` last. Every vertex but
/// the root still has an uncolored neighbor when colored.
fn color_from_root(g: &ConflictGraph, root: usize, pre: &[usize]) -> Vec<usize> {
    let n = g.n_vertices();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for &p in pre {
        seen[p] = true;
    }
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in g.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    let mut color = vec![usize::MAX; n];
    for &p in pre {
        color[p] = 0;
    }
    for &v in order.iter().rev() {
        color[v] = lowest_free(g, &color, v);
    }
    color
}

/// Colors each piece `D ∪ {x}` (where `D` is a component of `G − x`) on its
/// own, then permutes colors so all pieces agree on `x`.
fn color_through_cut_vertex(g: &ConflictGraph, x: usize, delta: usize) -> Vec<usize> {
    let n = g.n_vertices();
    let mut color = vec![usize::MAX; n];
    let rest: Vec<usize> = (0..n).filter(|&v| v != x).collect();
    let without_x = g.induced(&rest);
    for piece in without_x.components() {
        let mut verts: Vec<usize> = piece.iter().map(|&k| rest[k]).collect();
        verts.push(x);
        verts.sort_unstable();
        let sub = g.induced(&verts);
        let xl = verts.binary_search(&x).unwrap();
        let local = color_from_root(&sub, xl, &[]);
        // Swap colors so x gets 0.
        let cx = local[xl];
        for (k, &v) in verts.iter().enumerate() {
            let c = local[k];
            color[v] = if c == cx {
                0
            } else if c == 0 {
                cx
            } else {
                c
            };
        }
    }
    debug_assert!(color.iter().all(|&c| c < delta));
    color
}

/// A `k`-coloring if one exists, by DSATUR-ordered backtracking.
pub fn k_coloring(graph: &ConflictGraph, k: usize, budget: SearchBudget) -> Result<Option<Coloring>, GraphError> {
    let mut meter = Meter::new(budget);
    let n = graph.n_vertices();
    if n == 0 {
        return Ok(Some(Coloring::from_colors(Vec::new())));
    }
    if k == 0 {
        return Ok(None);
    }
    let mut color = vec![usize::MAX; n];
    if dsatur(graph, k, &mut color, 0, 0, &mut meter)? {
        Ok(Some(Coloring::from_colors(color)))
    } else {
        Ok(None)
    }
}

fn dsatur(
    g: &ConflictGraph,
    k: usize,
    color: &mut [usize],
    colored: usize,
    used: usize,
    meter: &mut Meter,
) -> Result<bool, GraphError> {
    meter.tick()?;
    let n = g.n_vertices();
    if colored == n {
        return Ok(true);
    }
    let mut best = usize::MAX;
    let mut best_key = (0usize, 0usize);
    for v in 0..n {
        if color[v] != usize::MAX {
            continue;
        }
        let mut seen = 0u128;
        for &w in g.neighbors(v) {
            if color[w] != usize::MAX && color[w] < 128 {
                seen |= 1 << color[w];
            }
        }
        let key = (seen.count_ones() as usize, g.degree(v));
        if best == usize::MAX || key > best_key {
            best = v;
            best_key = key;
        }
    }
    let v = best;
    for c in 0..k.min(used + 1) {
        if g.neighbors(v).iter().any(|&w| color[w] == c) {
            continue;
        }
        color[v] = c;
        if dsatur(g, k, color, colored + 1, used.max(c + 1), meter)? {
            return Ok(true);
        }
    }
    color[v] = usize::MAX;
    Ok(false)
}

/// A coloring with exactly `χ(G)` colors.
pub fn optimal_coloring(graph: &ConflictGraph, budget: SearchBudget) -> Result<Coloring, GraphError> {
    let n = graph.n_vertices();
    if n == 0 {
        return Ok(Coloring::from_colors(Vec::new()));
    }
    if graph.edges().is_empty() {
        return Ok(Coloring::from_colors(vec![0; n]));
    }
    if let Ok(c) = bipartite_2coloring(graph) {
        return Ok(c);
    }
    let mut best = greedy_coloring(graph);
    // Colors 1 and 2 are ruled out above; tighten downwards from the greedy bound.
    while best.k > 3 {
        match k_coloring(graph, best.k - 1, budget)? {
            Some(c) => best = c,
            None => break,
        }
    }
    Ok(best)
}

/// `χ(G)` by exhaustive search.
pub fn chromatic_number_exact(graph: &ConflictGraph, budget: SearchBudget) -> Result<usize, GraphError> {
    optimal_coloring(graph, budget).map(|c| c.k)
}
