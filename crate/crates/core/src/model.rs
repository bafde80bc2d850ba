//! Instances, allocations and the conflict graph.
//!
//! Agents and items are indexed from 0. An allocation is feasible when every
//! bundle is an independent set of the conflict graph.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::value::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("an instance needs at least one agent and one item")]
    Empty,
    #[error("declared {expected} {what}, found {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    #[error("negative value for agent {agent}, item {item}")]
    NegativeValue { agent: usize, item: usize },
    #[error("edge ({0}, {1}) has an endpoint outside the item range")]
    EdgeOutOfRange(usize, usize),
    #[error("self-loop on item {0}")]
    SelfLoop(usize),
    #[error("scaling factor for agent {0} must be positive")]
    NonPositiveFactor(usize),
    #[error("item {0} appears in more than one bundle")]
    OverlappingBundles(usize),
    #[error("item {0} is out of range")]
    ItemOutOfRange(usize),
    #[error("agent {0} is out of range")]
    AgentOutOfRange(usize),
    #[error("expected {expected} bundles, found {found}")]
    BundleCount { expected: usize, found: usize },
    #[error("bundle of agent {0} contains conflicting items")]
    InfeasibleBundle(usize),
    #[error("completion needs more agents ({agents}) than the maximum degree ({max_degree})")]
    TooFewAgents { agents: usize, max_degree: usize },
    #[error("invalid value: {0}")]
    BadValue(String),
}

/// Undirected simple graph on items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl ConflictGraph {
    /// Builds the graph; pairs are normalized to `(lo, hi)` and duplicates dropped.
    pub fn new(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self, ModelError> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a >= n_vertices || b >= n_vertices {
                return Err(ModelError::EdgeOutOfRange(a, b));
            }
            if a == b {
                return Err(ModelError::SelfLoop(a));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut adj = vec![Vec::new(); n_vertices];
        for &(a, b) in &set {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(ConflictGraph { adj, edges: set.into_iter().collect() })
    }

    pub fn empty(n_vertices: usize) -> Self {
        ConflictGraph { adj: vec![Vec::new(); n_vertices], edges: Vec::new() }
    }

    pub fn n_vertices(&self) -> usize {
        self.adj.len()
    }

    /// Sorted `(lo, hi)` pairs.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter().enumerate().all(|(k, &a)| set[k + 1..].iter().all(|&b| !self.has_edge(a, b)))
    }

    /// Induced subgraph on `vertices`; vertex `k` of the result is `vertices[k]`.
    pub fn induced(&self, vertices: &[usize]) -> ConflictGraph {
        let mut local = vec![usize::MAX; self.n_vertices()];
        for (k, &v) in vertices.iter().enumerate() {
            local[v] = k;
        }
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|&&(a, b)| local[a] != usize::MAX && local[b] != usize::MAX)
            .map(|&(a, b)| (local[a], local[b]))
            .collect();
        ConflictGraph::new(vertices.len(), &edges).expect("induced subgraph is simple")
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n_vertices();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Neighbourhood bitmasks, available when the graph has at most 64 vertices.
    pub(crate) fn neighbor_masks(&self) -> Option<Vec<u64>> {
        if self.n_vertices() > 64 {
            return None;
        }
        Some(self.adj.iter().map(|ns| ns.iter().fold(0u64, |m, &w| m | (1u64 << w))).collect())
    }
}

/// A fair-allocation instance: agents, items, additive valuations and the
/// conflict graph over items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    valuations: Vec<Vec<Rational>>,
    graph: ConflictGraph,
}

impl Instance {
    /// Checks dimensions, signs and edges.
    pub fn new(valuations: Vec<Vec<Rational>>, edges: &[(usize, usize)]) -> Result<Self, ModelError> {
        let n = valuations.len();
        let m = valuations.first().map_or(0, Vec::len);
        if n == 0 || m == 0 {
            return Err(ModelError::Empty);
        }
        for (i, row) in valuations.iter().enumerate() {
            if row.len() != m {
                return Err(ModelError::DimensionMismatch { what: "items", expected: m, found: row.len() });
            }
            if let Some(j) = row.iter().position(Signed::is_negative) {
                return Err(ModelError::NegativeValue { agent: i, item: j });
            }
        }
        let graph = ConflictGraph::new(m, edges)?;
        Ok(Instance { valuations, graph })
    }

    /// Convenience constructor for integer valuations.
    pub fn from_integers(valuations: &[Vec<i64>], edges: &[(usize, usize)]) -> Result<Self, ModelError> {
        let rows = valuations.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect();
        Instance::new(rows, edges)
    }

    pub fn n_agents(&self) -> usize {
        self.valuations.len()
    }

    pub fn n_items(&self) -> usize {
        self.graph.n_vertices()
    }

    pub fn graph(&self) -> &ConflictGraph {
        &self.graph
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        self.graph.edges()
    }

    pub fn valuations(&self) -> &[Vec<Rational>] {
        &self.valuations
    }

    pub fn value(&self, agent: usize, item: usize) -> &Rational {
        &self.valuations[agent][item]
    }

    pub fn bundle_value(&self, agent: usize, bundle: &[usize]) -> Rational {
        let row = &self.valuations[agent];
        bundle.iter().fold(Rational::zero(), |acc, &j| acc + &row[j])
    }

    pub fn total_value(&self, agent: usize) -> Rational {
        self.valuations[agent].iter().fold(Rational::zero(), |acc, v| acc + v)
    }

    /// True iff every bundle is an independent set of the conflict graph.
    pub fn is_feasible(&self, alloc: &Allocation) -> bool {
        alloc.bundles().iter().all(|b| self.graph.is_independent(b))
    }

    /// Multiplies agent `i`'s valuations by `factors[i]`.
    pub fn scale_valuations(&self, factors: &[Rational]) -> Result<Instance, ModelError> {
        if factors.len() != self.n_agents() {
            return Err(ModelError::DimensionMismatch {
                what: "scaling factors",
                expected: self.n_agents(),
                found: factors.len(),
            });
        }
        if let Some(i) = factors.iter().position(|c| !c.is_positive()) {
            return Err(ModelError::NonPositiveFactor(i));
        }
        let valuations =
            self.valuations.iter().zip(factors).map(|(row, c)| row.iter().map(|v| v * c).collect()).collect();
        Ok(Instance { valuations, graph: self.graph.clone() })
    }

    /// Scales each agent with positive total value so that `v_i(M) = target`.
    /// Agents valuing everything at zero are left unchanged.
    pub fn normalized(&self, target: &Rational) -> Instance {
        let factors: Vec<Rational> = (0..self.n_agents())
            .map(|i| {
                let total = self.total_value(i);
                if total.is_zero() {
                    int(1)
                } else {
                    target / total
                }
            })
            .collect();
        self.scale_valuations(&factors).expect("normalization factors are positive")
    }

    /// Same agents and items with every conflict removed.
    pub fn without_conflicts(&self) -> Instance {
        Instance { valuations: self.valuations.clone(), graph: ConflictGraph::empty(self.n_items()) }
    }

    /// Sub-instance on the given agents and items (in the given order).
    pub fn restrict(&self, agents: &[usize], items: &[usize]) -> Result<Instance, ModelError> {
        if agents.is_empty() || items.is_empty() {
            return Err(ModelError::Empty);
        }
        let valuations =
            agents.iter().map(|&i| items.iter().map(|&j| self.valuations[i][j].clone()).collect()).collect();
        Ok(Instance { valuations, graph: self.graph.induced(items) })
    }

    pub(crate) fn check_allocation(&self, alloc: &Allocation) -> Result<(), ModelError> {
        if alloc.n_agents() != self.n_agents() {
            return Err(ModelError::BundleCount { expected: self.n_agents(), found: alloc.n_agents() });
        }
        if let Some(j) = alloc.bundles().iter().flatten().find(|&&j| j >= self.n_items()) {
            return Err(ModelError::ItemOutOfRange(*j));
        }
        Ok(())
    }
}

/// Unchecked instance description, as read from a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawInstance {
    pub agents: usize,
    pub items: usize,
    pub valuations: Vec<Vec<Rational>>,
    pub edges: Vec<(usize, usize)>,
}

/// Checks declared sizes against the matrix, then builds the instance.
pub fn validate_instance(raw: RawInstance) -> Result<Instance, ModelError> {
    if raw.agents == 0 || raw.items == 0 {
        return Err(ModelError::Empty);
    }
    if raw.valuations.len() != raw.agents {
        return Err(ModelError::DimensionMismatch {
            what: "agents",
            expected: raw.agents,
            found: raw.valuations.len(),
        });
    }
    if let Some(row) = raw.valuations.iter().find(|r| r.len() != raw.items) {
        return Err(ModelError::DimensionMismatch { what: "items", expected: raw.items, found: row.len() });
    }
    Instance::new(raw.valuations, &raw.edges)
}

/// Degree and component statistics of a conflict graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphStats {
    pub max_degree: usize,
    pub components: Vec<Vec<usize>>,
    pub largest_component: usize,
    pub degrees: Vec<usize>,
}

impl GraphStats {
    pub fn of(graph: &ConflictGraph) -> Self {
        let degrees: Vec<usize> = (0..graph.n_vertices()).map(|v| graph.degree(v)).collect();
        let components = graph.components();
        GraphStats {
            max_degree: degrees.iter().copied().max().unwrap_or(0),
            largest_component: components.iter().map(Vec::len).max().unwrap_or(0),
            components,
            degrees,
        }
    }
}

/// Bundles `A_0..A_{n-1}`, pairwise disjoint, each kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    bundles: Vec<Vec<usize>>,
}

impl Allocation {
    pub fn new(mut bundles: Vec<Vec<usize>>) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for b in &mut bundles {
            b.sort_unstable();
            for &j in b.iter() {
                if !seen.insert(j) {
                    return Err(ModelError::OverlappingBundles(j));
                }
            }
        }
        Ok(Allocation { bundles })
    }

    pub fn empty(n_agents: usize) -> Self {
        Allocation { bundles: vec![Vec::new(); n_agents] }
    }

    pub fn n_agents(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundles(&self) -> &[Vec<usize>] {
        &self.bundles
    }

    pub fn bundle(&self, agent: usize) -> &[usize] {
        &self.bundles[agent]
    }

    pub fn into_bundles(self) -> Vec<Vec<usize>> {
        self.bundles
    }

    /// True iff the union of the bundles is `0..n_items`.
    pub fn is_complete(&self, n_items: usize) -> bool {
        self.bundles.iter().map(Vec::len).sum::<usize>() == n_items
            && self.bundles.iter().flatten().all(|&j| j < n_items)
    }

    /// `owner[j]` for every item, `None` when unallocated.
    pub fn owners(&self, n_items: usize) -> Vec<Option<usize>> {
        let mut owner = vec![None; n_items];
        for (i, b) in self.bundles.iter().enumerate() {
            for &j in b {
                if j < n_items {
                    owner[j] = Some(i);
                }
            }
        }
        owner
    }

    /// Adds an item to a bundle, keeping it sorted. The caller guarantees disjointness.
    pub(crate) fn push_item(&mut self, agent: usize, item: usize) {
        let b = &mut self.bundles[agent];
        let pos = b.binary_search(&item).unwrap_or_else(|p| p);
        b.insert(pos, item);
    }

    /// Rearranges bundles: agent `i` receives the bundle previously held by `source[i]`.
    pub(crate) fn permuted(&self, source: &[usize]) -> Allocation {
        Allocation { bundles: source.iter().map(|&s| self.bundles[s].clone()).collect() }
    }
}

/// Extends a feasible partial allocation to a complete one. Each leftover
/// item, in ascending order, goes to the lowest-index agent holding no item
/// that conflicts with it. Needs `n_agents > max_degree`.
pub fn complete_partial(inst: &Instance, partial: &Allocation) -> Result<Allocation, ModelError> {
    inst.check_allocation(partial)?;
    let n = inst.n_agents();
    let delta = inst.graph().max_degree();
    if n <= delta {
        return Err(ModelError::TooFewAgents { agents: n, max_degree: delta });
    }
    if let Some(i) = (0..n).find(|&i| !inst.graph().is_independent(partial.bundle(i))) {
        return Err(ModelError::InfeasibleBundle(i));
    }
    let mut owner = partial.owners(inst.n_items());
    let mut out = partial.clone();
    for j in 0..inst.n_items() {
        if owner[j].is_some() {
            continue;
        }
        let agent = (0..n)
            .find(|&i| inst.graph().neighbors(j).iter().all(|&w| owner[w] != Some(i)))
            .expect("n > max degree leaves a conflict-free agent");
        owner[j] = Some(agent);
        out.push_item(agent, j);
    }
    Ok(out)
}
