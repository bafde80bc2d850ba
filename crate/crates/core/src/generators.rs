//! Random instances: Erdős–Rényi, Barabási–Albert and Watts–Strogatz conflict
//! graphs with valuations that split a fixed number of points per agent.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{GraphStats, Instance};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("invalid graph parameters: {0}")]
    Params(String),
    #[error("unknown graph model {0:?} (expected er, ba or ws)")]
    UnknownModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GraphModel {
    #[serde(rename = "er")]
    ErdosRenyi,
    #[serde(rename = "ba")]
    BarabasiAlbert,
    #[serde(rename = "ws")]
    WattsStrogatz,
}

impl GraphModel {
    pub const ALL: [GraphModel; 3] = [GraphModel::ErdosRenyi, GraphModel::BarabasiAlbert, GraphModel::WattsStrogatz];

    pub fn short_name(self) -> &'static str {
        match self {
            GraphModel::ErdosRenyi => "er",
            GraphModel::BarabasiAlbert => "ba",
            GraphModel::WattsStrogatz => "ws",
        }
    }
}

impl fmt::Display for GraphModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for GraphModel {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "er" | "erdos_renyi" => Ok(GraphModel::ErdosRenyi),
            "ba" | "barabasi_albert" => Ok(GraphModel::BarabasiAlbert),
            "ws" | "watts_strogatz" => Ok(GraphModel::WattsStrogatz),
            other => Err(GenError::UnknownModel(other.to_string())),
        }
    }
}

/// Model parameters: edge probability `p`; attachment count `k`; ring
/// degree `d` and rewiring probability `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GraphParams {
    ErdosRenyi { p: f64 },
    BarabasiAlbert { k: usize },
    WattsStrogatz { d: usize, beta: f64 },
}

impl GraphParams {
    pub fn model(&self) -> GraphModel {
        match self {
            GraphParams::ErdosRenyi { .. } => GraphModel::ErdosRenyi,
            GraphParams::BarabasiAlbert { .. } => GraphModel::BarabasiAlbert,
            GraphParams::WattsStrogatz { .. } => GraphModel::WattsStrogatz,
        }
    }
}

/// Edges of a random graph on `m` vertices, sorted, each `(a, b)` with `a < b`.
pub fn gen_graph(m: usize, params: &GraphParams, seed: u64) -> Result<Vec<(usize, usize)>, GenError> {
    gen_graph_with(m, params, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn gen_graph_with<R: Rng>(m: usize, params: &GraphParams, rng: &mut R) -> Result<Vec<(usize, usize)>, GenError> {
    let mut edges = BTreeSet::new();
    match *params {
        GraphParams::ErdosRenyi { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(GenError::Params(format!("p = {p} outside [0, 1]")));
            }
            for a in 0..m {
                for b in a + 1..m {
                    if rng.random_bool(p) {
                        edges.insert((a, b));
                    }
                }
            }
        }
        GraphParams::BarabasiAlbert { k } => {
            if k == 0 || k > m {
                return Err(GenError::Params(format!("k = {k} outside 1..={m}")));
            }
            for a in 0..k {
                for b in a + 1..k {
                    edges.insert((a, b));
                }
            }
            // Every vertex appears once per incident edge.
            let mut ends: Vec<usize> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
            for v in k..m {
                let mut targets = BTreeSet::new();
                while targets.len() < k {
                    let t =
                        if ends.is_empty() { rng.random_range(0..v) } else { *ends.choose(rng).expect("non-empty") };
                    targets.insert(t);
                }
                for t in targets {
                    edges.insert((t, v));
                    ends.extend([t, v]);
                }
            }
        }
        GraphParams::WattsStrogatz { d, beta } => {
            if d < 2 || d % 2 == 1 || d >= m {
                return Err(GenError::Params(format!("d = {d} must be even, at least 2 and below m = {m}")));
            }
            if !(0.0..1.0).contains(&beta) {
                return Err(GenError::Params(format!("beta = {beta} outside [0, 1)")));
            }
            let key = |a: usize, b: usize| (a.min(b), a.max(b));
            for s in 1..=d / 2 {
                for u in 0..m {
                    edges.insert(key(u, (u + s) % m));
                }
            }
            for s in 1..=d / 2 {
                for u in 0..m {
                    let v = (u + s) % m;
                    if !rng.random_bool(beta) {
                        continue;
                    }
                    let degree = edges.iter().filter(|&&(a, b)| a == u || b == u).count();
                    if degree >= m - 1 || !edges.contains(&key(u, v)) {
                        continue;
                    }
                    let w = loop {
                        let w = rng.random_range(0..m);
                        if w != u && !edges.contains(&key(u, w)) {
                            break w;
                        }
                    };
                    edges.remove(&key(u, v));
                    edges.insert(key(u, w));
                }
            }
        }
    }
    Ok(edges.into_iter().collect())
}

/// For each agent, `m` uniform reals scaled to sum to `value_points` and
/// rounded to the nearest integer.
pub fn gen_valuations(n: usize, m: usize, value_points: u64, seed: u64) -> Vec<Vec<i64>> {
    gen_valuations_with(n, m, value_points, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn gen_valuations_with<R: Rng>(n: usize, m: usize, value_points: u64, rng: &mut R) -> Vec<Vec<i64>> {
    (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            raw.iter()
                .map(|&x| {
                    if total > 0.0 {
                        (x / total * value_points as f64).round() as i64
                    } else {
                        (value_points as f64 / m as f64).round() as i64
                    }
                })
                .collect()
        })
        .collect()
}

/// Sampling ranges and quota for one graph model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub model: GraphModel,
    /// Number of accepted instances with `n ≤ CC(G)` to produce.
    pub target_count: usize,
    pub seed: u64,
    pub n_min: usize,
    pub n_max: usize,
    /// Upper cap on `m`; the range is `2n ..= min(4n, m_cap)`.
    pub m_cap: usize,
    pub value_points: u64,
}

impl GenConfig {
    pub fn new(model: GraphModel, target_count: usize, seed: u64) -> Self {
        GenConfig { model, target_count, seed, n_min: 2, n_max: 10, m_cap: 40, value_points: 1000 }
    }

    fn check(&self) -> Result<(), GenError> {
        if self.target_count == 0 || self.n_min < 1 || self.n_min > self.n_max || self.m_cap < 2 * self.n_min {
            return Err(GenError::Params(format!("invalid generator configuration {self:?}")));
        }
        Ok(())
    }
}

/// One accepted instance and how it was drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub id: String,
    /// Seed of the private generator that drew `n`, `m`, the parameters, the
    /// graph and the valuations.
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub params: GraphParams,
    pub counts_toward_quota: bool,
    pub instance: Instance,
}

/// Draws `n`, `m` and the model parameters.
pub fn sample_params<R: Rng>(config: &GenConfig, rng: &mut R) -> (usize, usize, GraphParams) {
    let n = rng.random_range(config.n_min..=config.n_max);
    let m = rng.random_range(2 * n..=(4 * n).min(config.m_cap).max(2 * n));
    let params = match config.model {
        GraphModel::ErdosRenyi => {
            let p = loop {
                let p: f64 = rng.random();
                if p > 0.0 {
                    break p;
                }
            };
            GraphParams::ErdosRenyi { p }
        }
        GraphModel::BarabasiAlbert => GraphParams::BarabasiAlbert { k: rng.random_range(1..=m) },
        GraphModel::WattsStrogatz => {
            let top = (m / 2).max(2) / 2;
            GraphParams::WattsStrogatz { d: 2 * rng.random_range(1..=top), beta: rng.random() }
        }
    };
    (n, m, params)
}

/// Rejection sampling until `target_count` instances with `n ≤ CC(G)` are
/// accepted. Discards edgeless Erdős–Rényi graphs and graphs with `Δ ≥ n`.
/// Every accepted instance is returned, in drawing order.
pub fn gen_instances(config: &GenConfig) -> Result<Vec<Generated>, GenError> {
    config.check()?;
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Vec::new();
    let mut quota = 0;
    let max_attempts = config.target_count.saturating_mul(10_000);
    for _ in 0..max_attempts {
        if quota >= config.target_count {
            break;
        }
        let seed = master.next_u64();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, m, params) = sample_params(config, &mut rng);
        let edges = gen_graph_with(m, &params, &mut rng)?;
        if config.model == GraphModel::ErdosRenyi && edges.is_empty() {
            continue;
        }
        let values = gen_valuations_with(n, m, config.value_points, &mut rng);
        let instance = Instance::from_integers(&values, &edges).expect("generated instance is valid");
        let stats = GraphStats::of(instance.graph());
        if stats.max_degree >= n {
            continue;
        }
        let counts = n <= stats.largest_component;
        quota += usize::from(counts);
        out.push(Generated {
            id: format!("{}-{:05}", config.model, out.len()),
            seed,
            n,
            m,
            params,
            counts_toward_quota: counts,
            instance,
        });
    }
    Ok(out)
}
