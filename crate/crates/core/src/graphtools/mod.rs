//! Graph routines used by the allocation procedures: statistics, colorings,
//! exact chromatic number and maximum weighted independent sets.

mod coloring;
mod mwis;

pub use coloring::{
    bipartite_2coloring, brooks_coloring, brooks_coloring_with, chromatic_number_exact, greedy_coloring,
    is_delta_colorable, is_delta_colorable_with, k_coloring, optimal_coloring, Coloring,
};
pub use mwis::{mwis_approx, mwis_exact, WeightedIsResult};

use crate::budget::BudgetExceeded;
use crate::model::{GraphStats, Instance};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("graph is not Delta-colorable; offending components: {components:?}")]
    NotDeltaColorable { components: Vec<Vec<usize>> },
    #[error("graph is not bipartite; odd cycle {cycle:?}")]
    NotBipartite { cycle: Vec<usize> },
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error("weights must be non-negative and the graph have at most 64 vertices")]
    Unsupported,
}

pub fn graph_stats(inst: &Instance) -> GraphStats {
    GraphStats::of(inst.graph())
}
