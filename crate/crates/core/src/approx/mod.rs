//! Polynomial-time allocation procedures: randomized allocation, bag filling,
//! the single-item reduction, approximate maximin share allocation, and two
//! EF1 constructions for restricted conflict graphs.

mod bag_filling;
mod fair_ef1;
mod poly;
mod random;
mod reduce;

pub use bag_filling::{bag_filling, BagFillingInput, BagFillingOutput, FillOrder};
pub use fair_ef1::{component_ef1, path_ef1, path_ef1_steps, PathStep};
pub use poly::{mms_approx_poly, poly_alpha, PolyResult, PolyStep};
pub use random::{randomized_allocation, randomized_allocation_with, randprop_lower_bound, trial_rng, TrialTrace};
pub use reduce::{reduce_high_value, Reduction};

use crate::graphtools::GraphError;
use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApproxError {
    #[error("needs more agents ({agents}) than the maximum degree ({max_degree})")]
    TooFewAgents { agents: usize, max_degree: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
