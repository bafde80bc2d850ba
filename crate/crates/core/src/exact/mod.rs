//! Exact search for small instances: maximin shares, max-min MMS ratio
//! allocations, maximum Nash welfare (optionally restricted to EF1), EF1
//! existence, and the constructive approximate-MMS existence procedure.
//!
//! Everything here is exponential in the worst case and bounded by a
//! [`crate::SearchBudget`]. Item sets are held in `u64` masks, so at most 64 items.

mod alloc;
mod construct;
mod mms;
mod mnw;

pub use alloc::mms_allocation_exact;
pub use construct::{construct_alpha_mms, existence_alpha, ConstructCase, Construction};
pub use mms::{mms_exact, mms_profile, MmsProfile};
pub use mnw::{ef1_exists, mnw_exact};

use crate::approx::ApproxError;
use crate::budget::BudgetExceeded;
use crate::graphtools::GraphError;
use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error("no feasible allocation exists")]
    Infeasible,
    #[error("feasible allocations exist but none is EF1")]
    NoEf1Allocation,
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error("exact search supports at most 64 items and values that fit in 64-bit integers once scaled")]
    TooLarge,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<GraphError> for ExactError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Budget(b) => ExactError::Budget(b),
            _ => ExactError::TooLarge,
        }
    }
}

impl From<ApproxError> for ExactError {
    fn from(e: ApproxError) -> Self {
        match e {
            ApproxError::Model(m) => ExactError::Model(m),
            ApproxError::Graph(g) => g.into(),
            other => ExactError::Precondition(other.to_string()),
        }
    }
}

/// Iterates the set bits of a mask, lowest first.
pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let v = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(v)
        }
    })
}
