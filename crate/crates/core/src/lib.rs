//! Fair allocation of indivisible items when some items conflict.
//!
//! An [`Instance`] holds additive valuations for agents over items and a
//! conflict graph on the items; a feasible [`Allocation`] never gives one agent
//! two adjacent items. The crate provides fairness criteria (EF1,
//! proportionality, maximin share, Nash welfare), exact desk-scale search,
//! polynomial approximation algorithms, random instance generators and an
//! experiment pipeline.

pub mod approx;
pub mod budget;
pub mod criteria;
pub mod exact;
pub mod format;
pub mod generators;
pub mod graphtools;
pub mod harness;
pub mod model;
pub mod value;

pub use budget::{BudgetExceeded, SearchBudget};
pub use model::{
    complete_partial, validate_instance, Allocation, ConflictGraph, GraphStats, Instance, ModelError, RawInstance,
};
pub use value::Rational;
