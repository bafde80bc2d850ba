//! Node and wall-clock limits for the exponential search routines.

use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_nodes: u64,
    pub time_limit: Duration,
}

impl SearchBudget {
    pub fn new(max_nodes: u64, time_limit: Duration) -> Self {
        SearchBudget {
            max_nodes: max_nodes.max(1),
            time_limit: if time_limit.is_zero() { Duration::from_millis(1) } else { time_limit },
        }
    }

    /// Effectively unbounded; for tests and tiny instances.
    pub fn unlimited() -> Self {
        SearchBudget { max_nodes: u64::MAX, time_limit: Duration::from_secs(u64::MAX / 4) }
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget::new(50_000_000, Duration::from_secs(300))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("search budget exhausted after {nodes} nodes")]
pub struct BudgetExceeded {
    pub nodes: u64,
}

/// Counts search nodes against a budget. The clock is sampled every 4096 nodes.
#[derive(Debug)]
pub(crate) struct Meter {
    budget: SearchBudget,
    nodes: u64,
    start: Instant,
}

impl Meter {
    pub fn new(budget: SearchBudget) -> Self {
        Meter { budget, nodes: 0, start: Instant::now() }
    }

    #[inline]
    pub fn tick(&mut self) -> Result<(), BudgetExceeded> {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes
            || (self.nodes & 4095 == 0 && self.start.elapsed() > self.budget.time_limit)
        {
            return Err(BudgetExceeded { nodes: self.nodes });
        }
        Ok(())
    }
}
