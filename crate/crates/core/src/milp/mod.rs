//! MILP formulations of the scheduling problem and its subproblems.

mod cs;
mod full;
mod init;
pub mod model;
mod part;
pub mod solver;
mod sub;


pub use cs::ilp_cs;
pub use full::{full_estimate, full_variable_count, ilp_full, FULL_VARIABLE_LIMIT};
pub use init::{ilp_init, init_batch_size, INIT_VARIABLE_LIMIT, INIT_WINDOW};
pub use model::{Cmp, MilpModel, VarId, VarKind};
pub use part::{ilp_part, ilp_part_sweep, part_estimate, split_intervals, PART_VARIABLE_LIMIT};
pub use solver::{backend, solve_model, solve_model_with, BuiltinBackend, MilpBackend, SolveResult, SolveStatus};

use crate::budget::Budget;
use crate::error::Result;
use crate::schedule::BspSchedule;

static BUILTIN: solver::BuiltinBackend = solver::BuiltinBackend;

/// How an MILP stage solves its model.
#[derive(Clone, Copy)]
pub struct IlpOptions<'a> {
    pub budget: Budget,
    /// Models with more variables are not attempted; the stage then
    /// returns its input with [`SolveStatus::Skipped`].
    pub max_vars: Option<usize>,
    pub backend: &'a dyn MilpBackend,
}

impl IlpOptions<'static> {
    pub fn new(budget: Budget) -> Self {
        Self {
            budget,
            max_vars: None,
            backend: &BUILTIN,
        }
    }
}

impl<'a> IlpOptions<'a> {
    pub fn with_max_vars(self, max_vars: Option<usize>) -> Self {
        Self { max_vars, ..self }
    }

    pub fn with_backend(self, backend: &'a dyn MilpBackend) -> Self {
        Self { backend, ..self }
    }

    pub fn with_budget(self, budget: Budget) -> Self {
        Self { budget, ..self }
    }

    pub(crate) fn solve(&self, model: &MilpModel) -> Result<SolveResult> {
        if let Some(cap) = self.max_vars {
            if model.num_vars() > cap {
                log::debug!("skipping a model with {} variables (cap {cap})", model.num_vars());
                return Ok(SolveResult::skipped());
            }
        }
        solve_model_with(self.backend, model, self.budget)
    }
}

impl From<Budget> for IlpOptions<'static> {
    fn from(budget: Budget) -> Self {
        Self::new(budget)
    }
}

impl std::fmt::Debug for IlpOptions<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IlpOptions")
            .field("budget", &self.budget)
            .field("max_vars", &self.max_vars)
            .field("backend", &self.backend.name())
            .finish()
    }
}

/// Result of an MILP-based improvement step.
#[derive(Debug, Clone)]
pub struct IlpOutcome {
    pub schedule: BspSchedule,
    pub status: SolveStatus,
    /// True if `schedule` is strictly cheaper than the input.
    pub improved: bool,
}

impl IlpOutcome {
    pub(crate) fn unchanged(sched: &BspSchedule, status: SolveStatus) -> Self {
        Self {
            schedule: sched.clone(),
            status,
            improved: false,
        }
    }
}
