use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::milp::{backend, MilpBackend};
use crate::multilevel::MultilevelConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetMode {
    /// Wall-clock limits per stage.
    #[default]
    Wall,
    /// Operation counts per stage; results are reproducible.
    Ops,
}

/// Budget and model-size cap of one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageLimit {
    pub budget: Budget,
    /// MILP stages skip models with more variables than this.
    #[serde(default)]
    pub max_vars: Option<usize>,
}

impl StageLimit {
    pub fn new(budget: Budget) -> Self {
        Self { budget, max_vars: None }
    }

    pub fn capped(budget: Budget, max_vars: usize) -> Self {
        Self {
            budget,
            max_vars: Some(max_vars),
        }
    }
}

/// Limits for every stage of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageLimits {
    /// Hill climbing and communication retiming together, per initial
    /// schedule.
    pub local_search: StageLimit,
    pub ilp_full: StageLimit,
    /// Per interval.
    pub ilp_part: StageLimit,
    pub ilp_cs: StageLimit,
    pub ilp_init: StageLimit,
}

impl StageLimits {
    pub fn wall_defaults() -> Self {
        let secs = |s| StageLimit::new(Budget::Wall(Duration::from_secs(s)));
        Self {
            local_search: secs(300),
            ilp_full: secs(3600),
            ilp_part: secs(180),
            ilp_cs: secs(300),
            ilp_init: secs(120),
        }
    }

    /// Small deterministic budgets sized for the built-in solver.
    pub fn ops_defaults() -> Self {
        Self {
            local_search: StageLimit::new(Budget::Ops(20_000_000)),
            ilp_full: StageLimit::capped(Budget::Ops(10), 3_000),
            ilp_part: StageLimit::capped(Budget::Ops(4), 1_200),
            ilp_cs: StageLimit::capped(Budget::Ops(20), 4_000),
            ilp_init: StageLimit::capped(Budget::Ops(2), 2_500),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IlpInitGate {
    /// Only on four processors.
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub budget_mode: BudgetMode,
    pub wall: StageLimits,
    pub ops: StageLimits,
    pub ilp_init: IlpInitGate,
    /// Back-to-front passes over the intervals of the partial MILP.
    pub part_passes: usize,
    /// Share of the local-search budget given to hill climbing; the rest
    /// goes to communication retiming.
    pub hc_share: f64,
    pub seed: u64,
    pub backend: String,
    pub multilevel: MultilevelConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            budget_mode: BudgetMode::Wall,
            wall: StageLimits::wall_defaults(),
            ops: StageLimits::ops_defaults(),
            ilp_init: IlpInitGate::Auto,
            part_passes: 1,
            hc_share: 0.9,
            seed: 0,
            backend: crate::milp::solver::BUILTIN_BACKEND.to_string(),
            multilevel: MultilevelConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn ops() -> Self {
        Self {
            budget_mode: BudgetMode::Ops,
            ..Self::default()
        }
    }

    pub fn limits(&self) -> &StageLimits {
        match self.budget_mode {
            BudgetMode::Wall => &self.wall,
            BudgetMode::Ops => &self.ops,
        }
    }

    pub fn limits_mut(&mut self) -> &mut StageLimits {
        match self.budget_mode {
            BudgetMode::Wall => &mut self.wall,
            BudgetMode::Ops => &mut self.ops,
        }
    }

    pub fn solver(&self) -> Result<Box<dyn MilpBackend>> {
        backend(&self.backend)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.hc_share) {
            return Err(Error::Config(format!("hc_share {} not in [0, 1]", self.hc_share)));
        }
        for l in [&self.wall, &self.ops] {
            for s in [l.local_search, l.ilp_full, l.ilp_part, l.ilp_cs, l.ilp_init] {
                match s.budget {
                    Budget::Wall(d) if d.is_zero() => {
                        return Err(Error::Config("stage budgets must be positive".into()))
                    }
                    _ => {}
                }
            }
        }
        if self.multilevel.ratios.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
            return Err(Error::Config("coarsening ratios must lie in (0, 1)".into()));
        }
        self.solver()?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}
