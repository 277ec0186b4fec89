//! The full scheduling pipeline, the multilevel variant, and suite
//! evaluation.

mod bench;
mod config;
mod report;

pub use bench::{default_datasets, BenchConfig, DatasetRange};
pub use config::{BudgetMode, IlpInitGate, PipelineConfig, StageLimit, StageLimits};
pub use report::{
    evaluate_suite, geometric_mean, AlgoSpec, GroupRow, Instance, MachineSpec, RunRow, SuiteReport,
};

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::baselines::{cilk_schedule, list_schedule, ListPolicy};
use crate::classical::classical_to_bsp;
use crate::cost::{cost_unchecked, scaled_cost, Cost};
use crate::dag::ComputationalDag;
use crate::error::{Error, Result};
use crate::init::{bspg, source_schedule};
use crate::local_search::{hc_improve, hccs_improve};
use crate::machine::MachineParams;
use crate::milp::{
    full_estimate, ilp_cs, ilp_full, ilp_init, ilp_part_sweep, IlpOptions, SolveStatus,
    FULL_VARIABLE_LIMIT,
};
use crate::multilevel::{multilevel_schedule, MultilevelOutcome};
use crate::schedule::{check_schedule, BspSchedule};

/// One schedule produced along the way.
#[derive(Debug, Clone)]
pub struct StageRecord {
    pub stage: String,
    /// Cost scaled by the machine's denominator.
    pub cost: u64,
    pub wall: Duration,
    /// Solver status of MILP stages.
    pub status: Option<SolveStatus>,
    pub schedule: BspSchedule,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub schedule: BspSchedule,
    pub cost: Cost,
    /// Every intermediate schedule, in execution order.
    pub stages: Vec<StageRecord>,
    /// The whole-problem MILP proved the result optimal for its number of
    /// supersteps.
    pub proven_optimal: bool,
    pub wall: Duration,
}

struct Recorder<'a> {
    dag: &'a ComputationalDag,
    machine: &'a MachineParams,
    stages: Vec<StageRecord>,
    clock: Instant,
}

impl Recorder<'_> {
    fn push(&mut self, stage: impl Into<String>, schedule: &BspSchedule, status: Option<SolveStatus>) -> u64 {
        let cost = scaled_cost(self.dag, self.machine, schedule);
        let stage = stage.into();
        log::debug!("{stage}: cost {cost}");
        self.stages.push(StageRecord {
            stage,
            cost,
            wall: self.clock.elapsed(),
            status,
            schedule: schedule.clone(),
        });
        self.clock = Instant::now();
        cost
    }
}

/// Runs the scheduling pipeline: greedy initial schedules, each improved by
/// hill climbing and communication retiming; the cheapest goes to the
/// whole-problem MILP if small enough, and unless that proves optimality,
/// to the interval MILP and the communication MILP.
pub fn run_pipeline(dag: &ComputationalDag, machine: &MachineParams, config: &PipelineConfig) -> Result<PipelineRun> {
    run_stages(dag, machine, config, true)
}

fn run_stages(
    dag: &ComputationalDag,
    machine: &MachineParams,
    config: &PipelineConfig,
    with_cs: bool,
) -> Result<PipelineRun> {
    config.validate()?;
    let start = Instant::now();
    let solver = config.solver()?;
    let limits = config.limits();
    let opts = |l: StageLimit| IlpOptions::new(l.budget).with_max_vars(l.max_vars).with_backend(solver.as_ref());
    let mut rec = Recorder {
        dag,
        machine,
        stages: Vec::new(),
        clock: Instant::now(),
    };

    let p = machine.num_processors();
    let use_init = match config.ilp_init {
        IlpInitGate::Auto => p == 4,
        IlpInitGate::Always => true,
        IlpInitGate::Never => false,
    };
    let mut inits = vec!["bspg", "source"];
    if use_init {
        inits.push("ilp_init");
    }

    let ls = limits.local_search.budget;
    let mut best: Option<(u64, BspSchedule)> = None;
    for name in inits {
        let init = match name {
            "bspg" => bspg(dag, machine),
            "source" => source_schedule(dag, machine),
            _ => ilp_init(dag, machine, opts(limits.ilp_init))?,
        };
        rec.push(name, &init, None);
        let init = if init.is_lazy(dag) { init } else { init.relazied(dag)? };
        let s = hc_improve(dag, machine, &init, ls.scaled(config.hc_share))?;
        rec.push(format!("{name}+hc"), &s, None);
        let s = hccs_improve(dag, machine, &s, ls.scaled(1.0 - config.hc_share))?.compact();
        let cost = rec.push(format!("{name}+hccs"), &s, None);
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, s));
        }
    }
    let (_, mut current) = best.expect("at least two initial schedules");

    let mut proven_optimal = false;
    if full_estimate(dag.num_nodes(), current.num_supersteps().max(1), p) < FULL_VARIABLE_LIMIT {
        let out = ilp_full(dag, machine, &current, opts(limits.ilp_full))?;
        proven_optimal = out.status == SolveStatus::ProvenOptimal;
        current = out.schedule;
        rec.push("ilp_full", &current, Some(out.status));
    }
    if !proven_optimal {
        current = ilp_part_sweep(dag, machine, &current, opts(limits.ilp_part), config.part_passes)?;
        rec.push("ilp_part", &current, None);
        if with_cs {
            if current.is_direct() {
                let out = ilp_cs(dag, machine, &current, opts(limits.ilp_cs))?;
                current = out.schedule;
                rec.push("ilp_cs", &current, Some(out.status));
            } else {
                log::debug!("skipping communication MILP on a schedule with forwarded values");
            }
        }
    }
    Ok(PipelineRun {
        cost: cost_unchecked(dag, machine, &current),
        schedule: current,
        stages: rec.stages,
        proven_optimal,
        wall: start.elapsed(),
    })
}

#[derive(Debug, Clone)]
pub struct MultilevelRun {
    pub outcome: MultilevelOutcome,
    pub cost: Cost,
    pub wall: Duration,
}

/// Multilevel scheduling with the pipeline (minus the communication MILP)
/// on the coarse DAGs. Local-search and communication-MILP limits come from
/// the pipeline configuration.
pub fn run_multilevel(dag: &ComputationalDag, machine: &MachineParams, config: &PipelineConfig) -> Result<MultilevelRun> {
    config.validate()?;
    let start = Instant::now();
    let limits = config.limits();
    let mut ml = config.multilevel.clone();
    ml.hccs_budget = limits.local_search.budget.scaled(1.0 - config.hc_share);
    ml.ilp_cs_budget = limits.ilp_cs.budget;
    ml.ilp_cs_max_vars = limits.ilp_cs.max_vars;
    let outcome = multilevel_schedule(dag, machine, &ml, |d, m| {
        run_stages(d, m, config, false).map(|r| r.schedule)
    })?;
    Ok(MultilevelRun {
        cost: cost_unchecked(dag, machine, &outcome.schedule),
        outcome,
        wall: start.elapsed(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Pipeline,
    Multilevel,
    Cilk,
    BlEst,
    Etf,
    Bspg,
    Source,
    /// Everything on one processor in one superstep.
    Trivial,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Pipeline,
        Algorithm::Multilevel,
        Algorithm::Cilk,
        Algorithm::BlEst,
        Algorithm::Etf,
        Algorithm::Bspg,
        Algorithm::Source,
        Algorithm::Trivial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pipeline => "pipeline",
            Algorithm::Multilevel => "multilevel",
            Algorithm::Cilk => "cilk",
            Algorithm::BlEst => "blest",
            Algorithm::Etf => "etf",
            Algorithm::Bspg => "bspg",
            Algorithm::Source => "source",
            Algorithm::Trivial => "trivial",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                Error::InvalidArgument(format!("unknown algorithm '{s}' ({})", names.join(", ")))
            })
    }
}

/// Output of [`run_algorithm`].
#[derive(Debug, Clone)]
pub struct AlgoRun {
    pub schedule: BspSchedule,
    pub cost: Cost,
    pub wall: Duration,
    /// Additional labelled costs, e.g. the per-ratio multilevel results.
    pub extra: Vec<(String, Cost)>,
}

pub fn run_algorithm(
    algorithm: Algorithm,
    dag: &ComputationalDag,
    machine: &MachineParams,
    config: &PipelineConfig,
) -> Result<AlgoRun> {
    let start = Instant::now();
    let mut extra = Vec::new();
    let schedule = match algorithm {
        Algorithm::Pipeline => run_pipeline(dag, machine, config)?.schedule,
        Algorithm::Multilevel => {
            let run = run_multilevel(dag, machine, config)?;
            for r in &run.outcome.runs {
                extra.push((
                    format!("multilevel-{:.2}", r.ratio),
                    Cost::new(r.cost, machine.denom()),
                ));
            }
            run.outcome.schedule
        }
        Algorithm::Cilk => classical_to_bsp(dag, &cilk_schedule(dag, machine, config.seed))?,
        Algorithm::BlEst => classical_to_bsp(dag, &list_schedule(dag, machine, ListPolicy::BlEst))?,
        Algorithm::Etf => classical_to_bsp(dag, &list_schedule(dag, machine, ListPolicy::Etf))?,
        Algorithm::Bspg => bspg(dag, machine),
        Algorithm::Source => source_schedule(dag, machine),
        Algorithm::Trivial => BspSchedule::trivial(dag),
    };
    check_schedule(dag, machine, &schedule)?;
    Ok(AlgoRun {
        cost: cost_unchecked(dag, machine, &schedule),
        schedule,
        wall: start.elapsed(),
        extra,
    })
}
