//! Coarsen by edge contraction, schedule the small DAG, then undo the
//! contractions a few at a time with local search in between.

mod coarsen;
#[cfg(test)]
mod tests;

pub use coarsen::{coarsen, contractable_edges, select_contraction, CoarseningSequence, Contraction};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::cost::scaled_cost;
use crate::dag::ComputationalDag;
use crate::error::{Error, Result};
use crate::local_search::{hc_improve_with, hccs_improve, HcConfig};
use crate::machine::MachineParams;
use crate::milp::{ilp_cs, IlpOptions};
use crate::schedule::{check_schedule, BspSchedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MultilevelConfig {
    pub ratios: Vec<f64>,
    /// Contractions undone between two refinement rounds.
    pub refine_interval: usize,
    /// Accepted hill-climbing moves per refinement round.
    pub refine_moves: usize,
    pub refine_budget: Budget,
    pub hccs_budget: Budget,
    pub ilp_cs_budget: Budget,
    /// Skip the final communication MILP above this many variables.
    pub ilp_cs_max_vars: Option<usize>,
}

impl Default for MultilevelConfig {
    fn default() -> Self {
        Self {
            ratios: vec![0.15, 0.30],
            refine_interval: 5,
            refine_moves: 100,
            refine_budget: Budget::Unlimited,
            hccs_budget: Budget::Unlimited,
            ilp_cs_budget: Budget::Unlimited,
            ilp_cs_max_vars: None,
        }
    }
}

/// Result of one coarsening ratio.
#[derive(Debug, Clone)]
pub struct RatioRun {
    pub ratio: f64,
    pub coarse_nodes: usize,
    pub schedule: BspSchedule,
    pub cost: u64,
}

#[derive(Debug, Clone)]
pub struct MultilevelOutcome {
    pub schedule: BspSchedule,
    /// One entry per configured ratio, in configuration order.
    pub runs: Vec<RatioRun>,
    /// Index into `runs` of the selected schedule.
    pub selected: usize,
}

/// Undoes the contractions of `seq` in reverse order, starting from a
/// schedule of its coarsest DAG. Uncontracted nodes inherit the processor
/// and superstep of the node they came from. Every `refine_interval`
/// contractions, and once at the end, a hill climber capped at
/// `refine_moves` accepted moves runs on the current level.
pub fn uncoarsen_refine(
    seq: &CoarseningSequence,
    coarse: &BspSchedule,
    machine: &MachineParams,
    config: &MultilevelConfig,
) -> Result<BspSchedule> {
    uncoarsen_refine_with(seq, coarse, machine, config, |_, _, _| {})
}

/// Like [`uncoarsen_refine`]; `observe(level, dag, projected)` sees every
/// projected schedule before it is refined.
pub fn uncoarsen_refine_with(
    seq: &CoarseningSequence,
    coarse: &BspSchedule,
    machine: &MachineParams,
    config: &MultilevelConfig,
    mut observe: impl FnMut(usize, &ComputationalDag, &BspSchedule),
) -> Result<BspSchedule> {
    let (coarse_dag, _) = seq.dag_at(seq.len())?;
    if coarse.num_nodes() != coarse_dag.num_nodes() {
        return Err(Error::InvalidArgument(format!(
            "schedule has {} nodes but the coarsest DAG has {}",
            coarse.num_nodes(),
            coarse_dag.num_nodes()
        )));
    }
    check_schedule(&coarse_dag, machine, coarse)?;
    if seq.is_empty() {
        return Ok(coarse.clone());
    }
    let hc = HcConfig {
        max_moves: Some(config.refine_moves),
        verify: false,
    };
    let step = config.refine_interval.max(1);
    let mut level = seq.len();
    let mut sched = coarse.clone();
    while level > 0 {
        let to = level.saturating_sub(step);
        let map = seq.projection(level, to)?;
        let (dag, _) = seq.dag_at(to)?;
        let proc_ = map.iter().map(|&i| sched.processor(i)).collect();
        let step_ = map.iter().map(|&i| sched.superstep(i)).collect();
        let projected = BspSchedule::from_assignment(&dag, proc_, step_)?;
        observe(to, &dag, &projected);
        sched = hc_improve_with(&dag, machine, &projected, config.refine_budget, &hc)?.schedule;
        level = to;
    }
    Ok(sched)
}

/// Smallest DAG size accepted by [`multilevel_schedule`] for `ratios`.
pub fn size_floor(ratios: &[f64]) -> usize {
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    (1..).find(|&n| coarsen::coarse_target(n, min) >= 2).unwrap_or(usize::MAX)
}

/// For each ratio: coarsen, schedule the coarse DAG with `solve`,
/// uncoarsen with refinement, then retime communication. Returns the
/// cheapest result. Ratios run in parallel.
pub fn multilevel_schedule<F>(
    dag: &ComputationalDag,
    machine: &MachineParams,
    config: &MultilevelConfig,
    solve: F,
) -> Result<MultilevelOutcome>
where
    F: Fn(&ComputationalDag, &MachineParams) -> Result<BspSchedule> + Sync,
{
    if config.ratios.is_empty() {
        return Err(Error::Config("no coarsening ratios configured".into()));
    }
    let floor = size_floor(&config.ratios);
    if dag.num_nodes() < floor {
        return Err(Error::TooSmall(format!(
            "{} nodes, need at least {floor}",
            dag.num_nodes()
        )));
    }
    let runs: Vec<RatioRun> = config
        .ratios
        .par_iter()
        .map(|&ratio| {
            let seq = coarsen(dag, ratio)?;
            let (coarse_dag, _) = seq.dag_at(seq.len())?;
            let coarse = solve(&coarse_dag, machine)?;
            let fine = uncoarsen_refine(&seq, &coarse, machine, config)?;
            let fine = hccs_improve(dag, machine, &fine, config.hccs_budget)?;
            let opts = IlpOptions::new(config.ilp_cs_budget).with_max_vars(config.ilp_cs_max_vars);
            let schedule = ilp_cs(dag, machine, &fine, opts)?.schedule;
            Ok(RatioRun {
                ratio,
                coarse_nodes: coarse_dag.num_nodes(),
                cost: scaled_cost(dag, machine, &schedule),
                schedule,
            })
        })
        .collect::<Result<_>>()?;
    let selected = (0..runs.len()).min_by_key(|&i| (runs[i].cost, i)).unwrap_or(0);
    Ok(MultilevelOutcome {
        schedule: runs[selected].schedule.clone(),
        runs,
        selected,
    })
}
