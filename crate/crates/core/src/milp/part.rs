use crate::cost::scaled_cost;
use crate::dag::{ComputationalDag, NodeId};
use crate::error::{Error, Result};
use crate::machine::MachineParams;
use crate::schedule::{check_schedule, BspSchedule};

use super::solver::SolveStatus;
use super::sub::{Frame, WindowModel};
use super::{IlpOptions, IlpOutcome};

/// Intervals grow while `|V0| * |S0| * P^2` stays within this bound.
pub const PART_VARIABLE_LIMIT: usize = 4_000;

pub fn part_estimate(nodes: usize, supersteps: usize, p: usize) -> usize {
    nodes * supersteps * p * p
}

/// Disjoint superstep intervals covering `[0, S)`, built from the last
/// superstep backwards. An interval absorbs the preceding superstep as long
/// as the size estimate stays within [`PART_VARIABLE_LIMIT`]; a single
/// superstep forms an interval even if it alone exceeds the bound. Returned
/// in construction order, i.e. latest interval first.
pub fn split_intervals(sched: &BspSchedule, machine: &MachineParams) -> Vec<(usize, usize)> {
    let s_count = sched.num_supersteps();
    let p = machine.num_processors();
    let mut per_step = vec![0usize; s_count];
    for &t in sched.supersteps() {
        per_step[t] += 1;
    }
    let mut out = Vec::new();
    let mut hi = s_count;
    while hi > 0 {
        let end = hi - 1;
        let mut lo = end;
        let mut nodes = per_step[end];
        while lo > 0 {
            let grown = nodes + per_step[lo - 1];
            if part_estimate(grown, end - lo + 2, p) > PART_VARIABLE_LIMIT {
                break;
            }
            lo -= 1;
            nodes = grown;
        }
        out.push((lo, end));
        hi = lo;
    }
    out
}

/// Re-optimizes processors, supersteps and transfers of the nodes in
/// supersteps `[s1, s2]`, keeping everything else fixed. The result is
/// accepted only if the cost of the whole schedule strictly drops.
///
/// Schedules with forwarded transfers are first replaced by their lazy
/// schedule; the comparison is always against the input.
pub fn ilp_part<'a>(
    dag: &ComputationalDag,
    machine: &MachineParams,
    sched: &BspSchedule,
    interval: (usize, usize),
    opts: impl Into<IlpOptions<'a>>,
) -> Result<IlpOutcome> {
    let opts = opts.into();
    check_schedule(dag, machine, sched)?;
    let (s1, s2) = interval;
    if s1 > s2 || s2 >= sched.num_supersteps() {
        return Err(Error::InvalidArgument(format!(
            "interval [{s1}, {s2}] outside [0, {})",
            sched.num_supersteps()
        )));
    }
    let base = if sched.is_direct() {
        sched.clone()
    } else {
        sched.relazied(dag)?
    };
    let v0: Vec<NodeId> = dag
        .nodes()
        .filter(|&v| (s1..=s2).contains(&base.superstep(v)))
        .collect();
    if v0.is_empty() {
        return Ok(IlpOutcome::unchanged(sched, SolveStatus::ProvenOptimal));
    }

    let processor: Vec<Option<usize>> = base.processors().iter().map(|&p| Some(p)).collect();
    let frame = Frame {
        processor: &processor,
        superstep: base.supersteps(),
        comm: base.comm(),
    };
    let mut wm = WindowModel::build(dag, machine, &frame, v0, s1, s2);
    let place: Vec<(usize, usize)> = wm
        .v0
        .iter()
        .map(|&v| (base.processor(v), base.superstep(v)))
        .collect();
    let hint = wm.encode(dag, &frame, &place, base.comm());
    wm.model.set_warm_start(hint);
    let result = opts.solve(&wm.model)?;
    let Some(values) = result.values else {
        return Ok(IlpOutcome::unchanged(sched, result.status));
    };

    let (place, new_comm) = wm.decode(&values);
    let (mut proc_, mut step, _) = base.clone().into_parts();
    for (&v, &(q, s)) in wm.v0.iter().zip(&place) {
        proc_[v] = q;
        step[v] = s;
    }
    let mut comm: Vec<_> = base
        .comm()
        .iter()
        .enumerate()
        .filter(|(k, _)| !wm.dropped.contains(k))
        .map(|(_, &c)| c)
        .collect();
    comm.extend(new_comm);
    let candidate = BspSchedule::new(proc_, step, comm, sched.num_supersteps()).prune_direct(dag);
    if let Err(e) = check_schedule(dag, machine, &candidate) {
        debug_assert!(false, "interval incumbent decodes to an invalid schedule: {e}");
        log::warn!("interval incumbent decodes to an invalid schedule: {e}");
        return Ok(IlpOutcome::unchanged(sched, SolveStatus::NoSolution));
    }
    if scaled_cost(dag, machine, &candidate) < scaled_cost(dag, machine, sched) {
        Ok(IlpOutcome {
            schedule: candidate,
            status: result.status,
            improved: true,
        })
    } else {
        Ok(IlpOutcome::unchanged(sched, result.status))
    }
}

/// Runs [`ilp_part`] over every interval of [`split_intervals`], back to
/// front, `passes` times. Each interval gets the full budget.
pub fn ilp_part_sweep<'a>(
    dag: &ComputationalDag,
    machine: &MachineParams,
    sched: &BspSchedule,
    opts: impl Into<IlpOptions<'a>>,
    passes: usize,
) -> Result<BspSchedule> {
    let opts = opts.into();
    let mut current = sched.clone();
    for _ in 0..passes {
        let mut improved = false;
        for interval in split_intervals(&current, machine) {
            let out = ilp_part(dag, machine, &current, interval, opts)?;
            improved |= out.improved;
            current = out.schedule;
        }
        if !improved {
            break;
        }
    }
    Ok(current)
}
