use crate::budget::Budget;
use crate::dag::{ComputationalDag, NodeId};
use crate::error::{Error, Result};
use crate::machine::MachineParams;
use crate::schedule::{check_schedule, first_needed, BspSchedule, CommStep};

use super::table::{Change, CostTable};

#[derive(Debug, Clone)]
pub struct HccsOutcome {
    pub schedule: BspSchedule,
    pub moves: usize,
    pub local_minimum: bool,
}

pub fn hccs_improve(
    dag: &ComputationalDag,
    machine: &MachineParams,
    sched: &BspSchedule,
    budget: Budget,
) -> Result<BspSchedule> {
    hccs_improve_with(dag, machine, sched, budget).map(|o| o.schedule)
}

/// First-improvement retiming of communication steps.
///
/// Every transfer of `v` to a processor `q` may move to any phase between
/// `tau(v)` and the phase before the first use of `v` on `q`. The processor
/// and superstep of every node stay fixed. Only direct sends from the
/// producing processor are supported.
pub fn hccs_improve_with(
    dag: &ComputationalDag,
    machine: &MachineParams,
    sched: &BspSchedule,
    budget: Budget,
) -> Result<HccsOutcome> {
    check_schedule(dag, machine, sched)?;
    if !sched.is_direct() {
        return Err(Error::Precondition(
            "communication retiming needs direct sends from the producing processor".into(),
        ));
    }
    let sched = sched.prune_direct(dag);
    let windows = transfer_windows(dag, &sched);
    let mut steps: Vec<usize> = sched.comm().iter().map(|c| c.step).collect();
    let mut table = CostTable::new(dag, machine, &sched);
    let mut meter = budget.meter();
    let m = windows.len();
    let mut moves = 0;
    let mut since = 0;
    let mut i = 0;
    let mut local_minimum = m == 0;
    let mut changes = Vec::with_capacity(2);

    'outer: loop {
        if m == 0 {
            break;
        }
        let (c, lo, hi) = windows[i];
        let amount = machine.scaled_lambda(c.from, c.to) * dag.comm(c.node);
        let mut improved = false;
        for s2 in lo..=hi {
            if s2 == steps[i] {
                continue;
            }
            if meter.exhausted() {
                break 'outer;
            }
            meter.tick(1);
            changes.clear();
            changes.push(Change::Tuple { step: steps[i], from: c.from, to: c.to, amount, add: false });
            changes.push(Change::Tuple { step: s2, from: c.from, to: c.to, amount, add: true });
            if table.delta(&changes) < 0 {
                table.apply(&changes);
                steps[i] = s2;
                moves += 1;
                improved = true;
                break;
            }
        }
        if improved {
            since = 0;
        } else {
            since += 1;
            if since >= m {
                local_minimum = true;
                break;
            }
        }
        i = (i + 1) % m;
    }

    let comm = windows
        .iter()
        .zip(&steps)
        .map(|(&(c, _, _), &s)| CommStep { step: s, ..c })
        .collect();
    Ok(HccsOutcome {
        schedule: sched.with_comm(comm),
        moves,
        local_minimum,
    })
}

/// Feasible phase window `[tau(v), first use on q - 1]` of every tuple of a
/// pruned direct-send schedule, in tuple order.
pub(crate) fn transfer_windows(dag: &ComputationalDag, sched: &BspSchedule) -> Vec<(CommStep, usize, usize)> {
    let needed = first_needed(dag, sched.processors(), sched.supersteps());
    sched
        .comm()
        .iter()
        .map(|&c| {
            let first: usize = needed[&(c.node, c.to)];
            (c, sched.superstep(c.node as NodeId), first - 1)
        })
        .collect()
}
