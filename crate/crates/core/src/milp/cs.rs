use crate::cost::scaled_cost;
use crate::dag::ComputationalDag;
use crate::error::{Error, Result};
use crate::local_search::transfer_windows;
use crate::machine::MachineParams;
use crate::schedule::{check_schedule, BspSchedule, CommStep};

use super::model::{Cmp, MilpModel, VarId};
use super::solver::SolveStatus;
use super::{IlpOptions, IlpOutcome};

/// Globally re-times every required transfer within its window
/// `[tau(v), first use - 1]` with processors and supersteps fixed. Redundant
/// transfers are pruned first. Supersteps without nodes pay latency only
/// while they carry a transfer.
pub fn ilp_cs<'a>(
    dag: &ComputationalDag,
    machine: &MachineParams,
    sched: &BspSchedule,
    opts: impl Into<IlpOptions<'a>>,
) -> Result<IlpOutcome> {
    let opts = opts.into();
    check_schedule(dag, machine, sched)?;
    if !sched.is_direct() {
        return Err(Error::Precondition(
            "communication scheduling needs direct sends from the producing processor".into(),
        ));
    }
    let pruned = sched.prune_direct(dag);
    let windows = transfer_windows(dag, &pruned);
    if windows.is_empty() {
        return Ok(IlpOutcome::unchanged(sched, SolveStatus::ProvenOptimal));
    }
    let p = machine.num_processors();
    let s_count = pruned.num_supersteps();
    let d = machine.denom() as i64;
    let g = machine.g() as i64;
    let l = machine.latency() as i64;

    let mut has_nodes = vec![false; s_count];
    for &t in pruned.supersteps() {
        has_nodes[t] = true;
    }
    let mut model = MilpModel::new();
    let mut vars: Vec<Vec<(usize, VarId)>> = Vec::with_capacity(windows.len());
    let mut by_step: Vec<Vec<(usize, VarId)>> = vec![Vec::new(); s_count];
    for (k, (c, lo, hi)) in windows.iter().enumerate() {
        let row: Vec<(usize, VarId)> = (*lo..=*hi)
            .map(|s| (s, model.add_binary(format!("comm[{},{},{},{s}]", c.node, c.from, c.to), 0)))
            .collect();
        model.add_constraint(row.iter().map(|&(_, x)| (x, 1)).collect(), Cmp::Eq, 1);
        for &(s, x) in &row {
            by_step[s].push((k, x));
        }
        vars.push(row);
    }
    let max_h: i64 = windows
        .iter()
        .map(|(c, _, _)| machine.scaled_lambda(c.from, c.to) as i64 * dag.comm(c.node) as i64)
        .sum();
    for s in 0..s_count {
        let mut send: Vec<Vec<(VarId, i64)>> = vec![Vec::new(); p];
        let mut recv: Vec<Vec<(VarId, i64)>> = vec![Vec::new(); p];
        let mut any = Vec::new();
        for &(k, x) in &by_step[s] {
            let c = &windows[k].0;
            let a = machine.scaled_lambda(c.from, c.to) as i64 * dag.comm(c.node) as i64;
            if a > 0 {
                send[c.from].push((x, a));
                recv[c.to].push((x, a));
            }
            any.push((x, 1));
        }
        if any.is_empty() {
            continue;
        }
        let h = model.add_continuous(format!("h[{s}]"), 0, max_h, g);
        for q in 0..p {
            model.add_aux_lower_bound(h, 1, std::mem::take(&mut send[q]), 0);
            model.add_aux_lower_bound(h, 1, std::mem::take(&mut recv[q]), 0);
        }
        if !has_nodes[s] {
            let used = model.add_binary(format!("used[{s}]"), d * l);
            let k = any.len() as i64;
            model.add_aux_lower_bound(used, k, any, 0);
        }
    }

    let mut partial: Vec<Option<f64>> = vec![None; model.num_vars()];
    for ((c, _, _), row) in windows.iter().zip(&vars) {
        for &(s, x) in row {
            partial[x.index()] = Some(if s == c.step { 1.0 } else { 0.0 });
        }
    }
    let hint = model.complete(&partial);
    model.set_warm_start(hint);
    let result = opts.solve(&model)?;
    let Some(values) = result.values else {
        return Ok(IlpOutcome::unchanged(sched, result.status));
    };
    let comm: Vec<CommStep> = windows
        .iter()
        .zip(&vars)
        .map(|((c, _, _), row)| {
            let s = row
                .iter()
                .find(|&&(_, x)| values[x.index()] > 0.5)
                .map_or(c.step, |&(s, _)| s);
            CommStep { step: s, ..*c }
        })
        .collect();
    let candidate = pruned.with_comm(comm);
    debug_assert!(check_schedule(dag, machine, &candidate).is_ok());
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
