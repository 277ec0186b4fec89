use crate::dag::{ComputationalDag, NodeId};
use crate::error::Result;
use crate::machine::MachineParams;
use crate::schedule::{BspSchedule, CommStep};

use super::sub::{Frame, WindowModel};
use super::IlpOptions;

/// Batches satisfy `|V0| * 3 * P^2 <= INIT_VARIABLE_LIMIT` where possible.
pub const INIT_VARIABLE_LIMIT: usize = 2_000;

/// Supersteps offered to each batch.
pub const INIT_WINDOW: usize = 3;

/// Nodes per batch: `floor(2000 / (3 P^2))`, at least one.
pub fn init_batch_size(p: usize) -> usize {
    (INIT_VARIABLE_LIMIT / (INIT_WINDOW * p * p)).max(1)
}

/// Batch-wise MILP construction.
///
/// Nodes are taken in topological order in batches of
/// [`init_batch_size`]; each batch is placed into the three supersteps after
/// the last used one, given all earlier placements and their transfers.
/// Successors outside the batch are ignored. The budget is split evenly over
/// the batches; a batch without incumbent goes to processor 0 in the first
/// superstep of its window. The result uses the lazy communication schedule.
pub fn ilp_init<'a>(
    dag: &ComputationalDag,
    machine: &MachineParams,
    opts: impl Into<IlpOptions<'a>>,
) -> Result<BspSchedule> {
    let opts = opts.into();
    let n = dag.num_nodes();
    if n == 0 {
        return Ok(BspSchedule::trivial(dag));
    }
    let k = init_batch_size(machine.num_processors());
    let batches: Vec<Vec<NodeId>> = dag.topological_order().chunks(k).map(|c| c.to_vec()).collect();
    let per_batch = opts.with_budget(opts.budget.scaled(1.0 / batches.len() as f64));
    let mut processor: Vec<Option<usize>> = vec![None; n];
    let mut superstep = vec![0usize; n];
    let mut comm: Vec<CommStep> = Vec::new();
    let mut next = 0;

    for v0 in batches {
        let (s1, s2) = (next, next + INIT_WINDOW - 1);
        let frame = Frame {
            processor: &processor,
            superstep: &superstep,
            comm: &comm,
        };
        let mut wm = WindowModel::build(dag, machine, &frame, v0, s1, s2);

        // fallback: the whole batch on processor 0 in superstep s1
        let fallback_place = vec![(0, s1); wm.v0.len()];
        let mut fallback_comm: Vec<CommStep> = wm
            .v0
            .iter()
            .flat_map(|&v| dag.predecessors(v).iter().copied())
            .filter(|&u| processor[u].is_some_and(|pu| pu != 0))
            .map(|u| CommStep::new(u, processor[u].unwrap(), 0, s1 - 1))
            .collect();
        fallback_comm.sort_unstable();
        fallback_comm.dedup();
        let hint = wm.encode(dag, &frame, &fallback_place, &fallback_comm);
        wm.model.set_warm_start(hint);
        let result = per_batch.solve(&wm.model)?;
        let (place, new_comm) = match result.values {
            Some(values) => wm.decode(&values),
            None => (fallback_place, fallback_comm),
        };

        let mut kept: Vec<CommStep> = comm
            .iter()
            .enumerate()
            .filter(|(i, _)| !wm.dropped.contains(i))
            .map(|(_, &c)| c)
            .collect();
        kept.extend(new_comm);
        comm = kept;
        for (&v, &(q, s)) in wm.v0.iter().zip(&place) {
            processor[v] = Some(q);
            superstep[v] = s;
            next = next.max(s + 1);
        }
    }

    let processor = processor.into_iter().map(|p| p.expect("every node batched")).collect();
    Ok(BspSchedule::from_assignment(dag, processor, superstep)?.compact())
}
