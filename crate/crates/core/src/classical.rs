//! Classical (time-based) schedules and their conversion to BSP.

use crate::dag::{ComputationalDag, NodeId};
use crate::error::{Error, Result};
use crate::schedule::BspSchedule;

/// Node placement at concrete points in time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalSchedule {
    pub processor: Vec<usize>,
    pub start: Vec<u64>,
    pub finish: Vec<u64>,
}

impl ClassicalSchedule {
    pub fn makespan(&self) -> u64 {
        self.finish.iter().copied().max().unwrap_or(0)
    }

    /// Checks that finish = start + work, that processor intervals do not
    /// overlap and that every node starts after its predecessors finish.
    pub fn check(&self, dag: &ComputationalDag, num_processors: usize) -> Result<()> {
        let n = dag.num_nodes();
        if self.processor.len() != n || self.start.len() != n || self.finish.len() != n {
            return Err(Error::Precondition("classical schedule length mismatch".into()));
        }
        for v in dag.nodes() {
            if self.processor[v] >= num_processors {
                return Err(Error::Precondition(format!("node {v}: processor out of range")));
            }
            if self.finish[v] != self.start[v] + dag.work(v) {
                return Err(Error::Precondition(format!("node {v}: finish != start + work")));
            }
            for &u in dag.predecessors(v) {
                if self.finish[u] > self.start[v] {
                    return Err(Error::Precondition(format!(
                        "node {v} starts before predecessor {u} finishes"
                    )));
                }
            }
        }
        for p in 0..num_processors {
            let mut jobs: Vec<_> = dag
                .nodes()
                .filter(|&v| self.processor[v] == p && dag.work(v) > 0)
                .map(|v| (self.start[v], self.finish[v]))
                .collect();
            jobs.sort_unstable();
            if jobs.windows(2).any(|w| w[0].1 > w[1].0) {
                return Err(Error::Precondition(format!("overlapping nodes on processor {p}")));
            }
        }
        Ok(())
    }

    /// `node proc start` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in 0..self.processor.len() {
            out.push_str(&format!("{} {} {}\n", v, self.processor[v], self.start[v]));
        }
        out
    }
}

/// Cuts a classical schedule into supersteps.
///
/// Nodes are ordered by start time (ties by topological position). A
/// superstep ends right before the first node in this order that still has
/// an unassigned predecessor on another processor; everything before that
/// node joins the current superstep. Communication is the lazy schedule.
pub fn classical_to_bsp(dag: &ComputationalDag, cs: &ClassicalSchedule) -> Result<BspSchedule> {
    let n = dag.num_nodes();
    if cs.processor.len() != n || cs.start.len() != n {
        return Err(Error::Precondition("classical schedule length mismatch".into()));
    }
    for (u, v) in dag.edges() {
        if cs.start[u] + dag.work(u) > cs.start[v] {
            return Err(Error::Precondition(format!(
                "edge ({u},{v}) violated by start times"
            )));
        }
    }
    let mut topo_pos = vec![0; n];
    for (i, &v) in dag.topological_order().iter().enumerate() {
        topo_pos[v] = i;
    }
    let mut order: Vec<NodeId> = dag.nodes().collect();
    order.sort_unstable_by_key(|&v| (cs.start[v], topo_pos[v]));
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }

    let mut superstep = vec![0; n];
    let mut first_open = 0;
    let mut step = 0;
    while first_open < n {
        let barrier = (first_open..n)
            .find(|&j| {
                let v = order[j];
                dag.predecessors(v)
                    .iter()
                    .any(|&u| pos[u] >= first_open && cs.processor[u] != cs.processor[v])
            })
            .unwrap_or(n);
        debug_assert!(barrier > first_open);
        for &v in &order[first_open..barrier] {
            superstep[v] = step;
        }
        first_open = barrier;
        step += 1;
    }
    BspSchedule::from_assignment(dag, cs.processor.clone(), superstep)
}
