use crate::budget::Budget;
use crate::cost::scaled_cost;
use crate::dag::{ComputationalDag, NodeId};
use crate::error::{Error, Result};
use crate::machine::MachineParams;
use crate::schedule::{check_schedule, BspSchedule};

use super::table::{Change, CostTable};

#[derive(Debug, Clone, Default)]
pub struct HcConfig {
    /// Stop after this many accepted moves.
    pub max_moves: Option<usize>,
    /// Recompute the cost from scratch after every accepted move and panic
    /// on disagreement with the incremental bookkeeping.
    pub verify: bool,
}

#[derive(Debug, Clone)]
pub struct HcOutcome {
    pub schedule: BspSchedule,
    pub moves: usize,
    /// True if the search stopped because no improving move exists.
    pub local_minimum: bool,
}

/// First-improvement hill climbing over node moves with the default
/// configuration.
pub fn hc_improve(
    dag: &ComputationalDag,
    machine: &MachineParams,
    sched: &BspSchedule,
    budget: Budget,
) -> Result<BspSchedule> {
    hc_improve_with(dag, machine, sched, budget, &HcConfig::default()).map(|o| o.schedule)
}

/// First-improvement hill climbing over node moves.
///
/// A move takes `v` from `(p, s)` to another processor in `s`, or to any
/// processor in `s - 1` or `s + 1`; existing supersteps only. The
/// communication schedule stays lazy throughout. Nodes are scanned in
/// ascending order, targets by superstep `s - 1, s, s + 1` and then by
/// processor; after an accepted move the scan continues with the next node.
/// The input must be valid and use the lazy communication schedule.
pub fn hc_improve_with(
    dag: &ComputationalDag,
    machine: &MachineParams,
    sched: &BspSchedule,
    budget: Budget,
    config: &HcConfig,
) -> Result<HcOutcome> {
    check_schedule(dag, machine, sched)?;
    if !sched.is_lazy(dag) {
        return Err(Error::Precondition(
            "hill climbing needs the lazy communication schedule".into(),
        ));
    }
    let n = dag.num_nodes();
    let mut state = HcState::new(dag, machine, sched);
    let mut meter = budget.meter();
    let mut moves = 0;
    let mut since_improvement = 0;
    let mut v = 0;
    let mut local_minimum = n == 0;
    let mut changes = Vec::new();

    'outer: loop {
        if n == 0 {
            break;
        }
        if config.max_moves.is_some_and(|m| moves >= m) {
            break;
        }
        let (p, s) = (state.processor[v], state.superstep[v]);
        let lo = s.saturating_sub(1);
        let hi = (s + 1).min(state.num_supersteps - 1);
        let mut improved = false;
        'targets: for s2 in lo..=hi {
            for p2 in 0..state.p {
                if (p2, s2) == (p, s) {
                    continue;
                }
                if meter.exhausted() {
                    break 'outer;
                }
                if !state.is_valid_move(v, p2, s2) {
                    continue;
                }
                meter.tick(1);
                state.move_changes(v, p2, s2, &mut changes);
                if state.table.delta(&changes) < 0 {
                    state.table.apply(&changes);
                    state.processor[v] = p2;
                    state.superstep[v] = s2;
                    moves += 1;
                    improved = true;
                    if config.verify {
                        state.verify();
                    }
                    break 'targets;
                }
            }
        }
        if improved {
            since_improvement = 0;
        } else {
            since_improvement += 1;
            if since_improvement >= n {
                local_minimum = true;
                break;
            }
        }
        v = (v + 1) % n;
    }

    let schedule = BspSchedule::from_assignment(dag, state.processor, state.superstep)
        .expect("moves preserve precedence")
        .with_num_supersteps(state.num_supersteps);
    Ok(HcOutcome {
        schedule,
        moves,
        local_minimum,
    })
}

struct HcState<'a> {
    dag: &'a ComputationalDag,
    machine: &'a MachineParams,
    p: usize,
    num_supersteps: usize,
    processor: Vec<usize>,
    superstep: Vec<usize>,
    table: CostTable,
    // scratch: earliest successor superstep per processor (usize::MAX if none)
    first: Vec<usize>,
}

impl<'a> HcState<'a> {
    fn new(dag: &'a ComputationalDag, machine: &'a MachineParams, sched: &BspSchedule) -> Self {
        Self {
            dag,
            machine,
            p: machine.num_processors(),
            num_supersteps: sched.num_supersteps(),
            processor: sched.processors().to_vec(),
            superstep: sched.supersteps().to_vec(),
            table: CostTable::new(dag, machine, sched),
            first: vec![usize::MAX; machine.num_processors()],
        }
    }

    fn is_valid_move(&self, v: NodeId, p2: usize, s2: usize) -> bool {
        let dag = self.dag;
        dag.predecessors(v).iter().all(|&u| {
            if self.processor[u] == p2 {
                self.superstep[u] <= s2
            } else {
                self.superstep[u] < s2
            }
        }) && dag.successors(v).iter().all(|&x| {
            if self.processor[x] == p2 {
                s2 <= self.superstep[x]
            } else {
                s2 < self.superstep[x]
            }
        })
    }

    fn amount(&self, u: NodeId, from: usize, to: usize) -> u64 {
        self.machine.scaled_lambda(from, to) * self.dag.comm(u)
    }

    /// Cost-table changes of moving `v` to `(p2, s2)` under lazy
    /// communication.
    fn move_changes(&mut self, v: NodeId, p2: usize, s2: usize, out: &mut Vec<Change>) {
        out.clear();
        let dag = self.dag;
        let (p, s) = (self.processor[v], self.superstep[v]);
        let w = dag.work(v);
        out.push(Change::Node { step: s, p, work: w, add: false });
        out.push(Change::Node { step: s2, p: p2, work: w, add: true });

        // outgoing sends of v: same deadlines, new origin
        if p != p2 {
            self.first.iter_mut().for_each(|x| *x = usize::MAX);
            for &x in dag.successors(v) {
                let q = self.processor[x];
                self.first[q] = self.first[q].min(self.superstep[x]);
            }
            for q in 0..self.p {
                let f = self.first[q];
                if f == usize::MAX {
                    continue;
                }
                if q != p {
                    out.push(Change::Tuple { step: f - 1, from: p, to: q, amount: self.amount(v, p, q), add: false });
                }
                if q != p2 {
                    out.push(Change::Tuple { step: f - 1, from: p2, to: q, amount: self.amount(v, p2, q), add: true });
                }
            }
        }

        // sends into v: the deadline of u towards p and p2 may shift
        let qs = [p, p2];
        let qs = if p == p2 { &qs[..1] } else { &qs[..] };
        for &u in dag.predecessors(v) {
            let pu = self.processor[u];
            for &q in qs {
                if q == pu {
                    continue;
                }
                let (mut old, mut new) = (usize::MAX, usize::MAX);
                for &x in dag.successors(u) {
                    let (px, sx) = (self.processor[x], self.superstep[x]);
                    if px == q {
                        old = old.min(sx);
                    }
                    let (nx, ns) = if x == v { (p2, s2) } else { (px, sx) };
                    if nx == q {
                        new = new.min(ns);
                    }
                }
                if old != new {
                    let amount = self.amount(u, pu, q);
                    if old != usize::MAX {
                        out.push(Change::Tuple { step: old - 1, from: pu, to: q, amount, add: false });
                    }
                    if new != usize::MAX {
                        out.push(Change::Tuple { step: new - 1, from: pu, to: q, amount, add: true });
                    }
                }
            }
        }
    }

    fn verify(&self) {
        let sched = BspSchedule::from_assignment(self.dag, self.processor.clone(), self.superstep.clone())
            .expect("moves preserve precedence")
            .with_num_supersteps(self.num_supersteps);
        assert_eq!(scaled_cost(self.dag, self.machine, &sched), self.table.total());
    }
}
