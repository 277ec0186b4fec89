//! Incremental per-superstep cost bookkeeping shared by the local searches.
//!
//! Communication amounts are scaled by the machine's common denominator so
//! every quantity is an integer and deltas are exact.

use crate::dag::ComputationalDag;
use crate::machine::MachineParams;
use crate::schedule::BspSchedule;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Change {
    Node { step: usize, p: usize, work: u64, add: bool },
    Tuple { step: usize, from: usize, to: usize, amount: u64, add: bool },
}

impl Change {
    fn step(&self) -> usize {
        match *self {
            Change::Node { step, .. } | Change::Tuple { step, .. } => step,
        }
    }
}

pub(crate) struct CostTable {
    p: usize,
    denom: u64,
    g: u64,
    latency: u64,
    work: Vec<u64>,
    send: Vec<u64>,
    recv: Vec<u64>,
    nodes: Vec<u32>,
    tuples: Vec<u32>,
    step_cost: Vec<u64>,
    total: u64,
    // scratch
    steps: Vec<usize>,
    row_w: Vec<i64>,
    row_s: Vec<i64>,
    row_r: Vec<i64>,
}

impl CostTable {
    pub fn new(dag: &ComputationalDag, machine: &MachineParams, sched: &BspSchedule) -> Self {
        let p = machine.num_processors();
        let s = sched.num_supersteps();
        let mut t = Self {
            p,
            denom: machine.denom(),
            g: machine.g(),
            latency: machine.latency(),
            work: vec![0; s * p],
            send: vec![0; s * p],
            recv: vec![0; s * p],
            nodes: vec![0; s],
            tuples: vec![0; s],
            step_cost: vec![0; s],
            total: 0,
            steps: Vec::new(),
            row_w: vec![0; p],
            row_s: vec![0; p],
            row_r: vec![0; p],
        };
        for v in dag.nodes() {
            let st = sched.superstep(v);
            t.work[st * p + sched.processor(v)] += dag.work(v);
            t.nodes[st] += 1;
        }
        for c in sched.comm() {
            let x = machine.scaled_lambda(c.from, c.to) * dag.comm(c.node);
            t.send[c.step * p + c.from] += x;
            t.recv[c.step * p + c.to] += x;
            t.tuples[c.step] += 1;
        }
        for st in 0..s {
            t.step_cost[st] = t.cost_of_row(st, None);
        }
        t.total = t.step_cost.iter().sum();
        t
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    fn cost_of_row(&self, st: usize, scratch: Option<(&[i64], &[i64], &[i64], i64, i64)>) -> u64 {
        let base = st * self.p;
        let (mut wmax, mut h) = (0u64, 0u64);
        let (dn, dt) = scratch.map_or((0, 0), |x| (x.3, x.4));
        for q in 0..self.p {
            let (dw, ds, dr) = scratch.map_or((0, 0, 0), |x| (x.0[q], x.1[q], x.2[q]));
            let w = (self.work[base + q] as i64 + dw) as u64;
            let s = (self.send[base + q] as i64 + ds) as u64;
            let r = (self.recv[base + q] as i64 + dr) as u64;
            wmax = wmax.max(w);
            h = h.max(s.max(r));
        }
        let nonempty = self.nodes[st] as i64 + dn > 0 || self.tuples[st] as i64 + dt > 0;
        if nonempty {
            self.denom * (wmax + self.latency) + self.g * h
        } else {
            0
        }
    }

    /// Exact change of the total cost if `changes` were applied.
    pub fn delta(&mut self, changes: &[Change]) -> i64 {
        self.steps.clear();
        for c in changes {
            if !self.steps.contains(&c.step()) {
                self.steps.push(c.step());
            }
        }
        let mut delta = 0i64;
        for i in 0..self.steps.len() {
            let st = self.steps[i];
            self.row_w.iter_mut().for_each(|x| *x = 0);
            self.row_s.iter_mut().for_each(|x| *x = 0);
            self.row_r.iter_mut().for_each(|x| *x = 0);
            let (mut dn, mut dt) = (0i64, 0i64);
            for c in changes.iter().filter(|c| c.step() == st) {
                match *c {
                    Change::Node { p, work, add, .. } => {
                        let sign = if add { 1 } else { -1 };
                        self.row_w[p] += sign * work as i64;
                        dn += sign;
                    }
                    Change::Tuple { from, to, amount, add, .. } => {
                        let sign = if add { 1 } else { -1 };
                        self.row_s[from] += sign * amount as i64;
                        self.row_r[to] += sign * amount as i64;
                        dt += sign;
                    }
                }
            }
            let new = self.cost_of_row(st, Some((&self.row_w, &self.row_s, &self.row_r, dn, dt)));
            delta += new as i64 - self.step_cost[st] as i64;
        }
        delta
    }

    pub fn apply(&mut self, changes: &[Change]) {
        for c in changes {
            match *c {
                Change::Node { step, p, work, add } => {
                    let i = step * self.p + p;
                    if add {
                        self.work[i] += work;
                        self.nodes[step] += 1;
                    } else {
                        self.work[i] -= work;
                        self.nodes[step] -= 1;
                    }
                }
                Change::Tuple { step, from, to, amount, add } => {
                    let (i, j) = (step * self.p + from, step * self.p + to);
                    if add {
                        self.send[i] += amount;
                        self.recv[j] += amount;
                        self.tuples[step] += 1;
                    } else {
                        self.send[i] -= amount;
                        self.recv[j] -= amount;
                        self.tuples[step] -= 1;
                    }
                }
            }
        }
        for c in changes {
            let st = c.step();
            let new = self.cost_of_row(st, None);
            self.total = self.total - self.step_cost[st] + new;
            self.step_cost[st] = new;
        }
    }
}
