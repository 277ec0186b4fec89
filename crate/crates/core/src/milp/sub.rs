//! Window model shared by the interval re-optimizer and the batch
//! initializer: nodes `V0` are placed into supersteps `[s1, s2]` while every
//! other assigned node keeps its processor, superstep and transfers.
//!
//! Reductions:
//! * a node of `V0` whose value is needed by a later node must reach that
//!   processor by the last phase of the window; its old later transfers are
//!   dropped, and the saving is not part of the objective;
//! * a predecessor outside `V0` is sent directly from its fixed processor,
//!   in any phase from `s1 - 1` on; processors it already reached before
//!   phase `s1 - 1` need nothing, and a transfer inside the window that a
//!   later node relies on must be kept in some form;
//! * transfers inside the window of other nodes are constants.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::dag::{ComputationalDag, NodeId};
use crate::machine::MachineParams;
use crate::schedule::CommStep;

use super::model::{Cmp, MilpModel, VarId};

/// Current state of the schedule around the window. Unassigned nodes are
/// ignored.
pub(crate) struct Frame<'a> {
    pub processor: &'a [Option<usize>],
    pub superstep: &'a [usize],
    pub comm: &'a [CommStep],
}

pub(crate) struct WindowModel {
    pub model: MilpModel,
    p: usize,
    s1: usize,
    s2: usize,
    pub v0: Vec<NodeId>,
    comp: Vec<VarId>,
    // (local node, from, to, step) -> variable
    comm: BTreeMap<(usize, usize, usize, usize), VarId>,
    // (external predecessor, to, step) -> variable
    ext: BTreeMap<(NodeId, usize, usize), VarId>,
    ext_from: HashMap<NodeId, usize>,
    /// Indices into the frame's transfers that the window replaces.
    pub dropped: HashSet<usize>,
}

impl WindowModel {
    fn len(&self) -> usize {
        self.s2 - self.s1 + 1
    }

    fn comp(&self, i: usize, q: usize, s: usize) -> VarId {
        self.comp[(i * self.p + q) * self.len() + (s - self.s1)]
    }

    pub fn build(
        dag: &ComputationalDag,
        machine: &MachineParams,
        frame: &Frame<'_>,
        v0: Vec<NodeId>,
        s1: usize,
        s2: usize,
    ) -> Self {
        let p = machine.num_processors();
        let d = machine.denom() as i64;
        let g = machine.g() as i64;
        let l = machine.latency() as i64;
        let len = s2 - s1 + 1;
        let first_phase = s1.saturating_sub(1);
        let mut local = HashMap::new();
        for (i, &v) in v0.iter().enumerate() {
            local.insert(v, i);
        }
        let is_later = |x: NodeId| frame.processor[x].is_some() && !local.contains_key(&x);
        let lam = |a: usize, b: usize| machine.scaled_lambda(a, b) as i64;

        let mut model = MilpModel::new();
        let mut comp = Vec::with_capacity(v0.len() * p * len);
        for &v in &v0 {
            for q in 0..p {
                for s in s1..=s2 {
                    comp.push(model.add_binary(format!("comp[{v},{q},{s}]"), 0));
                }
            }
        }

        // processors needing v after the window
        let need: Vec<Vec<usize>> = v0
            .iter()
            .map(|&v| {
                let mut qs: Vec<usize> = dag
                    .successors(v)
                    .iter()
                    .filter(|&&x| is_later(x))
                    .map(|&x| frame.processor[x].unwrap())
                    .collect();
                qs.sort_unstable();
                qs.dedup();
                qs
            })
            .collect();

        let mut comm = BTreeMap::new();
        for (i, &v) in v0.iter().enumerate() {
            for p1 in 0..p {
                for p2 in (0..p).filter(|&x| x != p1) {
                    for s in s1..=s2 {
                        if s == s2 && !need[i].contains(&p2) {
                            continue;
                        }
                        let x = model.add_binary(format!("comm[{v},{p1},{p2},{s}]"), 0);
                        comm.insert((i, p1, p2, s), x);
                    }
                }
            }
        }

        // external predecessors and the transfers the window takes over
        let mut ext_nodes: Vec<NodeId> = v0
            .iter()
            .flat_map(|&v| dag.predecessors(v).iter().copied())
            .filter(|u| !local.contains_key(u))
            .collect();
        ext_nodes.sort_unstable();
        ext_nodes.dedup();
        let ext_set: HashSet<NodeId> = ext_nodes.iter().copied().collect();
        let mut dropped = HashSet::new();
        let mut reached_before: HashSet<(NodeId, usize)> = HashSet::new();
        let mut window_sends: HashSet<(NodeId, usize)> = HashSet::new();
        let mut after: HashMap<(NodeId, usize), Vec<usize>> = HashMap::new();
        for (k, c) in frame.comm.iter().enumerate() {
            if local.contains_key(&c.node) {
                dropped.insert(k);
            } else if ext_set.contains(&c.node) {
                if c.step > s2 {
                    after.entry((c.node, c.to)).or_default().push(c.step);
                }
                if s1 > 0 && c.step < first_phase {
                    reached_before.insert((c.node, c.to));
                } else if c.step <= s2 {
                    dropped.insert(k);
                    window_sends.insert((c.node, c.to));
                }
            }
        }
        let mut ext = BTreeMap::new();
        let mut ext_from = HashMap::new();
        let mut must: Vec<(NodeId, usize)> = Vec::new();
        for &u in &ext_nodes {
            let pu = frame.processor[u].expect("predecessors are assigned");
            ext_from.insert(u, pu);
            for q in (0..p).filter(|&q| q != pu) {
                if reached_before.contains(&(u, q)) {
                    continue;
                }
                // later consumers on q that no transfer after the window serves
                let must_here = window_sends.contains(&(u, q))
                    && dag.successors(u).iter().any(|&x| {
                        is_later(x)
                            && frame.processor[x] == Some(q)
                            && !after
                                .get(&(u, q))
                                .is_some_and(|ts| ts.iter().any(|&t| t < frame.superstep[x]))
                    });
                // a transfer in the last phase only serves later consumers
                let last = if must_here { s2 } else { s2 - 1 };
                for s in first_phase..=last {
                    let x = model.add_binary(format!("send[{u},{pu},{q},{s}]"), 0);
                    ext.insert((u, q, s), x);
                }
                if must_here {
                    must.push((u, q));
                }
            }
        }

        // per-phase constants from kept transfers
        let phases: Vec<usize> = (first_phase..=s2).collect();
        let idx = |s: usize| s - first_phase;
        let mut const_send = vec![vec![0i64; p]; phases.len()];
        let mut const_recv = vec![vec![0i64; p]; phases.len()];
        let mut fixed_content = vec![false; phases.len()];
        for (k, c) in frame.comm.iter().enumerate() {
            if dropped.contains(&k) || c.step < first_phase || c.step > s2 {
                continue;
            }
            let x = lam(c.from, c.to) * dag.comm(c.node) as i64;
            const_send[idx(c.step)][c.from] += x;
            const_recv[idx(c.step)][c.to] += x;
            fixed_content[idx(c.step)] = true;
        }
        let mut fixed_work = vec![0i64; p];
        if s1 > 0 {
            for v in dag.nodes() {
                if frame.processor[v].is_some() && !local.contains_key(&v) && frame.superstep[v] == first_phase {
                    fixed_work[frame.processor[v].unwrap()] += dag.work(v) as i64;
                    fixed_content[0] = true;
                }
            }
        }

        let mut wm = WindowModel {
            model,
            p,
            s1,
            s2,
            v0,
            comp,
            comm,
            ext,
            ext_from,
            dropped,
        };
        let n0 = wm.v0.len();

        for i in 0..n0 {
            let mut row = Vec::with_capacity(p * len);
            for q in 0..p {
                for s in s1..=s2 {
                    row.push((wm.comp(i, q, s), 1));
                }
            }
            wm.model.add_constraint(row, Cmp::Eq, 1);
        }

        // send only what has been computed on the sender
        for (&(i, p1, _, s), &x) in &wm.comm {
            let mut row = vec![(x, 1)];
            for s_ in s1..=s {
                row.push((wm.comp(i, p1, s_), -1));
            }
            wm.model.add_constraint(row, Cmp::Le, 0);
        }

        // edge rule
        for (j, &v) in wm.v0.iter().enumerate() {
            for &u in dag.predecessors(v) {
                for q in 0..p {
                    for s in s1..=s2 {
                        let mut row = vec![(wm.comp(j, q, s), 1)];
                        if let Some(&i) = local.get(&u) {
                            for s_ in s1..=s {
                                row.push((wm.comp(i, q, s_), -1));
                            }
                            for from in (0..p).filter(|&f| f != q) {
                                for s_ in s1..s {
                                    if let Some(&x) = wm.comm.get(&(i, from, q, s_)) {
                                        row.push((x, -1));
                                    }
                                }
                            }
                        } else {
                            if wm.ext_from[&u] == q || reached_before.contains(&(u, q)) {
                                continue;
                            }
                            for s_ in first_phase..s {
                                if let Some(&x) = wm.ext.get(&(u, q, s_)) {
                                    row.push((x, -1));
                                }
                            }
                        }
                        wm.model.add_constraint(row, Cmp::Le, 0);
                    }
                }
            }
        }

        // values needed after the window
        for (i, needs) in need.iter().enumerate().take(n0) {
            for &q in needs {
                let mut row = Vec::new();
                for s in s1..=s2 {
                    row.push((wm.comp(i, q, s), 1));
                    for from in (0..p).filter(|&f| f != q) {
                        if let Some(&x) = wm.comm.get(&(i, from, q, s)) {
                            row.push((x, 1));
                        }
                    }
                }
                wm.model.add_constraint(row, Cmp::Ge, 1);
            }
        }
        for &(u, q) in &must {
            let row: Vec<(VarId, i64)> = (first_phase..=s2)
                .filter_map(|s| wm.ext.get(&(u, q, s)).map(|&x| (x, 1)))
                .collect();
            wm.model.add_constraint(row, Cmp::Ge, 1);
        }

        // cost rows
        let total_work = dag.total_work() as i64;
        let max_lambda = (0..p)
            .flat_map(|a| (0..p).map(move |b| (a, b)))
            .map(|(a, b)| lam(a, b))
            .max()
            .unwrap_or(0);
        let max_h = max_lambda * dag.total_comm() as i64 * p as i64
            + const_send.iter().chain(&const_recv).flatten().sum::<i64>();
        for &s in &phases {
            let k = idx(s);
            let used = wm.model.add_binary(format!("used[{s}]"), d * l);
            if fixed_content[k] {
                wm.model.fix(used, 1);
            }
            let h = wm.model.add_continuous(format!("h[{s}]"), 0, max_h, g);
            if s >= s1 {
                let w = wm.model.add_continuous(format!("work[{s}]"), 0, total_work, d);
                for q in 0..p {
                    let row: Vec<(VarId, i64)> = (0..n0)
                        .map(|i| (wm.comp(i, q, s), dag.work(wm.v0[i]) as i64))
                        .filter(|&(_, a)| a > 0)
                        .collect();
                    wm.model.add_aux_lower_bound(w, 1, row, 0);
                }
                for i in 0..n0 {
                    let row: Vec<(VarId, i64)> = (0..p).map(|q| (wm.comp(i, q, s), 1)).collect();
                    wm.model.add_aux_lower_bound(used, 1, row, 0);
                }
            } else {
                wm.model.add_objective_constant(d * fixed_work.iter().copied().max().unwrap_or(0));
            }
            let mut send: Vec<Vec<(VarId, i64)>> = vec![Vec::new(); p];
            let mut recv: Vec<Vec<(VarId, i64)>> = vec![Vec::new(); p];
            let mut any = Vec::new();
            for (&(i, p1, p2, s_), &x) in &wm.comm {
                if s_ == s {
                    let a = lam(p1, p2) * dag.comm(wm.v0[i]) as i64;
                    send[p1].push((x, a));
                    recv[p2].push((x, a));
                    any.push((x, 1));
                }
            }
            for (&(u, q, s_), &x) in &wm.ext {
                if s_ == s {
                    let pu = wm.ext_from[&u];
                    let a = lam(pu, q) * dag.comm(u) as i64;
                    send[pu].push((x, a));
                    recv[q].push((x, a));
                    any.push((x, 1));
                }
            }
            for q in 0..p {
                let mut row = std::mem::take(&mut send[q]);
                row.retain(|&(_, a)| a > 0);
                row.sort_unstable();
                wm.model.add_aux_lower_bound(h, 1, row, const_send[k][q]);
                let mut row = std::mem::take(&mut recv[q]);
                row.retain(|&(_, a)| a > 0);
                row.sort_unstable();
                wm.model.add_aux_lower_bound(h, 1, row, const_recv[k][q]);
            }
            if !any.is_empty() {
                any.sort_unstable();
                let k = any.len() as i64;
                wm.model.add_aux_lower_bound(used, k, any, 0);
            }
        }
        wm
    }

    /// Encodes a placement of `V0` plus transfers. Transfers without a
    /// matching variable are ignored; a V0 value needed after the window
    /// that does not arrive inside it is sent in the last phase.
    pub fn encode(
        &self,
        dag: &ComputationalDag,
        frame: &Frame<'_>,
        place: &[(usize, usize)],
        transfers: &[CommStep],
    ) -> Vec<f64> {
        let mut partial: Vec<Option<f64>> = vec![None; self.model.num_vars()];
        for x in self.comp.iter().chain(self.comm.values()).chain(self.ext.values()) {
            partial[x.index()] = Some(0.0);
        }
        let local: HashMap<NodeId, usize> = self.v0.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        for (i, &(q, s)) in place.iter().enumerate() {
            partial[self.comp(i, q, s).index()] = Some(1.0);
        }
        for c in transfers {
            let x = match local.get(&c.node) {
                Some(&i) => self.comm.get(&(i, c.from, c.to, c.step)),
                None => self.ext.get(&(c.node, c.to, c.step)),
            };
            if let Some(x) = x {
                partial[x.index()] = Some(1.0);
            }
        }
        for (i, &v) in self.v0.iter().enumerate() {
            let (pv, _) = place[i];
            for &x in dag.successors(v) {
                let Some(q) = frame.processor[x] else { continue };
                if local.contains_key(&x) || q == pv {
                    continue;
                }
                let arrived = (self.s1..=self.s2).any(|s| {
                    self.comm
                        .get(&(i, pv, q, s))
                        .is_some_and(|y| partial[y.index()] == Some(1.0))
                });
                if !arrived {
                    if let Some(y) = self.comm.get(&(i, pv, q, self.s2)) {
                        partial[y.index()] = Some(1.0);
                    }
                }
            }
        }
        self.model.complete(&partial)
    }

    /// Placement of `V0` and the transfers chosen by the solution.
    pub fn decode(&self, values: &[f64]) -> (Vec<(usize, usize)>, Vec<CommStep>) {
        let mut place = vec![(0, self.s1); self.v0.len()];
        for (i, slot) in place.iter_mut().enumerate() {
            for q in 0..self.p {
                for s in self.s1..=self.s2 {
                    if values[self.comp(i, q, s).index()] > 0.5 {
                        *slot = (q, s);
                    }
                }
            }
        }
        let mut comm = Vec::new();
        for (&(i, p1, p2, s), x) in &self.comm {
            if values[x.index()] > 0.5 {
                comm.push(CommStep { node: self.v0[i], from: p1, to: p2, step: s });
            }
        }
        for (&(u, q, s), x) in &self.ext {
            if values[x.index()] > 0.5 {
                comm.push(CommStep { node: u, from: self.ext_from[&u], to: q, step: s });
            }
        }
        comm.sort_unstable();
        (place, comm)
    }
}
