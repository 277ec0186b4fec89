use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dag::{ComputationalDag, NodeId};
use crate::error::{Error, Result};

/// One edge contraction. Ids of merged nodes are fresh: the `i`-th
/// contraction of a DAG with `n` nodes creates node `n + i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contraction {
    pub edge: (NodeId, NodeId),
    pub merged: NodeId,
    pub work: u64,
    pub comm: u64,
    /// Neighbours of the merged node right after the contraction.
    pub preds: Vec<NodeId>,
    pub succs: Vec<NodeId>,
}

/// The contractions applied to a DAG, in order. Level `k` is the DAG after
/// the first `k` contractions; level 0 is the original.
#[derive(Debug, Clone)]
pub struct CoarseningSequence {
    original: ComputationalDag,
    records: Vec<Contraction>,
}

impl CoarseningSequence {
    pub fn original(&self) -> &ComputationalDag {
        &self.original
    }

    pub fn records(&self) -> &[Contraction] {
        &self.records
    }

    /// Number of contractions, i.e. the coarsest level.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn id_limit(&self) -> usize {
        self.original.num_nodes() + self.records.len()
    }

    /// For every id (original or merged), the id that represents it at
    /// `level`. Ids created after `level` map to themselves.
    fn representatives(&self, level: usize) -> Vec<NodeId> {
        let n = self.original.num_nodes();
        let mut parent: Vec<NodeId> = (0..self.id_limit()).collect();
        for rec in &self.records[..level] {
            parent[rec.edge.0] = rec.merged;
            parent[rec.edge.1] = rec.merged;
        }
        // Parents always have larger ids, so one descending pass resolves
        // every chain.
        let mut rep = parent;
        for id in (0..n + level).rev() {
            let p = rep[id];
            if p != id {
                rep[id] = rep[p];
            }
        }
        rep
    }

    /// Ids alive at `level`, ascending. Node `i` of [`Self::dag_at`] is the
    /// `i`-th entry.
    pub fn alive_at(&self, level: usize) -> Vec<NodeId> {
        let mut dead = vec![false; self.original.num_nodes() + level];
        for rec in &self.records[..level] {
            dead[rec.edge.0] = true;
            dead[rec.edge.1] = true;
        }
        (0..dead.len()).filter(|&i| !dead[i]).collect()
    }

    /// The DAG at `level`, with nodes numbered as in [`Self::alive_at`].
    pub fn dag_at(&self, level: usize) -> Result<(ComputationalDag, Vec<NodeId>)> {
        if level > self.len() {
            return Err(Error::InvalidArgument(format!(
                "level {level} beyond coarsest level {}",
                self.len()
            )));
        }
        let alive = self.alive_at(level);
        let rep = self.representatives(level);
        let mut index = vec![usize::MAX; self.id_limit()];
        for (i, &id) in alive.iter().enumerate() {
            index[id] = i;
        }
        let mut work = vec![0; alive.len()];
        let mut comm = vec![0; alive.len()];
        for v in self.original.nodes() {
            let i = index[rep[v]];
            work[i] += self.original.work(v);
            comm[i] += self.original.comm(v);
        }
        let edges: Vec<(usize, usize)> = self
            .original
            .edges()
            .map(|(a, b)| (index[rep[a]], index[rep[b]]))
            .filter(|(a, b)| a != b)
            .collect();
        let dag = ComputationalDag::from_edges_merged(work, comm, &edges)?;
        Ok((dag, alive))
    }

    /// For each node of the DAG at `to`, its node index in the DAG at
    /// `from`. Requires `to <= from`.
    pub fn projection(&self, from: usize, to: usize) -> Result<Vec<usize>> {
        if to > from || from > self.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot project from level {from} to level {to}"
            )));
        }
        let rep = self.representatives(from);
        let coarse = self.alive_at(from);
        let mut index = vec![usize::MAX; self.id_limit()];
        for (i, &id) in coarse.iter().enumerate() {
            index[id] = i;
        }
        Ok(self.alive_at(to).into_iter().map(|id| index[rep[id]]).collect())
    }
}

/// Mutable DAG under contraction. A merged node reuses the slot of the
/// edge's tail; `reach[x]` holds every slot reachable from `x`.
struct WorkGraph {
    id: Vec<NodeId>,
    alive: Vec<bool>,
    work: Vec<u64>,
    comm: Vec<u64>,
    succ: Vec<BTreeSet<usize>>,
    pred: Vec<BTreeSet<usize>>,
    reach: Vec<Vec<u64>>,
    slot: Vec<usize>,
    count: usize,
}

fn bit(set: &[u64], i: usize) -> bool {
    set[i / 64] >> (i % 64) & 1 == 1
}

impl WorkGraph {
    fn new(dag: &ComputationalDag) -> Self {
        let n = dag.num_nodes();
        let words = n.div_ceil(64);
        let mut reach = vec![vec![0u64; words]; n];
        for &v in dag.topological_order().iter().rev() {
            let mut r = vec![0u64; words];
            for &x in dag.successors(v) {
                r[x / 64] |= 1 << (x % 64);
                for (a, b) in r.iter_mut().zip(&reach[x]) {
                    *a |= b;
                }
            }
            reach[v] = r;
        }
        Self {
            id: (0..n).collect(),
            alive: vec![true; n],
            work: dag.work_weights().to_vec(),
            comm: dag.comm_weights().to_vec(),
            succ: dag.nodes().map(|v| dag.successors(v).iter().copied().collect()).collect(),
            pred: dag.nodes().map(|v| dag.predecessors(v).iter().copied().collect()).collect(),
            reach,
            slot: (0..n).chain(std::iter::repeat_n(usize::MAX, n)).collect(),
            count: n,
        }
    }

    /// Contractable edges as slot pairs.
    fn contractable(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.id.len() {
            if !self.alive[u] {
                continue;
            }
            for &v in &self.succ[u] {
                if self.succ[u].iter().all(|&x| x == v || !bit(&self.reach[x], v)) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    fn contract(&mut self, u: usize, v: usize, merged: NodeId) -> Contraction {
        let edge = (self.id[u], self.id[v]);
        self.alive[v] = false;
        self.count -= 1;
        self.work[u] += self.work[v];
        self.comm[u] += self.comm[v];
        self.id[u] = merged;
        self.slot[merged] = u;

        let succ_v = std::mem::take(&mut self.succ[v]);
        let pred_v = std::mem::take(&mut self.pred[v]);
        self.succ[u].remove(&v);
        for &x in &succ_v {
            self.pred[x].remove(&v);
            self.pred[x].insert(u);
            self.succ[u].insert(x);
        }
        for &x in &pred_v {
            if x != u {
                self.succ[x].remove(&v);
                self.succ[x].insert(u);
                self.pred[u].insert(x);
            }
        }

        // Whoever reached v now reaches the merged node and all of its
        // descendants.
        let mut rm = std::mem::take(&mut self.reach[v]);
        for (a, b) in rm.iter_mut().zip(&self.reach[u]) {
            *a |= b;
        }
        rm[v / 64] &= !(1 << (v % 64));
        for x in 0..self.id.len() {
            if x != u && self.alive[x] && bit(&self.reach[x], v) {
                let r = &mut self.reach[x];
                for (a, b) in r.iter_mut().zip(&rm) {
                    *a |= b;
                }
                r[v / 64] &= !(1 << (v % 64));
                r[u / 64] |= 1 << (u % 64);
            }
        }
        self.reach[u] = rm;

        Contraction {
            edge,
            merged,
            work: self.work[u],
            comm: self.comm[u],
            preds: sorted_ids(&self.pred[u], &self.id),
            succs: sorted_ids(&self.succ[u], &self.id),
        }
    }
}

fn sorted_ids(slots: &BTreeSet<usize>, id: &[NodeId]) -> Vec<NodeId> {
    let mut out: Vec<NodeId> = slots.iter().map(|&x| id[x]).collect();
    out.sort_unstable();
    out
}

/// Edges `(u, v)` whose only `u -> v` path is the edge itself, sorted.
pub fn contractable_edges(dag: &ComputationalDag) -> Vec<(NodeId, NodeId)> {
    let mut out = WorkGraph::new(dag).contractable();
    out.sort_unstable();
    out
}

/// Picks the next edge to contract: the edges are sorted by
/// `w(u) + w(v)`, and among the first third (rounded up) the one with the
/// largest `c(u)` wins. Remaining ties go to the smallest `(u, v)`.
pub fn select_contraction(dag: &ComputationalDag, edges: &[(NodeId, NodeId)]) -> Result<(NodeId, NodeId)> {
    select_by(edges, |u| dag.work(u), |u| dag.comm(u))
        .ok_or_else(|| Error::InvalidArgument("no contractable edge to select from".into()))
}

fn select_by<E: Copy + Ord>(
    edges: &[(E, E)],
    work: impl Fn(E) -> u64,
    comm: impl Fn(E) -> u64,
) -> Option<(E, E)> {
    if edges.is_empty() {
        return None;
    }
    let mut keyed: Vec<(u64, E, E)> = edges.iter().map(|&(u, v)| (work(u) + work(v), u, v)).collect();
    let k = keyed.len().div_ceil(3);
    if k < keyed.len() {
        keyed.select_nth_unstable(k - 1);
    }
    keyed[..k]
        .iter()
        .map(|&(_, u, v)| (u, v))
        .max_by(|a, b| comm(a.0).cmp(&comm(b.0)).then_with(|| b.cmp(a)))
}

/// Contracts edges until at most `ceil(ratio * n)` nodes remain. Stops
/// early if the DAG runs out of edges.
pub fn coarsen(dag: &ComputationalDag, ratio: f64) -> Result<CoarseningSequence> {
    let n = dag.num_nodes();
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("coarsening ratio {ratio} not in (0, 1)")));
    }
    let target = coarse_target(n, ratio);
    if target < 2 {
        return Err(Error::TooSmall(format!(
            "{n} nodes at ratio {ratio} leave fewer than 2 coarse nodes"
        )));
    }
    let mut g = WorkGraph::new(dag);
    let mut records = Vec::new();
    while g.count > target {
        // Slots are compared through their current ids so that ties follow
        // the public numbering.
        let edges: Vec<(NodeId, NodeId)> = g
            .contractable()
            .into_iter()
            .map(|(u, v)| (g.id[u], g.id[v]))
            .collect();
        let Some((a, b)) = select_by(&edges, |id| g.work[g.slot[id]], |id| g.comm[g.slot[id]]) else {
            log::info!("coarsening stopped at {} nodes: no edges left", g.count);
            break;
        };
        let (u, v) = (g.slot[a], g.slot[b]);
        let merged = n + records.len();
        records.push(g.contract(u, v, merged));
    }
    Ok(CoarseningSequence {
        original: dag.clone(),
        records,
    })
}

pub(crate) fn coarse_target(n: usize, ratio: f64) -> usize {
    (ratio * n as f64).ceil() as usize
}
