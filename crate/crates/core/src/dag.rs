//! Computational DAGs: nodes carry a work weight and a communication weight,
//! edges are data dependencies.
//!
//! [`ComputationalDag`] is immutable once built and always valid (acyclic,
//! no self-loops, no duplicate edges). Unchecked input goes through
//! [`DagSpec`] and [`validate_dag`] first.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use crate::error::{Error, Result};

/// Node index, dense in `0..n`.
pub type NodeId = usize;

/// Unchecked DAG description. Weights are signed so that out-of-domain input
/// can be represented and reported.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DagSpec {
    pub work: Vec<i64>,
    pub comm: Vec<i64>,
    pub edges: Vec<(usize, usize)>,
}

impl DagSpec {
    pub fn num_nodes(&self) -> usize {
        self.work.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DagViolation {
    /// `work` and `comm` have different lengths.
    WeightLengthMismatch { work: usize, comm: usize },
    NegativeWork { node: usize, value: i64 },
    NegativeComm { node: usize, value: i64 },
    EdgeOutOfRange { from: usize, to: usize },
    SelfLoop { node: usize },
    DuplicateEdge { from: usize, to: usize },
    /// Nodes that sit on (or downstream of) a directed cycle.
    Cycle { nodes: Vec<usize> },
}

impl fmt::Display for DagViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::WeightLengthMismatch { work, comm } => {
                write!(f, "{work} work weights but {comm} communication weights")
            }
            Self::NegativeWork { node, value } => write!(f, "node {node} has work weight {value}"),
            Self::NegativeComm { node, value } => {
                write!(f, "node {node} has communication weight {value}")
            }
            Self::EdgeOutOfRange { from, to } => write!(f, "edge ({from},{to}) out of range"),
            Self::SelfLoop { node } => write!(f, "self-loop on node {node}"),
            Self::DuplicateEdge { from, to } => write!(f, "duplicate edge ({from},{to})"),
            Self::Cycle { nodes } => write!(f, "cycle through nodes {nodes:?}"),
        }
    }
}

/// Checks every structural and weight invariant of a DAG description.
///
/// Returns an empty list iff the description can be turned into a
/// [`ComputationalDag`].
pub fn validate_dag(spec: &DagSpec) -> Vec<DagViolation> {
    let mut out = Vec::new();
    let n = spec.work.len();
    if spec.comm.len() != n {
        out.push(DagViolation::WeightLengthMismatch {
            work: n,
            comm: spec.comm.len(),
        });
    }
    for (v, &w) in spec.work.iter().enumerate() {
        if w < 0 {
            out.push(DagViolation::NegativeWork { node: v, value: w });
        }
    }
    for (v, &c) in spec.comm.iter().enumerate() {
        if c < 0 {
            out.push(DagViolation::NegativeComm { node: v, value: c });
        }
    }

    let mut succ = vec![Vec::new(); n];
    let mut seen = std::collections::HashSet::new();
    for &(u, v) in &spec.edges {
        if u >= n || v >= n {
            out.push(DagViolation::EdgeOutOfRange { from: u, to: v });
            continue;
        }
        if u == v {
            out.push(DagViolation::SelfLoop { node: u });
            continue;
        }
        if !seen.insert((u, v)) {
            out.push(DagViolation::DuplicateEdge { from: u, to: v });
            continue;
        }
        succ[u].push(v);
    }
    if let Err(stuck) = kahn_order(&succ) {
        out.push(DagViolation::Cycle { nodes: stuck });
    }
    out
}

/// Kahn's algorithm with smallest-id-first tie breaking. On failure returns
/// the nodes that could not be ordered.
fn kahn_order(succ: &[Vec<usize>]) -> std::result::Result<Vec<usize>, Vec<usize>> {
    let n = succ.len();
    let mut indeg = vec![0usize; n];
    for list in succ {
        for &v in list {
            indeg[v] += 1;
        }
    }
    let mut heap: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = heap.pop() {
        order.push(u);
        for &v in &succ[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                heap.push(Reverse(v));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).filter(|&v| indeg[v] > 0).collect())
    }
}

/// Weighted computational DAG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComputationalDag {
    work: Vec<u64>,
    comm: Vec<u64>,
    succ: Vec<Vec<NodeId>>,
    pred: Vec<Vec<NodeId>>,
    topo: Vec<NodeId>,
    num_edges: usize,
}

impl ComputationalDag {
    /// Builds a DAG from weights and an edge list. Duplicate edges are
    /// rejected; use [`ComputationalDag::from_edges_merged`] to merge them.
    pub fn new(work: Vec<u64>, comm: Vec<u64>, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let n = work.len();
        if comm.len() != n {
            return Err(Error::InvalidDag(format!(
                "{n} work weights but {} communication weights",
                comm.len()
            )));
        }
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidDag(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidDag(format!("self-loop on node {u}")));
            }
            succ[u].push(v);
            pred[v].push(u);
        }
        let mut num_edges = 0;
        for list in succ.iter_mut().chain(pred.iter_mut()) {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            if list.len() != before {
                return Err(Error::InvalidDag("duplicate edge".into()));
            }
        }
        for list in &succ {
            num_edges += list.len();
        }
        let topo = kahn_order(&succ).map_err(|_| Error::Cycle)?;
        Ok(Self {
            work,
            comm,
            succ,
            pred,
            topo,
            num_edges,
        })
    }

    /// Like [`ComputationalDag::new`] but silently merges duplicate edges.
    pub fn from_edges_merged(
        work: Vec<u64>,
        comm: Vec<u64>,
        edges: &[(NodeId, NodeId)],
    ) -> Result<Self> {
        let mut e = edges.to_vec();
        e.sort_unstable();
        e.dedup();
        Self::new(work, comm, &e)
    }

    pub fn from_spec(spec: &DagSpec) -> Result<Self> {
        let violations = validate_dag(spec);
        if let Some(v) = violations.first() {
            return Err(match v {
                DagViolation::Cycle { .. } => Error::Cycle,
                other => Error::InvalidDag(other.to_string()),
            });
        }
        Self::new(
            spec.work.iter().map(|&w| w as u64).collect(),
            spec.comm.iter().map(|&c| c as u64).collect(),
            &spec.edges,
        )
    }

    pub fn to_spec(&self) -> DagSpec {
        DagSpec {
            work: self.work.iter().map(|&w| w as i64).collect(),
            comm: self.comm.iter().map(|&c| c as i64).collect(),
            edges: self.edges().collect(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.work.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn is_empty(&self) -> bool {
        self.work.is_empty()
    }

    pub fn work(&self, v: NodeId) -> u64 {
        self.work[v]
    }

    pub fn comm(&self, v: NodeId) -> u64 {
        self.comm[v]
    }

    pub fn work_weights(&self) -> &[u64] {
        &self.work
    }

    pub fn comm_weights(&self) -> &[u64] {
        &self.comm
    }

    /// Direct successors, ascending.
    pub fn successors(&self, v: NodeId) -> &[NodeId] {
        &self.succ[v]
    }

    /// Direct predecessors, ascending.
    pub fn predecessors(&self, v: NodeId) -> &[NodeId] {
        &self.pred[v]
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.pred[v].len()
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.succ[v].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.succ[u].binary_search(&v).is_ok()
    }

    /// All edges in ascending `(u, v)` order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().map(move |&v| (u, v)))
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.num_nodes()
    }

    pub fn sources(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(|&v| self.pred[v].is_empty())
    }

    /// Deterministic topological order; ties go to the smaller node id.
    pub fn topological_order(&self) -> &[NodeId] {
        &self.topo
    }

    pub fn total_work(&self) -> u64 {
        self.work.iter().sum()
    }

    pub fn total_comm(&self) -> u64 {
        self.comm.iter().sum()
    }

    /// Longest path from each node to a sink, counting work weights of every
    /// node on the path (including the node itself).
    pub fn bottom_levels(&self) -> Vec<u64> {
        let mut bl = vec![0u64; self.num_nodes()];
        for &v in self.topo.iter().rev() {
            let below = self.succ[v].iter().map(|&s| bl[s]).max().unwrap_or(0);
            bl[v] = self.work[v] + below;
        }
        bl
    }

    /// Number of edges on the longest directed path.
    pub fn depth(&self) -> usize {
        let mut d = vec![0usize; self.num_nodes()];
        let mut best = 0;
        for &v in &self.topo {
            for &s in &self.succ[v] {
                d[s] = d[s].max(d[v] + 1);
                best = best.max(d[s]);
            }
        }
        best
    }
}

/// Topological order of an unchecked description; fails on cycles.
pub fn topological_order(spec: &DagSpec) -> Result<Vec<NodeId>> {
    let n = spec.num_nodes();
    let mut succ = vec![Vec::new(); n];
    for &(u, v) in &spec.edges {
        if u >= n || v >= n {
            return Err(Error::InvalidDag(format!("edge ({u},{v}) out of range")));
        }
        succ[u].push(v);
    }
    for list in &mut succ {
        list.sort_unstable();
        list.dedup();
    }
    kahn_order(&succ).map_err(|_| Error::Cycle)
}
