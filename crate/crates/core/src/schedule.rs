//! BSP schedules: processor map, superstep map and communication tuples.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use crate::dag::{ComputationalDag, NodeId};
use crate::error::{Error, ParseError, Result};
use crate::machine::MachineParams;

/// `node`'s value travels `from -> to` in the communication phase of `step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CommStep {
    pub node: NodeId,
    pub from: usize,
    pub to: usize,
    pub step: usize,
}

impl CommStep {
    pub fn new(node: NodeId, from: usize, to: usize, step: usize) -> Self {
        Self {
            node,
            from,
            to,
            step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BspSchedule {
    processor: Vec<usize>,
    superstep: Vec<usize>,
    comm: Vec<CommStep>,
    num_supersteps: usize,
}

impl BspSchedule {
    /// Assembles a schedule. `comm` is sorted and deduplicated; the superstep
    /// count is raised to cover every node and tuple.
    pub fn new(
        processor: Vec<usize>,
        superstep: Vec<usize>,
        mut comm: Vec<CommStep>,
        num_supersteps: usize,
    ) -> Self {
        assert_eq!(processor.len(), superstep.len());
        comm.sort_unstable();
        comm.dedup();
        let needed = superstep
            .iter()
            .map(|&s| s + 1)
            .chain(comm.iter().map(|c| c.step + 1))
            .max()
            .unwrap_or(0);
        Self {
            processor,
            superstep,
            comm,
            num_supersteps: num_supersteps.max(needed),
        }
    }

    /// Completes `(processor, superstep)` with the lazy communication
    /// schedule.
    pub fn from_assignment(
        dag: &ComputationalDag,
        processor: Vec<usize>,
        superstep: Vec<usize>,
    ) -> Result<Self> {
        let comm = lazy_comm_schedule(dag, &processor, &superstep)?;
        Ok(Self::new(processor, superstep, comm, 0))
    }

    /// Every node on processor 0 in superstep 0.
    pub fn trivial(dag: &ComputationalDag) -> Self {
        let n = dag.num_nodes();
        Self::new(vec![0; n], vec![0; n], Vec::new(), 1)
    }

    pub fn num_nodes(&self) -> usize {
        self.processor.len()
    }

    pub fn num_supersteps(&self) -> usize {
        self.num_supersteps
    }

    pub fn processor(&self, v: NodeId) -> usize {
        self.processor[v]
    }

    pub fn superstep(&self, v: NodeId) -> usize {
        self.superstep[v]
    }

    pub fn processors(&self) -> &[usize] {
        &self.processor
    }

    pub fn supersteps(&self) -> &[usize] {
        &self.superstep
    }

    /// Communication tuples in ascending `(node, from, to, step)` order.
    pub fn comm(&self) -> &[CommStep] {
        &self.comm
    }

    pub fn into_parts(self) -> (Vec<usize>, Vec<usize>, Vec<CommStep>) {
        (self.processor, self.superstep, self.comm)
    }

    /// Pads the schedule with trailing empty supersteps.
    pub fn with_num_supersteps(mut self, s: usize) -> Self {
        self.num_supersteps = self.num_supersteps.max(s);
        self
    }

    pub fn with_comm(&self, comm: Vec<CommStep>) -> Self {
        Self::new(
            self.processor.clone(),
            self.superstep.clone(),
            comm,
            self.num_supersteps,
        )
    }

    /// True iff every tuple sends from the producing processor.
    pub fn is_direct(&self) -> bool {
        self.comm.iter().all(|c| c.from == self.processor[c.node])
    }

    /// True iff the tuples equal the lazy schedule of the assignment.
    pub fn is_lazy(&self, dag: &ComputationalDag) -> bool {
        match lazy_comm_schedule(dag, &self.processor, &self.superstep) {
            Ok(mut lazy) => {
                lazy.sort_unstable();
                lazy == self.comm
            }
            Err(_) => false,
        }
    }

    /// Replaces the tuples with the lazy schedule of the current assignment.
    pub fn relazied(&self, dag: &ComputationalDag) -> Result<Self> {
        let comm = lazy_comm_schedule(dag, &self.processor, &self.superstep)?;
        Ok(Self::new(
            self.processor.clone(),
            self.superstep.clone(),
            comm,
            self.num_supersteps,
        ))
    }

    /// Removes supersteps that hold neither nodes nor tuples and renumbers
    /// the remaining ones, preserving their order.
    pub fn compact(&self) -> Self {
        let s = self.num_supersteps;
        let mut used = vec![false; s];
        for &t in &self.superstep {
            used[t] = true;
        }
        for c in &self.comm {
            used[c.step] = true;
        }
        let mut map = vec![0; s];
        let mut next = 0;
        for t in 0..s {
            map[t] = next;
            if used[t] {
                next += 1;
            }
        }
        Self::new(
            self.processor.clone(),
            self.superstep.iter().map(|&t| map[t]).collect(),
            self.comm
                .iter()
                .map(|c| CommStep { step: map[c.step], ..*c })
                .collect(),
            next.max(usize::from(!self.superstep.is_empty())),
        )
    }

    /// For direct-send schedules: keeps only the earliest tuple per
    /// `(node, destination)` and drops transfers no successor needs. Never
    /// increases cost and keeps a valid schedule valid.
    pub fn prune_direct(&self, dag: &ComputationalDag) -> Self {
        debug_assert!(self.is_direct());
        let needed = first_needed(dag, &self.processor, &self.superstep);
        let mut best: HashMap<(NodeId, usize), CommStep> = HashMap::new();
        for c in &self.comm {
            if !needed.contains_key(&(c.node, c.to)) {
                continue;
            }
            best.entry((c.node, c.to))
                .and_modify(|e| {
                    if c.step < e.step {
                        *e = *c
                    }
                })
                .or_insert(*c);
        }
        Self::new(
            self.processor.clone(),
            self.superstep.clone(),
            best.into_values().collect(),
            self.num_supersteps,
        )
    }
}

/// For every `(u, q)` with a successor of `u` on a processor `q != pi(u)`,
/// the earliest superstep of such a successor.
pub fn first_needed(
    dag: &ComputationalDag,
    processor: &[usize],
    superstep: &[usize],
) -> HashMap<(NodeId, usize), usize> {
    let mut out: HashMap<(NodeId, usize), usize> = HashMap::new();
    for (u, v) in dag.edges() {
        let q = processor[v];
        if q != processor[u] {
            let e = out.entry((u, q)).or_insert(superstep[v]);
            *e = (*e).min(superstep[v]);
        }
    }
    out
}

/// Sends every value directly from its producer in the last phase before
/// its first use on each other processor.
pub fn lazy_comm_schedule(
    dag: &ComputationalDag,
    processor: &[usize],
    superstep: &[usize],
) -> Result<Vec<CommStep>> {
    if processor.len() != dag.num_nodes() || superstep.len() != dag.num_nodes() {
        return Err(Error::Precondition("assignment length mismatch".into()));
    }
    for (u, v) in dag.edges() {
        let ok = if processor[u] == processor[v] {
            superstep[u] <= superstep[v]
        } else {
            superstep[u] < superstep[v]
        };
        if !ok {
            return Err(Error::Precondition(format!(
                "edge ({u},{v}) violates precedence: ({}, {}) -> ({}, {})",
                processor[u], superstep[u], processor[v], superstep[v]
            )));
        }
    }
    let mut comm: Vec<CommStep> = first_needed(dag, processor, superstep)
        .into_iter()
        .map(|((u, q), s)| CommStep::new(u, processor[u], q, s - 1))
        .collect();
    comm.sort_unstable();
    Ok(comm)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleViolation {
    LengthMismatch { expected: usize, found: usize },
    ProcessorOutOfRange { node: NodeId, processor: usize },
    SuperstepOutOfRange { node: NodeId, superstep: usize },
    BadTuple { tuple: CommStep, reason: &'static str },
    /// `(u, v)` on one processor with `tau(u) > tau(v)`.
    SameProcessorOrder { from: NodeId, to: NodeId },
    /// `(u, v)` across processors without an earlier delivery of `u`.
    MissingDelivery { from: NodeId, to: NodeId },
    /// A tuple sends a value its source processor does not hold yet.
    SendBeforeAvailable { tuple: CommStep },
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::LengthMismatch { expected, found } => {
                write!(f, "schedule covers {found} nodes, DAG has {expected}")
            }
            Self::ProcessorOutOfRange { node, processor } => {
                write!(f, "node {node} on processor {processor} out of range")
            }
            Self::SuperstepOutOfRange { node, superstep } => {
                write!(f, "node {node} in superstep {superstep} out of range")
            }
            Self::BadTuple { tuple, reason } => write!(f, "tuple {tuple:?}: {reason}"),
            Self::SameProcessorOrder { from, to } => {
                write!(f, "edge ({from},{to}) runs backwards on one processor")
            }
            Self::MissingDelivery { from, to } => {
                write!(f, "edge ({from},{to}) lacks an earlier delivery")
            }
            Self::SendBeforeAvailable { tuple } => {
                write!(f, "tuple {tuple:?} sends an unavailable value")
            }
        }
    }
}

/// Checks ranges, the edge rule and the send rule. Multi-hop forwarding is
/// accepted.
pub fn validate_schedule(
    dag: &ComputationalDag,
    machine: &MachineParams,
    sched: &BspSchedule,
) -> Vec<ScheduleViolation> {
    let mut out = Vec::new();
    let n = dag.num_nodes();
    let p = machine.num_processors();
    let s = sched.num_supersteps();
    if sched.num_nodes() != n {
        out.push(ScheduleViolation::LengthMismatch {
            expected: n,
            found: sched.num_nodes(),
        });
        return out;
    }
    for v in 0..n {
        if sched.processor(v) >= p {
            out.push(ScheduleViolation::ProcessorOutOfRange {
                node: v,
                processor: sched.processor(v),
            });
        }
        if sched.superstep(v) >= s {
            out.push(ScheduleViolation::SuperstepOutOfRange {
                node: v,
                superstep: sched.superstep(v),
            });
        }
    }
    if !out.is_empty() {
        return out;
    }

    // earliest phase in which (v, q) receives v
    let mut arrival: HashMap<(NodeId, usize), usize> = HashMap::new();
    let mut good = Vec::with_capacity(sched.comm().len());
    for &c in sched.comm() {
        let reason = if c.node >= n {
            Some("node out of range")
        } else if c.from >= p || c.to >= p {
            Some("processor out of range")
        } else if c.from == c.to {
            Some("self-send")
        } else if c.step >= s {
            Some("superstep out of range")
        } else {
            None
        };
        match reason {
            Some(reason) => out.push(ScheduleViolation::BadTuple { tuple: c, reason }),
            None => {
                let e = arrival.entry((c.node, c.to)).or_insert(c.step);
                *e = (*e).min(c.step);
                good.push(c);
            }
        }
    }
    for c in good {
        let from_producer = sched.processor(c.node) == c.from && sched.superstep(c.node) <= c.step;
        let forwarded = arrival
            .get(&(c.node, c.from))
            .is_some_and(|&a| a < c.step);
        if !from_producer && !forwarded {
            out.push(ScheduleViolation::SendBeforeAvailable { tuple: c });
        }
    }
    for (u, v) in dag.edges() {
        let (pu, pv) = (sched.processor(u), sched.processor(v));
        if pu == pv {
            if sched.superstep(u) > sched.superstep(v) {
                out.push(ScheduleViolation::SameProcessorOrder { from: u, to: v });
            }
        } else if !arrival
            .get(&(u, pv))
            .is_some_and(|&a| a < sched.superstep(v))
        {
            out.push(ScheduleViolation::MissingDelivery { from: u, to: v });
        }
    }
    out
}

/// Like [`validate_schedule`] but returns the first violation as an error.
pub fn check_schedule(
    dag: &ComputationalDag,
    machine: &MachineParams,
    sched: &BspSchedule,
) -> Result<()> {
    match validate_schedule(dag, machine, sched).first() {
        None => Ok(()),
        Some(v) => Err(Error::InvalidSchedule(v.to_string())),
    }
}

/// Text form: header `P S n`, `n` lines `node proc step`, then one line
/// `node from to step` per tuple.
pub fn write_schedule(sched: &BspSchedule, num_processors: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} {}",
        num_processors,
        sched.num_supersteps(),
        sched.num_nodes()
    );
    for v in 0..sched.num_nodes() {
        let _ = writeln!(out, "{} {} {}", v, sched.processor(v), sched.superstep(v));
    }
    for c in sched.comm() {
        let _ = writeln!(out, "{} {} {} {}", c.node, c.from, c.to, c.step);
    }
    out
}

/// Parses the text form; returns the processor count from the header and
/// the schedule.
pub fn parse_schedule(text: &str) -> Result<(usize, BspSchedule)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim_start();
            !t.is_empty() && !t.starts_with('%')
        });
    let (hl, header) = lines
        .next()
        .ok_or_else(|| ParseError::new(1, 1, "missing header"))?;
    let h = ints(hl, header, 3)?;
    let (p, s, n) = (h[0], h[1], h[2]);
    let mut processor = vec![0; n];
    let mut superstep = vec![0; n];
    let mut seen = vec![false; n];
    for _ in 0..n {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| ParseError::new(hl, 1, format!("expected {n} node lines")))?;
        let f = ints(ln, line, 3)?;
        if f[0] >= n || seen[f[0]] {
            return Err(ParseError::new(ln, 1, format!("bad node id {}", f[0])).into());
        }
        seen[f[0]] = true;
        processor[f[0]] = f[1];
        superstep[f[0]] = f[2];
    }
    let mut comm = Vec::new();
    for (ln, line) in lines {
        let f = ints(ln, line, 4)?;
        comm.push(CommStep::new(f[0], f[1], f[2], f[3]));
    }
    Ok((p, BspSchedule::new(processor, superstep, comm, s)))
}

pub fn load_schedule(path: impl AsRef<Path>) -> Result<(usize, BspSchedule)> {
    parse_schedule(&std::fs::read_to_string(path)?)
}

fn ints(ln: usize, line: &str, k: usize) -> Result<Vec<usize>, ParseError> {
    let mut out = Vec::with_capacity(k);
    for tok in line.split_whitespace() {
        let col = tok.as_ptr() as usize - line.as_ptr() as usize + 1;
        if out.len() == k {
            return Err(ParseError::new(ln, col, format!("expected {k} fields")));
        }
        out.push(
            tok.parse()
                .map_err(|_| ParseError::new(ln, col, format!("invalid integer '{tok}'")))?,
        );
    }
    if out.len() < k {
        return Err(ParseError::new(ln, line.len() + 1, format!("expected {k} fields")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(k: usize) -> ComputationalDag {
        let edges: Vec<_> = (1..k).map(|i| (i - 1, i)).collect();
        ComputationalDag::new(vec![1; k], vec![1; k], &edges).unwrap()
    }

    #[test]
    fn trivial_is_valid() {
        let dag = chain(5);
        let m = MachineParams::uniform(3, 1, 1).unwrap();
        assert!(validate_schedule(&dag, &m, &BspSchedule::trivial(&dag)).is_empty());
    }

    #[test]
    fn edge_rule_violations() {
        let dag = chain(2);
        let m = MachineParams::uniform(2, 1, 1).unwrap();
        let back = BspSchedule::new(vec![0, 0], vec![1, 0], vec![], 2);
        assert_eq!(
            validate_schedule(&dag, &m, &back),
            vec![ScheduleViolation::SameProcessorOrder { from: 0, to: 1 }]
        );
        let late = BspSchedule::new(vec![0, 1], vec![0, 1], vec![CommStep::new(0, 0, 1, 1)], 2);
        assert_eq!(
            validate_schedule(&dag, &m, &late),
            vec![ScheduleViolation::MissingDelivery { from: 0, to: 1 }]
        );
        let ok = BspSchedule::new(vec![0, 1], vec![0, 1], vec![CommStep::new(0, 0, 1, 0)], 2);
        assert!(validate_schedule(&dag, &m, &ok).is_empty());
    }

    #[test]
    fn send_rule_and_forwarding() {
        let dag = chain(2);
        let m = MachineParams::uniform(3, 1, 1).unwrap();
        let hop = BspSchedule::new(
            vec![0, 2],
            vec![0, 2],
            vec![CommStep::new(0, 0, 1, 0), CommStep::new(0, 1, 2, 1)],
            3,
        );
        assert!(validate_schedule(&dag, &m, &hop).is_empty());
        let early = BspSchedule::new(
            vec![0, 2],
            vec![0, 2],
            vec![CommStep::new(0, 0, 1, 0), CommStep::new(0, 1, 2, 0)],
            3,
        );
        assert_eq!(
            validate_schedule(&dag, &m, &early),
            vec![ScheduleViolation::SendBeforeAvailable {
                tuple: CommStep::new(0, 1, 2, 0)
            }]
        );
    }

    #[test]
    fn lazy_examples() {
        // u -> a (p1, s1), u -> b (p1, s3)
        let dag = ComputationalDag::new(vec![1; 3], vec![1; 3], &[(0, 1), (0, 2)]).unwrap();
        let comm = lazy_comm_schedule(&dag, &[0, 1, 1], &[0, 1, 3]).unwrap();
        assert_eq!(comm, vec![CommStep::new(0, 0, 1, 0)]);

        let fan = ComputationalDag::new(vec![1; 4], vec![1; 4], &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let comm = lazy_comm_schedule(&fan, &[0, 1, 2, 3], &[0, 1, 1, 1]).unwrap();
        assert_eq!(comm.len(), 3);
        assert!(comm.iter().all(|c| c.step == 0 && c.from == 0));

        assert!(lazy_comm_schedule(&chain(2), &[0, 1], &[0, 0]).is_err());
        assert!(lazy_comm_schedule(&chain(3), &[0, 0, 0], &[0, 0, 0]).unwrap().is_empty());
    }

    #[test]
    fn compact_and_round_trip() {
        let dag = chain(3);
        let s = BspSchedule::from_assignment(&dag, vec![0, 1, 1], vec![0, 3, 5]).unwrap();
        let c = s.compact();
        // the tuple for node 0 sits in phase 2, so step 2 survives
        assert_eq!(c.num_supersteps(), 4);
        assert_eq!(c.supersteps(), &[0, 2, 3]);
        let m = MachineParams::uniform(2, 1, 1).unwrap();
        assert!(validate_schedule(&dag, &m, &c).is_empty());

        let text = write_schedule(&s, 2);
        let (p, back) = parse_schedule(&text).unwrap();
        assert_eq!(p, 2);
        assert_eq!(back, s);
    }

    #[test]
    fn prune_direct_keeps_earliest() {
        let dag = chain(2);
        let s = BspSchedule::new(
            vec![0, 1],
            vec![0, 3],
            vec![CommStep::new(0, 0, 1, 0), CommStep::new(0, 0, 1, 2)],
            4,
        );
        assert_eq!(s.prune_direct(&dag).comm(), &[CommStep::new(0, 0, 1, 0)]);
    }
}
