use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use crate::dag::{ComputationalDag, NodeId};
use crate::machine::MachineParams;
use crate::schedule::BspSchedule;

const SCORE_EPS: f64 = 1e-9;

/// Working state of the BSPg simulation.
#[derive(Debug, Clone)]
pub struct BspgState {
    pub superstep: usize,
    pub free: Vec<bool>,
    /// Ready, unassigned nodes.
    pub ready: BTreeSet<NodeId>,
    /// Nodes processor `p` may still run in the current superstep.
    pub ready_p: Vec<BTreeSet<NodeId>>,
    /// Nodes every processor may run in the current superstep.
    pub ready_all: BTreeSet<NodeId>,
    pub processor: Vec<Option<usize>>,
    pub superstep_of: Vec<Option<usize>>,
    /// `touch[u * P + p]`: `u` or one of its successors is on `p`.
    touch: Vec<bool>,
    num_processors: usize,
}

impl BspgState {
    pub fn new(dag: &ComputationalDag, num_processors: usize) -> Self {
        let n = dag.num_nodes();
        let ready: BTreeSet<NodeId> = dag.sources().collect();
        Self {
            superstep: 0,
            free: vec![true; num_processors],
            ready_all: ready.clone(),
            ready,
            ready_p: vec![BTreeSet::new(); num_processors],
            processor: vec![None; n],
            superstep_of: vec![None; n],
            touch: vec![false; n * num_processors],
            num_processors,
        }
    }

    /// Places `v` on `p` in the current superstep.
    pub fn assign(&mut self, dag: &ComputationalDag, v: NodeId, p: usize) {
        self.ready.remove(&v);
        self.ready_all.remove(&v);
        for set in &mut self.ready_p {
            set.remove(&v);
        }
        self.processor[v] = Some(p);
        self.superstep_of[v] = Some(self.superstep);
        self.touch[v * self.num_processors + p] = true;
        for &u in dag.predecessors(v) {
            self.touch[u * self.num_processors + p] = true;
        }
    }

    /// Sum of `c(u) / outdeg(u)` over predecessors `u` of `v` that sit on
    /// `p` or have a successor on `p`.
    pub fn score(&self, dag: &ComputationalDag, v: NodeId, p: usize) -> f64 {
        dag.predecessors(v)
            .iter()
            .filter(|&&u| self.touch[u * self.num_processors + p])
            .map(|&u| dag.comm(u) as f64 / dag.out_degree(u) as f64)
            .sum()
    }

    /// Highest-scoring node of `ready_p[p]`, or of `ready_all` if the former
    /// is empty. Ties go to the smallest id.
    pub fn choose_node(&self, dag: &ComputationalDag, p: usize) -> Option<NodeId> {
        let pool = if self.ready_p[p].is_empty() {
            &self.ready_all
        } else {
            &self.ready_p[p]
        };
        let mut best: Option<(f64, NodeId)> = None;
        for &v in pool {
            let s = self.score(dag, v, p);
            if best.is_none_or(|(b, _)| s > b + SCORE_EPS * b.abs().max(1.0)) {
                best = Some((s, v));
            }
        }
        best.map(|(_, v)| v)
    }

    fn can_take(&self, p: usize) -> bool {
        self.free[p] && (!self.ready_p[p].is_empty() || !self.ready_all.is_empty())
    }
}

/// Event-driven greedy BSP scheduler.
///
/// Processors take ready nodes at concrete times, preferring nodes only they
/// may run in the current superstep. A node whose predecessors sit on
/// several processors of the current superstep waits for the next one. The
/// computation phase closes once no node is available to everybody, at
/// least half of the processors are idle, and some ready node cannot be run
/// by any idle processor; the next superstep then opens every ready node to
/// every processor.
pub fn bspg(dag: &ComputationalDag, machine: &MachineParams) -> BspSchedule {
    let n = dag.num_nodes();
    let p_count = machine.num_processors();
    let half = p_count.div_ceil(2);
    let mut st = BspgState::new(dag, p_count);
    let mut missing: Vec<usize> = dag.nodes().map(|v| dag.in_degree(v)).collect();
    let mut assigned = 0;
    let mut end_step = false;
    // (finish time, node); usize::MAX marks the dummy event opening a superstep
    let mut events: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    events.push(Reverse((0, usize::MAX)));

    while assigned < n {
        if end_step && events.is_empty() {
            for set in &mut st.ready_p {
                set.clear();
            }
            st.ready_all = st.ready.clone();
            st.superstep += 1;
            end_step = false;
            events.push(Reverse((0, usize::MAX)));
        }
        let Reverse((t, _)) = *events.peek().expect("event queue is nonempty");
        while let Some(&Reverse((t2, v))) = events.peek() {
            if t2 != t {
                break;
            }
            events.pop();
            if v == usize::MAX {
                continue;
            }
            let pv = st.processor[v].expect("finished node is assigned");
            st.free[pv] = true;
            for &u in dag.successors(v) {
                missing[u] -= 1;
                if missing[u] == 0 {
                    st.ready.insert(u);
                    let local = dag.predecessors(u).iter().all(|&u0| {
                        st.processor[u0] == Some(pv) || st.superstep_of[u0] < Some(st.superstep)
                    });
                    if local {
                        st.ready_p[pv].insert(u);
                    }
                }
            }
        }

        if !end_step {
            while let Some(p) = (0..p_count).find(|&p| st.can_take(p)) {
                let v = st.choose_node(dag, p).expect("processor has candidates");
                st.assign(dag, v, p);
                st.free[p] = false;
                assigned += 1;
                events.push(Reverse((t + dag.work(v), v)));
            }
        }

        let idle: Vec<usize> = (0..p_count).filter(|&p| st.free[p]).collect();
        let waiting = st.ready.iter().any(|v| {
            !st.ready_all.contains(v) && !idle.iter().any(|&p| st.ready_p[p].contains(v))
        });
        if st.ready_all.is_empty() && idle.len() >= half && waiting {
            end_step = true;
        }
        if events.is_empty() && assigned < n {
            end_step = true;
        }
    }

    let processor: Vec<usize> = st.processor.iter().map(|p| p.expect("assigned")).collect();
    let superstep: Vec<usize> = st.superstep_of.iter().map(|s| s.expect("assigned")).collect();
    BspSchedule::from_assignment(dag, processor, superstep)
        .expect("greedy assignment respects precedence")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::validate_schedule;

    fn machine(p: usize) -> MachineParams {
        MachineParams::uniform(p, 1, 1).unwrap()
    }

    #[test]
    fn independent_nodes_one_superstep_balanced() {
        let dag = ComputationalDag::new(vec![2; 8], vec![1; 8], &[]).unwrap();
        let s = bspg(&dag, &machine(4));
        assert_eq!(s.num_supersteps(), 1);
        for p in 0..4 {
            assert_eq!(s.processors().iter().filter(|&&q| q == p).count(), 2);
        }
    }

    #[test]
    fn chain_one_superstep_one_processor() {
        for p in 1..5 {
            let edges: Vec<_> = (1..7).map(|i| (i - 1, i)).collect();
            let dag = ComputationalDag::new(vec![1; 7], vec![1; 7], &edges).unwrap();
            let s = bspg(&dag, &machine(p));
            assert_eq!(s.num_supersteps(), 1);
            assert!(s.processors().iter().all(|&q| q == s.processor(0)));
        }
    }

    #[test]
    fn two_parallel_chains() {
        let dag = ComputationalDag::new(vec![1; 6], vec![1; 6], &[(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap();
        let s = bspg(&dag, &machine(2));
        assert_eq!(s.num_supersteps(), 1);
        assert_eq!(s.processor(0), s.processor(2));
        assert_eq!(s.processor(3), s.processor(5));
        assert_ne!(s.processor(0), s.processor(3));
    }

    #[test]
    fn join_waits_for_next_superstep() {
        let dag = ComputationalDag::new(vec![1; 3], vec![1; 3], &[(0, 2), (1, 2)]).unwrap();
        let m = machine(2);
        let s = bspg(&dag, &m);
        assert!(validate_schedule(&dag, &m, &s).is_empty());
        assert_ne!(s.processor(0), s.processor(1));
        assert_eq!(s.superstep(2), 1);
    }

    #[test]
    fn score_rule() {
        // u1 (c=4, outdeg 2) on p0; u2 (c=3, outdeg 3) elsewhere
        let dag = ComputationalDag::new(
            vec![1; 7],
            vec![4, 3, 1, 1, 1, 1, 1],
            &[(0, 2), (0, 6), (1, 2), (1, 3), (1, 4), (5, 3)],
        )
        .unwrap();
        let mut st = BspgState::new(&dag, 2);
        st.assign(&dag, 0, 0);
        st.assign(&dag, 1, 1);
        assert!((st.score(&dag, 2, 0) - 2.0).abs() < 1e-12);

        // ready_p wins over a better-scoring ready_all node
        st.ready_all = [6].into_iter().collect();
        st.ready_p[0] = [5].into_iter().collect();
        assert_eq!(st.choose_node(&dag, 0), Some(5));

        st.ready_p[0].clear();
        st.ready_all = [3, 5, 6].into_iter().collect();
        assert_eq!(st.choose_node(&dag, 0), Some(6));
        st.ready_all = [3, 5].into_iter().collect();
        assert_eq!(st.choose_node(&dag, 0), Some(3));
    }

    #[test]
    fn random_dags_are_valid() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.gen_range(1..40);
            let mut edges = Vec::new();
            for v in 1..n {
                for u in 0..v {
                    if rng.gen_bool(0.1) {
                        edges.push((u, v));
                    }
                }
            }
            let work = (0..n).map(|_| rng.gen_range(0..5)).collect();
            let dag = ComputationalDag::new(work, vec![1; n], &edges).unwrap();
            for p in [1, 2, 3, 4] {
                let m = machine(p);
                let s = bspg(&dag, &m);
                assert!(validate_schedule(&dag, &m, &s).is_empty());
            }
        }
    }
}
