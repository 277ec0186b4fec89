use crate::classical::ClassicalSchedule;
use crate::dag::ComputationalDag;
use crate::machine::MachineParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ListPolicy {
    /// Ready node with the largest bottom level, placed at its earliest
    /// start time.
    BlEst,
    /// Ready node / processor pair with the smallest earliest start time.
    Etf,
}

/// Non-insertion list scheduling with communication delays.
///
/// A predecessor `u` on another processor delays its successor by
/// `ceil(g * c(u) * mean_lambda)`, where `mean_lambda` is the average
/// off-diagonal NUMA coefficient. Ties go to the smaller node id, then the
/// smaller processor id.
pub fn list_schedule(dag: &ComputationalDag, machine: &MachineParams, policy: ListPolicy) -> ClassicalSchedule {
    let n = dag.num_nodes();
    let p = machine.num_processors();
    let delay = comm_delays(dag, machine);
    let bottom = dag.bottom_levels();

    let mut processor = vec![0; n];
    let mut start = vec![0u64; n];
    let mut finish = vec![0u64; n];
    let mut proc_ready = vec![0u64; p];
    let mut missing: Vec<usize> = dag.nodes().map(|v| dag.in_degree(v)).collect();
    let mut ready: Vec<usize> = dag.sources().collect();

    // data-ready time of v on each processor, filled when v becomes ready
    let mut drt: Vec<Vec<u64>> = vec![Vec::new(); n];
    let data_ready = |v: usize, processor: &[usize], finish: &[u64]| -> Vec<u64> {
        (0..p)
            .map(|q| {
                dag.predecessors(v)
                    .iter()
                    .map(|&u| finish[u] + if processor[u] == q { 0 } else { delay[u] })
                    .max()
                    .unwrap_or(0)
            })
            .collect()
    };
    for &v in &ready {
        drt[v] = data_ready(v, &processor, &finish);
    }

    while !ready.is_empty() {
        let best_on = |v: usize, proc_ready: &[u64]| -> (u64, usize) {
            (0..p)
                .map(|q| (proc_ready[q].max(drt[v][q]), q))
                .min()
                .expect("at least one processor")
        };
        let (idx, q, est) = match policy {
            ListPolicy::BlEst => {
                let (idx, &v) = ready
                    .iter()
                    .enumerate()
                    .max_by_key(|&(_, &v)| (bottom[v], std::cmp::Reverse(v)))
                    .expect("ready set is nonempty");
                let (est, q) = best_on(v, &proc_ready);
                (idx, q, est)
            }
            ListPolicy::Etf => {
                let (est, _, q, idx) = ready
                    .iter()
                    .enumerate()
                    .map(|(idx, &v)| {
                        let (est, q) = best_on(v, &proc_ready);
                        (est, v, q, idx)
                    })
                    .min()
                    .expect("ready set is nonempty");
                (idx, q, est)
            }
        };
        let v = ready.swap_remove(idx);
        processor[v] = q;
        start[v] = est;
        finish[v] = est + dag.work(v);
        proc_ready[q] = finish[v];
        for &s in dag.successors(v) {
            missing[s] -= 1;
            if missing[s] == 0 {
                drt[s] = data_ready(s, &processor, &finish);
                ready.push(s);
            }
        }
    }
    ClassicalSchedule {
        processor,
        start,
        finish,
    }
}

/// `ceil(g * c(u) * mean_lambda)` per node, computed exactly.
fn comm_delays(dag: &ComputationalDag, machine: &MachineParams) -> Vec<u64> {
    let p = machine.num_processors() as u128;
    if p < 2 {
        return vec![0; dag.num_nodes()];
    }
    let sum: u128 = (0..machine.num_processors())
        .flat_map(|a| (0..machine.num_processors()).map(move |b| (a, b)))
        .map(|(a, b)| machine.scaled_lambda(a, b) as u128)
        .sum();
    let den = machine.denom() as u128 * p * (p - 1);
    dag.nodes()
        .map(|u| {
            let num = machine.g() as u128 * dag.comm(u) as u128 * sum;
            num.div_ceil(den) as u64
        })
        .collect()
}
