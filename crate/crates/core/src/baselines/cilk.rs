use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classical::ClassicalSchedule;
use crate::dag::ComputationalDag;
use crate::machine::MachineParams;

/// Greedy work-stealing simulation.
///
/// Every processor owns a stack. The sources start on processor 0's stack
/// (lowest id on top). A finished node pushes its newly ready successors
/// onto the top of its processor's stack. Idle processors first pop their
/// own top; processors whose stack is empty then steal the bottom entry of a
/// uniformly random nonempty stack. Simultaneous events are handled in
/// ascending node id, idle processors in ascending processor id.
pub fn cilk_schedule(dag: &ComputationalDag, machine: &MachineParams, seed: u64) -> ClassicalSchedule {
    let n = dag.num_nodes();
    let p = machine.num_processors();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut stacks: Vec<VecDeque<usize>> = vec![VecDeque::new(); p];
    let sources: Vec<usize> = dag.sources().collect();
    for &v in sources.iter().rev() {
        stacks[0].push_back(v);
    }

    let mut missing: Vec<usize> = dag.nodes().map(|v| dag.in_degree(v)).collect();
    let mut busy = vec![false; p];
    let mut processor = vec![0; n];
    let mut start = vec![0; n];
    let mut finish = vec![0; n];
    let mut events: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    let mut now = 0u64;
    let mut done = 0;

    loop {
        // hand out work at time `now`
        for q in 0..p {
            if !busy[q] {
                if let Some(v) = stacks[q].pop_back() {
                    launch(dag, v, q, now, &mut busy, &mut processor, &mut start, &mut finish, &mut events);
                }
            }
        }
        for q in 0..p {
            if busy[q] {
                continue;
            }
            let victims: Vec<usize> = (0..p).filter(|&r| !stacks[r].is_empty()).collect();
            if victims.is_empty() {
                break;
            }
            let r = victims[rng.gen_range(0..victims.len())];
            let v = stacks[r].pop_front().expect("victim stack is nonempty");
            launch(dag, v, q, now, &mut busy, &mut processor, &mut start, &mut finish, &mut events);
        }

        let Some(&Reverse((t, _))) = events.peek() else {
            break;
        };
        now = t;
        let mut finished = Vec::new();
        while let Some(&Reverse((t2, v))) = events.peek() {
            if t2 != now {
                break;
            }
            events.pop();
            finished.push(v);
        }
        for v in finished {
            done += 1;
            let q = processor[v];
            busy[q] = false;
            for &s in dag.successors(v).iter().rev() {
                missing[s] -= 1;
                if missing[s] == 0 {
                    stacks[q].push_back(s);
                }
            }
        }
    }
    debug_assert_eq!(done, n);
    ClassicalSchedule {
        processor,
        start,
        finish,
    }
}

#[allow(clippy::too_many_arguments)]
fn launch(
    dag: &ComputationalDag,
    v: usize,
    q: usize,
    now: u64,
    busy: &mut [bool],
    processor: &mut [usize],
    start: &mut [u64],
    finish: &mut [u64],
    events: &mut BinaryHeap<Reverse<(u64, usize)>>,
) {
    busy[q] = true;
    processor[v] = q;
    start[v] = now;
    finish[v] = now + dag.work(v);
    events.push(Reverse((finish[v], v)));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node() {
        let dag = ComputationalDag::new(vec![7], vec![1], &[]).unwrap();
        let m = MachineParams::uniform(3, 1, 1).unwrap();
        assert_eq!(cilk_schedule(&dag, &m, 0).makespan(), 7);
    }

    #[test]
    fn chain_stays_on_one_processor() {
        let edges: Vec<_> = (1..10).map(|i| (i - 1, i)).collect();
        let dag = ComputationalDag::new((1..=10).collect(), vec![1; 10], &edges).unwrap();
        let m = MachineParams::uniform(4, 1, 1).unwrap();
        let cs = cilk_schedule(&dag, &m, 42);
        assert!(cs.processor.iter().all(|&q| q == cs.processor[0]));
        assert_eq!(cs.makespan(), 55);
        cs.check(&dag, 4).unwrap();
    }

    #[test]
    fn independent_nodes_balance() {
        for n in 1..12 {
            let dag = ComputationalDag::new(vec![3; n], vec![1; n], &[]).unwrap();
            let m = MachineParams::uniform(2, 1, 1).unwrap();
            let cs = cilk_schedule(&dag, &m, n as u64);
            assert_eq!(cs.makespan(), n.div_ceil(2) as u64 * 3);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let dag = ComputationalDag::new(
            vec![1, 2, 3, 1, 2, 1],
            vec![1; 6],
            &[(0, 2), (0, 3), (1, 3), (1, 4), (2, 5), (4, 5)],
        )
        .unwrap();
        let m = MachineParams::uniform(3, 1, 1).unwrap();
        assert_eq!(cilk_schedule(&dag, &m, 9), cilk_schedule(&dag, &m, 9));
        cilk_schedule(&dag, &m, 9).check(&dag, 3).unwrap();
    }
}
