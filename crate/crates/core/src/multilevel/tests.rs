use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::init::bspg;
use crate::local_search::hc_improve;
use crate::schedule::validate_schedule;

fn random_dag(rng: &mut ChaCha8Rng, n: usize, density: f64) -> ComputationalDag {
    let mut edges = Vec::new();
    for v in 1..n {
        for u in 0..v {
            if rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    let work = (0..n).map(|_| rng.gen_range(1..6)).collect();
    let comm = (0..n).map(|_| rng.gen_range(1..4)).collect();
    ComputationalDag::new(work, comm, &edges).unwrap()
}

/// Number of distinct u -> v paths, by memoized DFS.
fn count_paths(dag: &ComputationalDag, u: usize, v: usize) -> u64 {
    let mut memo = vec![None; dag.num_nodes()];
    fn go(dag: &ComputationalDag, x: usize, v: usize, memo: &mut Vec<Option<u64>>) -> u64 {
        if x == v {
            return 1;
        }
        if let Some(c) = memo[x] {
            return c;
        }
        let c = dag.successors(x).iter().map(|&y| go(dag, y, v, memo)).sum();
        memo[x] = Some(c);
        c
    }
    go(dag, u, v, &mut memo)
}

fn oracle_contractable(dag: &ComputationalDag) -> Vec<(usize, usize)> {
    dag.edges().filter(|&(u, v)| count_paths(dag, u, v) == 1).collect()
}

/// Coarsening replayed on explicit graphs: contraction by id rewriting and
/// selection by a full sort.
fn oracle_coarsen(dag: &ComputationalDag, ratio: f64) -> Vec<(usize, usize)> {
    let n = dag.num_nodes();
    let target = (ratio * n as f64).ceil() as usize;
    let mut ids: Vec<usize> = (0..n).collect();
    let mut work = dag.work_weights().to_vec();
    let mut comm = dag.comm_weights().to_vec();
    let mut edges: Vec<(usize, usize)> = dag.edges().collect();
    let mut out = Vec::new();
    while ids.len() > target && !edges.is_empty() {
        let g = ComputationalDag::new(work.clone(), comm.clone(), &edges).unwrap();
        let mut cand: Vec<(u64, usize, usize, usize, usize)> = oracle_contractable(&g)
            .into_iter()
            .map(|(a, b)| (work[a] + work[b], ids[a], ids[b], a, b))
            .collect();
        cand.sort();
        let k = cand.len().div_ceil(3);
        let best_c = cand[..k].iter().map(|e| comm[e.3]).max().unwrap();
        let (_, ia, ib, a, b) = *cand[..k]
            .iter()
            .filter(|e| comm[e.3] == best_c)
            .min_by_key(|e| (e.1, e.2))
            .unwrap();
        out.push((ia, ib));
        let merged = n + out.len() - 1;
        // Rebuild with b removed and a renamed.
        let remap = |x: usize| {
            let x = if x == b { a } else { x };
            if x > b {
                x - 1
            } else {
                x
            }
        };
        work[a] += work[b];
        comm[a] += comm[b];
        ids[a] = merged;
        work.remove(b);
        comm.remove(b);
        ids.remove(b);
        let mut e: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(x, y)| (remap(x), remap(y)))
            .filter(|(x, y)| x != y)
            .collect();
        e.sort_unstable();
        e.dedup();
        edges = e;
    }
    out
}

fn chain(n: usize) -> ComputationalDag {
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    ComputationalDag::new((1..=n as u64).collect(), vec![1; n], &edges).unwrap()
}

#[test]
fn triangle_long_edge_is_not_contractable() {
    let dag = ComputationalDag::new(vec![1; 3], vec![1; 3], &[(0, 1), (0, 2), (2, 1)]).unwrap();
    assert_eq!(contractable_edges(&dag), vec![(0, 2), (2, 1)]);
}

#[test]
fn chain_and_diamond_are_fully_contractable() {
    let c = chain(5);
    assert_eq!(contractable_edges(&c), c.edges().collect::<Vec<_>>());
    let d = ComputationalDag::new(vec![1; 4], vec![1; 4], &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
    let mut expected = oracle_contractable(&d);
    expected.sort();
    assert_eq!(expected.len(), 4);
    assert_eq!(contractable_edges(&d), expected);
}

#[test]
fn contractable_matches_path_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..40 {
        let n = rng.gen_range(2..18);
        let density = rng.gen_range(0.1..0.6);
        let dag = random_dag(&mut rng, n, density);
        let mut expected = oracle_contractable(&dag);
        expected.sort();
        assert_eq!(contractable_edges(&dag), expected);
        assert_eq!(expected.is_empty(), dag.num_edges() == 0);
    }
}

#[test]
fn selection_rule() {
    // Six edges; sorted by work sum the first two are (0,1) and (2,3), and
    // (2,3) wins on c(u).
    let work = vec![1, 1, 1, 1, 5, 5, 4, 4, 6, 6, 9, 9];
    let comm = vec![1, 0, 5, 0, 99, 0, 50, 0, 70, 0, 80, 0];
    let edges = [(0, 1), (2, 3), (4, 5), (6, 7), (8, 9), (10, 11)];
    let dag = ComputationalDag::new(work, comm, &edges).unwrap();
    assert_eq!(select_contraction(&dag, &edges).unwrap(), (2, 3));
    assert_eq!(select_contraction(&dag, &edges[..1]).unwrap(), (0, 1));
    assert!(select_contraction(&dag, &[]).is_err());

    let flat = ComputationalDag::new(vec![1; 4], vec![1; 4], &[(0, 1), (1, 2), (2, 3)]).unwrap();
    assert_eq!(select_contraction(&flat, &[(2, 3), (1, 2), (0, 1)]).unwrap(), (0, 1));
}

#[test]
fn coarsen_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dag = random_dag(&mut rng, 10, 0.5);
    let seq = coarsen(&dag, 0.3).unwrap();
    assert_eq!(seq.len(), 7);
    assert_eq!(seq.dag_at(7).unwrap().0.num_nodes(), 3);

    let seq = coarsen(&chain(4), 0.5).unwrap();
    let (coarse, ids) = seq.dag_at(seq.len()).unwrap();
    assert_eq!(coarse.num_nodes(), 2);
    // Node 0 (id 3) is the tail end of the chain, node 1 (id 5) the head.
    assert_eq!(ids, vec![3, 5]);
    assert_eq!(coarse.edges().collect::<Vec<_>>(), vec![(1, 0)]);
    assert_eq!(coarse.total_work(), 10);
    for (i, &id) in ids.iter().enumerate() {
        if id >= 4 {
            let rec = &seq.records()[id - 4];
            assert_eq!(coarse.work(i), rec.work);
            assert_eq!(coarse.comm(i), rec.comm);
        }
    }
}

#[test]
fn coarsen_errors() {
    assert!(matches!(coarsen(&chain(5), 0.2), Err(Error::TooSmall(_))));
    assert!(matches!(coarsen(&chain(5), 1.0), Err(Error::InvalidArgument(_))));
    let edgeless = ComputationalDag::new(vec![1; 6], vec![1; 6], &[]).unwrap();
    assert!(coarsen(&edgeless, 0.5).unwrap().is_empty());
}

#[test]
fn coarsen_matches_replay_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..30 {
        let n = rng.gen_range(4..25);
        let density = rng.gen_range(0.1..0.5);
        let dag = random_dag(&mut rng, n, density);
        let ratio = rng.gen_range(0.15..0.6);
        if (ratio * n as f64).ceil() < 2.0 {
            continue;
        }
        let seq = coarsen(&dag, ratio).unwrap();
        let got: Vec<_> = seq.records().iter().map(|r| r.edge).collect();
        assert_eq!(got, oracle_coarsen(&dag, ratio));
    }
}

#[test]
fn every_level_is_acyclic_and_keeps_weight_totals() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let n = rng.gen_range(8..40);
        let dag = random_dag(&mut rng, n, 0.2);
        let seq = coarsen(&dag, 0.15).unwrap();
        for level in 0..=seq.len() {
            // dag_at fails on a cycle.
            let (g, ids) = seq.dag_at(level).unwrap();
            assert_eq!(g.num_nodes(), n - level);
            assert_eq!(g.total_work(), dag.total_work());
            assert_eq!(g.total_comm(), dag.total_comm());
            if level > 0 {
                let rec = &seq.records()[level - 1];
                let i = ids.iter().position(|&x| x == rec.merged).unwrap();
                let preds: Vec<_> = g.predecessors(i).iter().map(|&x| ids[x]).collect();
                let succs: Vec<_> = g.successors(i).iter().map(|&x| ids[x]).collect();
                assert_eq!(preds, rec.preds);
                assert_eq!(succs, rec.succs);
            }
        }
    }
}

#[test]
fn projections_are_valid_at_every_level() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let m = MachineParams::numa_tree(4, 2, 3, 3).unwrap();
    for _ in 0..10 {
        let n = rng.gen_range(20..50);
        let dag = random_dag(&mut rng, n, 0.1);
        let seq = coarsen(&dag, 0.15).unwrap();
        let (coarse, _) = seq.dag_at(seq.len()).unwrap();
        let sched = bspg(&coarse, &m);
        let mut levels = Vec::new();
        let out = uncoarsen_refine_with(&seq, &sched, &m, &MultilevelConfig::default(), |lvl, g, s| {
            assert!(validate_schedule(g, &m, s).is_empty());
            levels.push(lvl);
        })
        .unwrap();
        assert_eq!(levels.last(), Some(&0));
        assert!(levels.windows(2).all(|w| w[0] > w[1] && w[0] - w[1] <= 5));
        assert!(validate_schedule(&dag, &m, &out).is_empty());
    }
}

#[test]
fn single_contraction_splits_into_parent_placement() {
    let dag = chain(3);
    let seq = coarsen(&dag, 0.9).unwrap();
    assert_eq!(seq.len(), 0);
    let seq = coarsen(&dag, 0.6).unwrap();
    assert_eq!(seq.len(), 1);
    let m = MachineParams::uniform(2, 1, 1).unwrap();
    let (coarse, _) = seq.dag_at(1).unwrap();
    let sched = BspSchedule::from_assignment(&coarse, vec![1, 1], vec![0, 0]).unwrap();
    let map = seq.projection(1, 0).unwrap();
    for v in dag.nodes() {
        assert_eq!(sched.processor(map[v]), 1);
    }
    let cfg = MultilevelConfig {
        refine_moves: 0,
        ..Default::default()
    };
    let out = uncoarsen_refine(&seq, &sched, &m, &cfg).unwrap();
    assert_eq!(out.processors(), &[1, 1, 1]);
    assert_eq!(out.supersteps(), &[0, 0, 0]);
}

#[test]
fn empty_sequence_returns_input() {
    let dag = ComputationalDag::new(vec![1; 3], vec![1; 3], &[]).unwrap();
    let seq = coarsen(&dag, 0.5).unwrap();
    let m = MachineParams::uniform(2, 1, 1).unwrap();
    let sched = BspSchedule::from_assignment(&dag, vec![0, 1, 0], vec![0, 0, 0]).unwrap();
    assert_eq!(uncoarsen_refine(&seq, &sched, &m, &MultilevelConfig::default()).unwrap(), sched);
}

#[test]
fn size_floor_and_too_small() {
    assert_eq!(size_floor(&[0.15, 0.30]), 7);
    let m = MachineParams::uniform(2, 1, 1).unwrap();
    let r = multilevel_schedule(&chain(6), &m, &MultilevelConfig::default(), |d, m| Ok(bspg(d, m)));
    assert!(matches!(r, Err(Error::TooSmall(_))));
}

/// Two chains of heavy work whose last nodes are joined by an edge, on a
/// machine where crossing between distant processors is very expensive.
fn two_clusters(len: usize) -> ComputationalDag {
    let n = 2 * len;
    let mut edges = Vec::new();
    for c in 0..2 {
        for i in 1..len {
            edges.push((c * len + i - 1, c * len + i));
            if i >= 2 {
                edges.push((c * len + i - 2, c * len + i));
            }
        }
    }
    edges.push((len - 1, 2 * len - 1));
    ComputationalDag::new(vec![4; n], vec![3; n], &edges).unwrap()
}

#[test]
fn beats_single_processor_on_two_clusters() {
    let dag = two_clusters(12);
    let m = MachineParams::numa_tree(8, 2, 5, 4).unwrap();
    let trivial = scaled_cost(&dag, &m, &BspSchedule::trivial(&dag));
    let out = multilevel_schedule(&dag, &m, &MultilevelConfig::default(), |d, m| {
        hc_improve(d, m, &bspg(d, m), Budget::Unlimited)
    })
    .unwrap();
    assert!(validate_schedule(&dag, &m, &out.schedule).is_empty());
    assert_eq!(out.runs.len(), 2);
    assert_eq!(out.runs[out.selected].cost, scaled_cost(&dag, &m, &out.schedule));
    assert!(out.runs.iter().all(|r| r.cost >= out.runs[out.selected].cost));
    assert!(out.runs[out.selected].cost < trivial, "{} vs {trivial}", out.runs[out.selected].cost);
}
