use crate::dag::{ComputationalDag, NodeId};
use crate::machine::MachineParams;
use crate::schedule::BspSchedule;

/// Superstep-by-superstep source peeling.
///
/// Each superstep takes the current sources of the unassigned subgraph and
/// spreads them round-robin over the processors, starting at processor 0.
/// In the first superstep, sources that share a direct successor are
/// clustered and each cluster goes to one processor; later supersteps sort
/// sources by decreasing work (ties by id). Afterwards any node whose
/// predecessors all sit on a single processor joins that processor in the
/// current superstep, repeatedly until no more nodes qualify.
pub fn source_schedule(dag: &ComputationalDag, machine: &MachineParams) -> BspSchedule {
    let n = dag.num_nodes();
    let p_count = machine.num_processors();
    let mut processor: Vec<Option<usize>> = vec![None; n];
    let mut superstep = vec![0; n];
    let mut missing: Vec<usize> = dag.nodes().map(|v| dag.in_degree(v)).collect();
    let mut sources: Vec<NodeId> = dag.sources().collect();
    let mut assigned = 0;
    let mut step = 0;

    while assigned < n {
        let groups: Vec<Vec<NodeId>> = if step == 0 {
            cluster_sources(dag, &sources)
        } else {
            sources.sort_unstable_by_key(|&v| (std::cmp::Reverse(dag.work(v)), v));
            sources.iter().map(|&v| vec![v]).collect()
        };
        let mut worklist = Vec::new();
        for (i, group) in groups.iter().enumerate() {
            for &v in group {
                processor[v] = Some(i % p_count);
                superstep[v] = step;
                assigned += 1;
                worklist.push(v);
            }
        }

        // absorb successors whose predecessors all share one processor
        let mut next_sources = Vec::new();
        while let Some(v) = worklist.pop() {
            for &u in dag.successors(v) {
                missing[u] -= 1;
                if missing[u] > 0 {
                    continue;
                }
                let p0 = processor[dag.predecessors(u)[0]];
                if dag.predecessors(u).iter().all(|&x| processor[x] == p0) {
                    processor[u] = p0;
                    superstep[u] = step;
                    assigned += 1;
                    worklist.push(u);
                } else {
                    next_sources.push(u);
                }
            }
        }
        next_sources.sort_unstable();
        sources = next_sources;
        step += 1;
    }

    let processor = processor.into_iter().map(|p| p.expect("assigned")).collect();
    BspSchedule::from_assignment(dag, processor, superstep)
        .expect("source peeling respects precedence")
}

/// Single ascending pass: an unclustered source joins the cluster of the
/// smallest other source it shares a direct successor with (creating that
/// cluster if needed); otherwise it forms a singleton. Clusters are ordered
/// by their smallest member.
fn cluster_sources(dag: &ComputationalDag, sources: &[NodeId]) -> Vec<Vec<NodeId>> {
    let n = dag.num_nodes();
    let mut is_source = vec![false; n];
    for &v in sources {
        is_source[v] = true;
    }
    let mut cluster_of: Vec<Option<usize>> = vec![None; n];
    let mut clusters: Vec<Vec<NodeId>> = Vec::new();
    for &v in sources {
        if cluster_of[v].is_some() {
            continue;
        }
        let partner = dag
            .successors(v)
            .iter()
            .flat_map(|&s| dag.predecessors(s).iter().copied())
            .filter(|&u| u != v && is_source[u])
            .min();
        let c = match partner.and_then(|u| cluster_of[u].map(|c| (u, c))) {
            Some((_, c)) => c,
            None => {
                clusters.push(Vec::new());
                let c = clusters.len() - 1;
                if let Some(u) = partner {
                    cluster_of[u] = Some(c);
                    clusters[c].push(u);
                }
                c
            }
        };
        cluster_of[v] = Some(c);
        clusters[c].push(v);
    }
    for c in &mut clusters {
        c.sort_unstable();
    }
    clusters.sort_unstable_by_key(|c| c[0]);
    clusters
}
