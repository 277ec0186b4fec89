//! Coarsening, a coarse solve and refined uncoarsening on a machine with
//! expensive long-distance communication.

use bspsched::cost::total_cost;
use bspsched::generator::{generate, GenKind, GenSpec};
use bspsched::init::bspg;
use bspsched::machine::MachineParams;
use bspsched::multilevel::{coarsen, multilevel_schedule, MultilevelConfig};
use bspsched::schedule::BspSchedule;

fn main() -> bspsched::Result<()> {
    let dag = generate(&GenSpec::new(GenKind::Exp, 30, 0.08, 4, 11))?;
    let machine = MachineParams::numa_tree(8, 5, 5, 4)?;

    let seq = coarsen(&dag, 0.15)?;
    let (coarse, _) = seq.dag_at(seq.len())?;
    println!("{} nodes coarsen to {} in {} steps", dag.num_nodes(), coarse.num_nodes(), seq.len());

    let out = multilevel_schedule(&dag, &machine, &MultilevelConfig::default(), |d, m| Ok(bspg(d, m)))?;
    for r in &out.runs {
        println!("ratio {:.2}: {} coarse nodes, cost {}", r.ratio, r.coarse_nodes, r.cost);
    }
    println!("bspg on the full DAG: {}", total_cost(&dag, &machine, &bspg(&dag, &machine))?);
    println!("single processor:     {}", total_cost(&dag, &machine, &BspSchedule::trivial(&dag))?);
    Ok(())
}
