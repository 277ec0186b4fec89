//! MILP refinement: the full model on a small DAG, then interval and
//! communication models on a larger one.

use bspsched::budget::Budget;
use bspsched::cost::total_cost;
use bspsched::generator::{generate, GenKind, GenSpec};
use bspsched::init::bspg;
use bspsched::machine::MachineParams;
use bspsched::milp::{ilp_cs, ilp_full, ilp_part_sweep, split_intervals};

fn main() -> bspsched::Result<()> {
    let machine = MachineParams::uniform(2, 2, 3)?;

    let small = generate(&GenSpec::new(GenKind::Spmv, 3, 0.5, 1, 2))?;
    let warm = bspg(&small, &machine);
    let full = ilp_full(&small, &machine, &warm, Budget::Ops(200))?;
    println!(
        "full model, {} nodes: {} -> {} ({:?})",
        small.num_nodes(),
        total_cost(&small, &machine, &warm)?,
        total_cost(&small, &machine, &full.schedule)?,
        full.status
    );

    let dag = generate(&GenSpec::new(GenKind::Exp, 12, 0.2, 2, 4))?;
    let start = bspg(&dag, &machine);
    println!(
        "{} nodes, {} supersteps, intervals {:?}",
        dag.num_nodes(),
        start.num_supersteps(),
        split_intervals(&start, &machine)
    );
    let part = ilp_part_sweep(&dag, &machine, &start, Budget::Ops(20), 1)?;
    let cs = ilp_cs(&dag, &machine, &part, Budget::Ops(50))?;
    println!(
        "bspg {} -> interval models {} -> communication model {}",
        total_cost(&dag, &machine, &start)?,
        total_cost(&dag, &machine, &part)?,
        total_cost(&dag, &machine, &cs.schedule)?
    );
    Ok(())
}
