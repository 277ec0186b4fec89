//! The BSP-aware greedy initializers.

use bspsched::budget::Budget;
use bspsched::cost::total_cost;
use bspsched::generator::{generate, GenKind, GenSpec};
use bspsched::init::{bspg, source_schedule};
use bspsched::machine::MachineParams;
use bspsched::milp::ilp_init;

fn main() -> bspsched::Result<()> {
    let dag = generate(&GenSpec::new(GenKind::Cg, 8, 0.3, 1, 3))?;
    let machine = MachineParams::numa_tree(4, 2, 5, 2)?;
    println!("{} nodes", dag.num_nodes());

    let g = bspg(&dag, &machine);
    println!("bspg:     cost {}, {} supersteps", total_cost(&dag, &machine, &g)?, g.num_supersteps());
    let s = source_schedule(&dag, &machine);
    println!("source:   cost {}, {} supersteps", total_cost(&dag, &machine, &s)?, s.num_supersteps());
    let i = ilp_init(&dag, &machine, Budget::Ops(2))?;
    println!("ilp_init: cost {}, {} supersteps", total_cost(&dag, &machine, &i)?, i.num_supersteps());
    Ok(())
}
