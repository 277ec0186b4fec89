//! Classical list and work-stealing schedulers, converted to BSP.

use bspsched::baselines::{cilk_schedule, list_schedule, ListPolicy};
use bspsched::classical::classical_to_bsp;
use bspsched::cost::total_cost;
use bspsched::generator::{generate, GenKind, GenSpec};
use bspsched::machine::MachineParams;

fn main() -> bspsched::Result<()> {
    let dag = generate(&GenSpec::new(GenKind::Exp, 20, 0.15, 3, 7))?;
    let machine = MachineParams::uniform(4, 3, 5)?;
    println!("{} nodes, {} edges", dag.num_nodes(), dag.num_edges());

    let runs = [
        ("cilk", cilk_schedule(&dag, &machine, 1)),
        ("bl-est", list_schedule(&dag, &machine, ListPolicy::BlEst)),
        ("etf", list_schedule(&dag, &machine, ListPolicy::Etf)),
    ];
    for (name, cs) in runs {
        let bsp = classical_to_bsp(&dag, &cs)?;
        println!(
            "{name:>7}: makespan {:>4}, {:>3} supersteps, BSP cost {}",
            cs.makespan(),
            bsp.num_supersteps(),
            total_cost(&dag, &machine, &bsp)?
        );
    }
    Ok(())
}
