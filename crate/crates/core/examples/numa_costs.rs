//! Costs one hand-written schedule on a uniform and a NUMA machine.

use bspsched::cost::evaluate_cost;
use bspsched::dag::ComputationalDag;
use bspsched::machine::{numa_from_tree, MachineParams};
use bspsched::schedule::BspSchedule;

fn main() -> bspsched::Result<()> {
    // Diamond: 0 -> {1, 2} -> 3.
    let dag = ComputationalDag::new(vec![2, 3, 3, 1], vec![1, 2, 2, 1], &[(0, 1), (0, 2), (1, 3), (2, 3)])?;
    // Node 2 runs on processor 4, which is far from processor 0 in a tree of 8.
    let sched = BspSchedule::from_assignment(&dag, vec![0, 0, 4, 0], vec![0, 1, 1, 2])?;

    println!("lambda row of processor 0, delta = 3:");
    for (q, l) in numa_from_tree(8, 3)?[0].iter().enumerate() {
        println!("  to {q}: {l}");
    }

    for (name, machine) in [
        ("uniform", MachineParams::uniform(8, 2, 5)?),
        ("numa delta=3", MachineParams::numa_tree(8, 2, 5, 3)?),
    ] {
        let b = evaluate_cost(&dag, &machine, &sched)?;
        println!("\n{name}: total {}", b.total);
        print!("{}", b.to_csv()?);
    }
    Ok(())
}
