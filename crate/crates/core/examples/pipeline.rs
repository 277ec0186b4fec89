//! The full pipeline with deterministic budgets; prints every stage.

use bspsched::generator::{generate, GenKind, GenSpec};
use bspsched::machine::MachineParams;
use bspsched::pipeline::{run_algorithm, run_pipeline, Algorithm, PipelineConfig};

fn main() -> bspsched::Result<()> {
    let dag = generate(&GenSpec::new(GenKind::Cg, 10, 0.2, 1, 9))?;
    let machine = MachineParams::numa_tree(4, 3, 5, 2)?;
    let config = PipelineConfig::ops();

    let run = run_pipeline(&dag, &machine, &config)?;
    for s in &run.stages {
        println!("{:<16} {:>6} {:>9.1?} {:?}", s.stage, s.cost, s.wall, s.status);
    }
    println!("final {} (proven optimal: {})", run.cost, run.proven_optimal);

    let cilk = run_algorithm(Algorithm::Cilk, &dag, &machine, &config)?;
    println!("cilk  {}", cilk.cost);
    Ok(())
}
