//! A small suite compared against Cilk, with per-group geometric means.

use bspsched::generator::{generate_in_range, GenKind};
use bspsched::pipeline::{evaluate_suite, AlgoSpec, Algorithm, Instance, MachineSpec, PipelineConfig};

fn main() -> bspsched::Result<()> {
    let mut instances = Vec::new();
    for (i, kind) in GenKind::ALL.into_iter().enumerate() {
        let (_, dag) = generate_in_range(kind, 40, 80, i as u64)?;
        instances.push(Instance {
            name: format!("{kind}-{i}"),
            dataset: "tiny".into(),
            dag,
        });
    }
    let machines = [
        MachineSpec { p: 4, g: 3, l: 5, delta: None },
        MachineSpec { p: 8, g: 3, l: 5, delta: Some(2) },
    ];
    let algorithms: Vec<AlgoSpec> = [Algorithm::Cilk, Algorithm::Etf, Algorithm::Bspg, Algorithm::Pipeline]
        .into_iter()
        .map(AlgoSpec::from)
        .collect();

    let report = evaluate_suite(&instances, &machines, &algorithms, "cilk", &PipelineConfig::ops(), None)?;
    print!("{}", report.to_table());
    Ok(())
}
