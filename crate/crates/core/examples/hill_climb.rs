//! Node-move hill climbing followed by communication retiming.

use bspsched::budget::Budget;
use bspsched::cost::total_cost;
use bspsched::generator::{generate, GenKind, GenSpec};
use bspsched::init::bspg;
use bspsched::local_search::{hc_improve_with, hccs_improve, HcConfig};
use bspsched::machine::MachineParams;

fn main() -> bspsched::Result<()> {
    let dag = generate(&GenSpec::new(GenKind::Knn, 24, 0.12, 4, 5))?;
    let machine = MachineParams::uniform(8, 3, 5)?;
    let start = bspg(&dag, &machine);
    println!("bspg: {}", total_cost(&dag, &machine, &start)?);

    let hc = hc_improve_with(&dag, &machine, &start, Budget::Unlimited, &HcConfig::default())?;
    println!(
        "hc:   {} after {} moves (local minimum: {})",
        total_cost(&dag, &machine, &hc.schedule)?,
        hc.moves,
        hc.local_minimum
    );
    let cs = hccs_improve(&dag, &machine, &hc.schedule, Budget::Unlimited)?;
    println!("hccs: {}", total_cost(&dag, &machine, &cs)?);
    Ok(())
}
