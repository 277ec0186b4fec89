//! The four instance generators, a MatrixMarket pattern, and the hyperDAG
//! text format.

use bspsched::generator::{gen_cg, generate, parse_matrix_market, GenKind, GenSpec};
use bspsched::hyperdag::{parse_hyperdag, write_hyperdag};

const MATRIX: &str = "%%MatrixMarket matrix coordinate real symmetric
4 4 6
1 1 4.0
2 1 -1.0
2 2 4.0
3 3 4.0
4 3 -1.0
4 4 4.0
";

fn main() -> bspsched::Result<()> {
    for kind in GenKind::ALL {
        let dag = generate(&GenSpec::new(kind, 12, 0.2, 3, 1))?;
        println!("{kind:>4}: {:>4} nodes, {:>4} edges, depth {}", dag.num_nodes(), dag.num_edges(), dag.depth());
    }

    let pattern = parse_matrix_market(MATRIX)?;
    let cg = gen_cg(&pattern, 1)?;
    let text = write_hyperdag(&cg);
    assert_eq!(write_hyperdag(&parse_hyperdag(&text)?), text);
    println!("\none CG iteration on a 4x4 matrix, {} nodes:", cg.num_nodes());
    print!("{}", text.lines().take(8).collect::<Vec<_>>().join("\n"));
    println!("\n...");
    Ok(())
}
