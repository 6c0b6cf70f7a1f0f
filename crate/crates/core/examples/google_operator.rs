//! Apply the Google matrix to a vector without materialising it.

use wikirank::gmatrix::{column_sums_check, GoogleOperator, StochasticOperator};
use wikirank::graph::DirectedGraph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 0 → 1 → 2 → 0, 3 → 0, and 4 points nowhere.
    let (graph, _) = DirectedGraph::from_edges(5, [(0, 1), (1, 2), (2, 0), (3, 0)])?;
    let alpha = 0.85;

    for op in [GoogleOperator::forward(&graph, alpha)?, GoogleOperator::reversed(&graph, alpha)?] {
        println!("{:?}: dangling {:?}", op.direction(), op.dangling());
        let mut p = vec![0.2; 5];
        for step in 1..=3 {
            p = op.apply(&p)?;
            let sum: f64 = p.iter().sum();
            let shown: Vec<String> = p.iter().map(|x| format!("{x:.4}")).collect();
            println!("  step {step}: [{}]  sum {sum:.15}", shown.join(", "));
        }
        println!("  columns stochastic: {}", column_sums_check(&op, 8));
    }
    Ok(())
}
