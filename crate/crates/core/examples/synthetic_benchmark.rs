//! Time PageRank and CheiRank on a random graph.
//!
//! cargo run --release --example synthetic_benchmark -- [NODES] [LINKS] [uniform|skewed]

use std::time::Instant;

use wikirank::rank::{cheirank, pagerank, RankConfig};
use wikirank::synthetic::{skewed_graph, uniform_graph};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(1_000_000), |s| s.parse())?;
    let links: usize = args.get(1).map_or(Ok(10 * n), |s| s.parse())?;
    let kind = args.get(2).map_or("uniform", String::as_str);

    let start = Instant::now();
    let graph = match kind {
        "skewed" => skewed_graph(n, links, 1.0, 42),
        _ => uniform_graph(n, links, 42)?.0,
    };
    println!(
        "{kind} graph: N={} N_l={} dangling={} built in {:.2?}",
        graph.node_count(),
        graph.link_count(),
        graph.dangling_nodes().len(),
        start.elapsed()
    );

    let config = RankConfig::default();
    for (name, run) in [("PageRank", pagerank as fn(_, _) -> _), ("CheiRank", cheirank)] {
        let start = Instant::now();
        let r = run(&graph, &config)?;
        println!(
            "{name}: {} iterations, residual {:.2e}, {:?}, {:.2?} on {} thread(s)",
            r.iterations(),
            r.residual(),
            r.termination(),
            start.elapsed(),
            rayon::current_num_threads()
        );
    }
    Ok(())
}
