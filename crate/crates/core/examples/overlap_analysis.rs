//! Overlap curve between two ranked lists.

use wikirank::analysis::overlap_curve;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reference = ["harvard", "stanford", "mit", "berkeley", "cambridge", "caltech", "princeton", "columbia"];
    let wiki = ["harvard", "oxford", "cambridge", "mit", "columbia", "yale", "stanford", "chicago"];
    let curve = overlap_curve("reference", &reference, "wiki", &wiki, reference.len())?;
    println!("  j  common  eta");
    for p in &curve.points {
        println!("{:>3}  {:>6}  {:.3}  {}", p.j, p.common, p.eta, "#".repeat((p.eta * 20.0) as usize));
    }
    println!("mean eta over j: {:.3}", curve.points.iter().map(|p| p.eta).sum::<f64>() / curve.points.len() as f64);
    Ok(())
}
