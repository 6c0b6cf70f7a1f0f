//! Network of cultures: who lists whose universities, and how cultures rank.

use wikirank::cultures::{culture_index, rank_cultures, CultureNetwork, LinkMode, CULTURE_COUNT};
use wikirank::rank::RankConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // weights[i][j]: universities of culture i in edition j's list.
    let mut weights = [[0u64; CULTURE_COUNT]; CULTURE_COUNT];
    let mut link = |i: &str, j: &str, n: u64| {
        weights[culture_index(i).unwrap()][culture_index(j).unwrap()] = n;
    };
    link("EN", "DE", 40);
    link("EN", "FR", 35);
    link("EN", "JA", 50);
    link("DE", "EN", 8);
    link("FR", "EN", 6);
    link("FR", "IT", 12);
    link("PL", "DE", 10);
    link("WR", "EN", 20);
    link("WR", "FR", 15);
    let net = CultureNetwork::from_matrix(&weights);

    for mode in [LinkMode::Weighted, LinkMode::Binary] {
        let ranking = rank_cultures(&net, &RankConfig::default(), mode)?;
        println!("{mode:?}");
        let mut points = ranking.plane.clone();
        points.sort_by_key(|p| p.k);
        for p in points.iter().take(6) {
            println!("  {}  K={:<2} K*={:<2} P={:.4} P*={:.4}", p.culture, p.k, p.k_star, p.p, p.p_star);
        }
    }
    net.write_edge_list(std::io::stdout().lock())?;
    Ok(())
}
