//! The network of cultures: 24 editions plus `WR`, linked by how often an
//! edition lists universities of another language.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{EntityCatalog, EDITIONS, OTHER_LANGUAGES};
use crate::extract::EditionRanking;
use crate::gmatrix::{check_alpha, OperatorError, StochasticOperator};
use crate::numeric::NeumaierSum;
use crate::rank::{power_iterate, RankConfig, RankError, RankResult};

pub const CULTURE_COUNT: usize = EDITIONS.len() + 1;

#[derive(Debug, Error)]
pub enum CultureError {
    #[error("{} entit(ies) missing from the catalog: {}", .0.len(), .0.join(", "))]
    Unresolved(Vec<String>),
    #[error("`{0}` is not an edition code")]
    UnknownEdition(String),
    #[error("edition {0} given more than once")]
    DuplicateEdition(String),
    #[error("rankings mix algorithms")]
    MixedAlgorithms,
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Culture codes in node order: alphabetical, so `WR` sits between `VI` and `ZH`.
pub fn culture_codes() -> [&'static str; CULTURE_COUNT] {
    let mut codes = [""; CULTURE_COUNT];
    for (slot, e) in codes.iter_mut().zip(EDITIONS.iter()) {
        *slot = e.code;
    }
    codes[CULTURE_COUNT - 1] = OTHER_LANGUAGES;
    codes.sort_unstable();
    codes
}

pub fn culture_index(code: &str) -> Option<usize> {
    culture_codes().iter().position(|c| *c == code)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CultureNetwork {
    codes: Vec<String>,
    /// Row-major `weights[i * n + j] = N_ij`.
    weights: Vec<u64>,
}

impl Default for CultureNetwork {
    fn default() -> Self {
        Self::empty()
    }
}

impl CultureNetwork {
    pub fn empty() -> Self {
        CultureNetwork {
            codes: culture_codes().iter().map(|c| c.to_string()).collect(),
            weights: vec![0; CULTURE_COUNT * CULTURE_COUNT],
        }
    }

    /// Builds a network from a dense row-major matrix; the diagonal is zeroed.
    pub fn from_matrix(weights: &[[u64; CULTURE_COUNT]; CULTURE_COUNT]) -> Self {
        let mut net = Self::empty();
        for (i, row) in weights.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if i != j {
                    net.weights[i * CULTURE_COUNT + j] = w;
                }
            }
        }
        net
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// `N_ij`: universities of culture `i` listed by edition `j`.
    pub fn weight(&self, i: usize, j: usize) -> u64 {
        self.weights[i * self.len() + j]
    }

    pub fn weight_by_code(&self, i: &str, j: &str) -> u64 {
        match (culture_index(i), culture_index(j)) {
            (Some(i), Some(j)) => self.weight(i, j),
            _ => 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.weights.iter().sum()
    }

    pub fn column_sum(&self, j: usize) -> u64 {
        (0..self.len()).map(|i| self.weight(i, j)).sum()
    }

    pub fn transpose(&self) -> Self {
        let n = self.len();
        let mut weights = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                weights[j * n + i] = self.weight(i, j);
            }
        }
        CultureNetwork {
            codes: self.codes.clone(),
            weights,
        }
    }

    /// Header row of codes, then one row per culture `i` with `N_ij` per column.
    pub fn write_matrix_csv<W: Write>(&self, out: W) -> Result<(), CultureError> {
        let mut w = std::io::BufWriter::new(out);
        writeln!(w, "culture,{}", self.codes.join(","))?;
        for (i, code) in self.codes.iter().enumerate() {
            write!(w, "{code}")?;
            for j in 0..self.len() {
                write!(w, ",{}", self.weight(i, j))?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `src dst weight` per positive weight; a link runs from edition `j`
    /// to culture `i`.
    pub fn write_edge_list<W: Write>(&self, out: W) -> Result<(), CultureError> {
        let mut w = std::io::BufWriter::new(out);
        for j in 0..self.len() {
            for i in 0..self.len() {
                let n = self.weight(i, j);
                if n > 0 {
                    writeln!(w, "{} {} {n}", self.codes[j], self.codes[i])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Tallies `N_ij` from one algorithm's per-edition lists.
pub fn build_culture_network(
    rankings: &[EditionRanking],
    catalog: &EntityCatalog,
) -> Result<CultureNetwork, CultureError> {
    let mut net = CultureNetwork::empty();
    let n = net.len();
    let mut seen = std::collections::BTreeSet::new();
    let mut missing = std::collections::BTreeSet::new();
    for r in rankings {
        if r.algorithm != rankings[0].algorithm {
            return Err(CultureError::MixedAlgorithms);
        }
        if !seen.insert(r.edition.as_str()) {
            return Err(CultureError::DuplicateEdition(r.edition.clone()));
        }
        let j = match culture_index(&r.edition) {
            Some(j) if r.edition != OTHER_LANGUAGES => j,
            _ => return Err(CultureError::UnknownEdition(r.edition.clone())),
        };
        for e in &r.entries {
            let Some(entity) = catalog.get(&e.canonical_id) else {
                missing.insert(e.canonical_id.clone());
                continue;
            };
            let i = culture_index(&entity.language)
                .expect("catalog languages are culture codes");
            if i != j {
                net.weights[i * n + j] += 1;
            }
        }
    }
    if !missing.is_empty() {
        return Err(CultureError::Unresolved(missing.into_iter().collect()));
    }
    Ok(net)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkMode {
    /// `S_ij ∝ N_ij`.
    #[default]
    Weighted,
    /// `S_ij ∝ [N_ij > 0]`.
    Binary,
}

impl std::str::FromStr for LinkMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "weighted" => Ok(LinkMode::Weighted),
            "binary" => Ok(LinkMode::Binary),
            other => Err(format!("unknown link mode `{other}` (weighted, binary)")),
        }
    }
}

/// Dense Google matrix of a weighted network; all-zero columns are dangling.
#[derive(Debug, Clone)]
pub struct WeightedOperator {
    n: usize,
    alpha: f64,
    /// Column-major `S`.
    columns: Vec<f64>,
    dangling: Vec<bool>,
}

impl WeightedOperator {
    pub fn new(net: &CultureNetwork, alpha: f64, mode: LinkMode) -> Result<Self, OperatorError> {
        check_alpha(alpha)?;
        let n = net.len();
        let mut columns = vec![0.0; n * n];
        let mut dangling = vec![false; n];
        for j in 0..n {
            let w = |i: usize| match mode {
                LinkMode::Weighted => net.weight(i, j),
                LinkMode::Binary => u64::from(net.weight(i, j) > 0),
            };
            let total: u64 = (0..n).map(w).sum();
            if total == 0 {
                dangling[j] = true;
                continue;
            }
            for i in 0..n {
                columns[j * n + i] = w(i) as f64 / total as f64;
            }
        }
        Ok(WeightedOperator {
            n,
            alpha,
            columns,
            dangling,
        })
    }

    /// Column `j` of `S` after dangling substitution.
    pub fn s_column(&self, j: usize) -> Vec<f64> {
        if self.dangling[j] {
            vec![1.0 / self.n as f64; self.n]
        } else {
            self.columns[j * self.n..(j + 1) * self.n].to_vec()
        }
    }
}

impl StochasticOperator for WeightedOperator {
    fn dimension(&self) -> usize {
        self.n
    }

    fn apply_into(&self, p: &[f64], out: &mut [f64]) {
        let n = self.n;
        let d: NeumaierSum = (0..n).filter(|&j| self.dangling[j]).map(|j| p[j]).collect();
        let teleport = (self.alpha * d.value() + (1.0 - self.alpha)) / n as f64;
        for (i, q) in out.iter_mut().enumerate() {
            let acc: NeumaierSum = (0..n)
                .filter(|&j| !self.dangling[j])
                .map(|j| self.columns[j * n + i] * p[j])
                .collect();
            *q = self.alpha * acc.value() + teleport;
        }
        let mass: NeumaierSum = out.iter().copied().collect();
        let mass = mass.value();
        if mass > 0.0 && mass != 1.0 {
            out.iter_mut().for_each(|q| *q /= mass);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CulturePoint {
    pub culture: String,
    pub k: usize,
    pub k_star: usize,
    pub p: f64,
    pub p_star: f64,
}

#[derive(Debug, Clone)]
pub struct CultureRanking {
    pub mode: LinkMode,
    pub pagerank: RankResult,
    pub cheirank: RankResult,
    /// In node (code) order.
    pub plane: Vec<CulturePoint>,
}

impl CultureRanking {
    /// `culture,K,K*,P,P*` in node order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CultureError> {
        let mut w = std::io::BufWriter::new(out);
        writeln!(w, "culture,k,k_star,p,p_star")?;
        for pt in &self.plane {
            writeln!(w, "{},{},{},{:e},{:e}", pt.culture, pt.k, pt.k_star, pt.p, pt.p_star)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn point(&self, culture: &str) -> Option<&CulturePoint> {
        self.plane.iter().find(|p| p.culture == culture)
    }
}

/// PageRank on `N`, CheiRank on `Nᵀ`.
pub fn rank_cultures(
    net: &CultureNetwork,
    config: &RankConfig,
    mode: LinkMode,
) -> Result<CultureRanking, CultureError> {
    let forward = WeightedOperator::new(net, config.alpha, mode)?;
    let reversed = WeightedOperator::new(&net.transpose(), config.alpha, mode)?;
    let pagerank = power_iterate(&forward, config)?;
    let cheirank = power_iterate(&reversed, config)?;
    let plane = net
        .codes()
        .iter()
        .enumerate()
        .map(|(v, code)| CulturePoint {
            culture: code.clone(),
            k: pagerank.index()[v],
            k_star: cheirank.index()[v],
            p: pagerank.probabilities()[v],
            p_star: cheirank.probabilities()[v],
        })
        .collect();
    Ok(CultureRanking {
        mode,
        pagerank,
        cheirank,
        plane,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Entity;
    use crate::extract::{Algorithm, RankedEntity};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn catalog() -> EntityCatalog {
        let rows = [
            ("harvard", "US"),
            ("mit", "US"),
            ("oxford", "UK"),
            ("sorbonne", "FR"),
            ("lmu", "DE"),
            ("tartu", "EE"),
        ];
        EntityCatalog::from_entities(
            rows.iter()
                .map(|(id, cc)| Entity {
                    canonical_id: id.to_string(),
                    display_name: id.to_string(),
                    titles: Default::default(),
                    country: cc.to_string(),
                    language: crate::catalog::country_language(cc).unwrap().to_string(),
                    foundation_year: 1500,
                })
                .collect(),
        )
        .unwrap()
    }

    fn ranking(edition: &str, ids: &[&str]) -> EditionRanking {
        EditionRanking {
            edition: edition.into(),
            algorithm: Algorithm::PageRank,
            top: 100,
            entries: ids
                .iter()
                .enumerate()
                .map(|(k, id)| RankedEntity {
                    rank: k + 1,
                    canonical_id: id.to_string(),
                    title: id.to_string(),
                    node: 0,
                    node_rank: k + 1,
                })
                .collect(),
        }
    }

    #[test]
    fn node_order() {
        let codes = culture_codes();
        assert_eq!(codes.len(), 25);
        assert_eq!(codes[0], "AR");
        assert_eq!(&codes[22..], &["VI", "WR", "ZH"]);
    }

    #[test]
    fn own_language_lists_give_zero_matrix() {
        let net = build_culture_network(
            &[ranking("EN", &["harvard", "oxford"]), ranking("FR", &["sorbonne"])],
            &catalog(),
        )
        .unwrap();
        assert_eq!(net.total(), 0);
    }

    #[test]
    fn counts_foreign_entries() {
        let net = build_culture_network(
            &[
                ranking("FR", &["harvard", "sorbonne", "mit", "oxford", "tartu"]),
                ranking("DE", &["lmu", "harvard"]),
            ],
            &catalog(),
        )
        .unwrap();
        assert_eq!(net.weight_by_code("EN", "FR"), 3);
        assert_eq!(net.weight_by_code("WR", "FR"), 1);
        assert_eq!(net.weight_by_code("EN", "DE"), 1);
        assert_eq!(net.weight_by_code("FR", "FR"), 0);
        assert_eq!(net.column_sum(culture_index("WR").unwrap()), 0);
        assert_eq!(net.total(), 5);

        let mut csv = Vec::new();
        net.write_edge_list(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text, "DE EN 1\nFR EN 3\nFR WR 1\n");
    }

    #[test]
    fn rejects_bad_input() {
        let cat = catalog();
        assert!(matches!(
            build_culture_network(&[ranking("EN", &["nowhere"])], &cat),
            Err(CultureError::Unresolved(_))
        ));
        assert!(matches!(
            build_culture_network(&[ranking("WR", &[])], &cat),
            Err(CultureError::UnknownEdition(_))
        ));
        assert!(matches!(
            build_culture_network(&[ranking("EN", &[]), ranking("EN", &[])], &cat),
            Err(CultureError::DuplicateEdition(_))
        ));
    }

    #[test]
    fn symmetric_pair_ties_by_code() {
        let mut m = [[0u64; CULTURE_COUNT]; CULTURE_COUNT];
        let (de, en) = (culture_index("DE").unwrap(), culture_index("EN").unwrap());
        m[de][en] = 4;
        m[en][de] = 4;
        let r = rank_cultures(&CultureNetwork::from_matrix(&m), &RankConfig::default(), LinkMode::Weighted)
            .unwrap();
        let (pde, pen) = (r.point("DE").unwrap(), r.point("EN").unwrap());
        assert_eq!(pde.p, pen.p);
        assert_eq!((pde.k, pen.k), (1, 2));
        assert_eq!((pde.k_star, pen.k_star), (1, 2));
    }

    #[test]
    fn single_link_ranks_target_first() {
        let mut m = [[0u64; CULTURE_COUNT]; CULTURE_COUNT];
        let (ja, ko) = (culture_index("JA").unwrap(), culture_index("KO").unwrap());
        m[ja][ko] = 7;
        let r = rank_cultures(&CultureNetwork::from_matrix(&m), &RankConfig::default(), LinkMode::Weighted)
            .unwrap();
        assert_eq!(r.point("JA").unwrap().k, 1);
        assert_eq!(r.point("KO").unwrap().k_star, 1);
    }

    #[test]
    fn diagonal_is_dropped() {
        let mut m = [[0u64; CULTURE_COUNT]; CULTURE_COUNT];
        m[3][3] = 9;
        assert_eq!(CultureNetwork::from_matrix(&m).total(), 0);
    }

    fn random_network(seed: u64) -> CultureNetwork {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = [[0u64; CULTURE_COUNT]; CULTURE_COUNT];
        for row in m.iter_mut() {
            for w in row.iter_mut() {
                if rng.gen_bool(0.3) {
                    *w = rng.gen_range(1..10);
                }
            }
        }
        CultureNetwork::from_matrix(&m)
    }

    #[test]
    fn columns_are_stochastic() {
        for mode in [LinkMode::Weighted, LinkMode::Binary] {
            let op = WeightedOperator::new(&random_network(3), 0.85, mode).unwrap();
            for j in 0..CULTURE_COUNT {
                let s: NeumaierSum = op.s_column(j).into_iter().collect();
                assert!((s.value() - 1.0).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn matches_dense_power_iteration() {
        let alpha = 0.85;
        for seed in 0..5 {
            let net = random_network(seed);
            let r = rank_cultures(&net, &RankConfig::default(), LinkMode::Weighted).unwrap();
            let op = WeightedOperator::new(&net, alpha, LinkMode::Weighted).unwrap();
            let n = CULTURE_COUNT;
            let g: Vec<Vec<f64>> = (0..n)
                .map(|j| op.s_column(j).iter().map(|s| alpha * s + (1.0 - alpha) / n as f64).collect())
                .collect();
            let mut p = vec![1.0 / n as f64; n];
            for _ in 0..2000 {
                p = (0..n).map(|i| (0..n).map(|j| g[j][i] * p[j]).sum()).collect();
                let s: f64 = p.iter().sum();
                p.iter_mut().for_each(|x| *x /= s);
            }
            for (a, b) in p.iter().zip(r.pagerank.probabilities()) {
                assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
            }
        }
    }
}
