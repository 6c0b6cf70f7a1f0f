//! Cross-edition aggregation.
//!
//! Every edition votes `T + 1 − R` points for the entity at rank `R` of its
//! top-`T` list and nothing for entities it does not list. The sum over
//! editions is the entity's score `Θ`; sorting by `Θ` gives the world list.
//! All arithmetic here is integer except the per-capita and per-edition
//! averages.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::catalog::EntityCatalog;
use crate::extract::{Algorithm, EditionRanking};

#[derive(Debug, Error)]
pub enum MergeError {
    #[error("no edition rankings to merge")]
    NoEditions,
    #[error("edition {0} appears more than once")]
    DuplicateEdition(String),
    #[error("rankings mix algorithms {0} and {1}")]
    MixedAlgorithms(Algorithm, Algorithm),
    #[error("rankings mix list lengths {0} and {1}")]
    MixedListLength(usize, usize),
    #[error("{} entit(ies) missing from the catalog: {}", .0.len(), .0.join(", "))]
    Unresolved(Vec<String>),
    #[error("no population figure for country {0}")]
    MissingPopulation(String),
    #[error("population of {0} must be positive")]
    BadPopulation(String),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalEntry {
    pub canonical_id: String,
    pub theta: u64,
    /// `Nₐ`, editions listing the entity.
    pub appearances: usize,
    pub global_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalRanking {
    pub algorithm: Algorithm,
    pub top: usize,
    pub editions_used: Vec<String>,
    pub entries: Vec<GlobalEntry>,
}

impl GlobalRanking {
    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.canonical_id.as_str())
    }

    pub fn get(&self, canonical_id: &str) -> Option<&GlobalEntry> {
        self.entries.iter().find(|e| e.canonical_id == canonical_id)
    }

    pub fn write_csv<W: Write>(&self, out: W, catalog: &EntityCatalog) -> Result<(), MergeError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "rank",
            "canonical_id",
            "display_name",
            "theta",
            "appearances",
            "country",
            "language",
            "foundation_year",
        ])?;
        let mut missing = Vec::new();
        for e in &self.entries {
            let Some(entity) = catalog.get(&e.canonical_id) else {
                missing.push(e.canonical_id.clone());
                continue;
            };
            w.write_record([
                e.global_rank.to_string(),
                e.canonical_id.clone(),
                entity.display_name.clone(),
                e.theta.to_string(),
                e.appearances.to_string(),
                entity.country.clone(),
                entity.language.clone(),
                entity.foundation_year.to_string(),
            ])?;
        }
        if !missing.is_empty() {
            return Err(MergeError::Unresolved(missing));
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(
        input: R,
        algorithm: Algorithm,
        top: usize,
        editions_used: Vec<String>,
    ) -> Result<Self, MergeError> {
        #[derive(Deserialize)]
        struct Row {
            rank: usize,
            canonical_id: String,
            theta: u64,
            appearances: usize,
        }
        let mut entries = Vec::new();
        for row in csv::Reader::from_reader(input).deserialize() {
            let r: Row = row?;
            entries.push(GlobalEntry {
                canonical_id: r.canonical_id,
                theta: r.theta,
                appearances: r.appearances,
                global_rank: r.rank,
            });
        }
        Ok(Self {
            algorithm,
            top,
            editions_used,
            entries,
        })
    }
}

/// Sums `T + 1 − R` per entity across editions and sorts by `Θ` descending,
/// then `Nₐ` descending, then canonical id.
pub fn merge_editions(rankings: &[EditionRanking]) -> Result<GlobalRanking, MergeError> {
    let first = rankings.first().ok_or(MergeError::NoEditions)?;
    let mut editions = BTreeSet::new();
    for r in rankings {
        if r.algorithm != first.algorithm {
            return Err(MergeError::MixedAlgorithms(first.algorithm, r.algorithm));
        }
        if r.top != first.top {
            return Err(MergeError::MixedListLength(first.top, r.top));
        }
        if !editions.insert(r.edition.to_ascii_uppercase()) {
            return Err(MergeError::DuplicateEdition(r.edition.clone()));
        }
    }

    let absent_rank = first.top as u64 + 1;
    let mut scores: BTreeMap<&str, (u64, usize)> = BTreeMap::new();
    for r in rankings {
        for e in &r.entries {
            let slot = scores.entry(e.canonical_id.as_str()).or_default();
            slot.0 += absent_rank - e.rank as u64;
            slot.1 += 1;
        }
    }

    let mut entries: Vec<GlobalEntry> = scores
        .into_iter()
        .map(|(id, (theta, appearances))| GlobalEntry {
            canonical_id: id.to_string(),
            theta,
            appearances,
            global_rank: 0,
        })
        .collect();
    entries.sort_by(|a, b| {
        b.theta
            .cmp(&a.theta)
            .then(b.appearances.cmp(&a.appearances))
            .then(a.canonical_id.cmp(&b.canonical_id))
    });
    for (k, e) in entries.iter_mut().enumerate() {
        e.global_rank = k + 1;
    }
    Ok(GlobalRanking {
        algorithm: first.algorithm,
        top: first.top,
        editions_used: editions.into_iter().collect(),
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountryScore {
    pub country: String,
    /// `Θ_C = Σ (top + 1 − K_U)` over the country's universities in the slice.
    pub theta_c: u64,
    /// `N_C`.
    pub count: usize,
    pub rank: usize,
}

pub fn country_scores(
    global: &GlobalRanking,
    catalog: &EntityCatalog,
    top: usize,
) -> Result<Vec<CountryScore>, MergeError> {
    country_scores_for(global.ids(), catalog, top)
}

/// Country scores for any best-first list of canonical ids (e.g. a reference
/// ranking); position `k` in the list is rank `K = k + 1`.
pub fn country_scores_for<'a, I>(
    ids: I,
    catalog: &EntityCatalog,
    top: usize,
) -> Result<Vec<CountryScore>, MergeError>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut by_country: BTreeMap<&str, (u64, usize)> = BTreeMap::new();
    let mut missing = Vec::new();
    for (k, id) in ids.into_iter().take(top).enumerate() {
        match catalog.get(id) {
            Some(entity) => {
                let slot = by_country.entry(entity.country.as_str()).or_default();
                slot.0 += (top - k) as u64;
                slot.1 += 1;
            }
            None => missing.push(id.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(MergeError::Unresolved(missing));
    }
    let mut scores: Vec<CountryScore> = by_country
        .into_iter()
        .map(|(cc, (theta_c, count))| CountryScore {
            country: cc.to_string(),
            theta_c,
            count,
            rank: 0,
        })
        .collect();
    scores.sort_by(|a, b| {
        b.theta_c
            .cmp(&a.theta_c)
            .then(b.count.cmp(&a.count))
            .then(a.country.cmp(&b.country))
    });
    for (k, s) in scores.iter_mut().enumerate() {
        s.rank = k + 1;
    }
    Ok(scores)
}

pub fn write_country_csv<W: Write>(out: W, scores: &[CountryScore]) -> Result<(), MergeError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "cc", "theta_c", "count"])?;
    for s in scores {
        w.write_record([
            s.rank.to_string(),
            s.country.clone(),
            s.theta_c.to_string(),
            s.count.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerCapita {
    pub country: String,
    /// Universities per 10 million inhabitants.
    pub per_10m: f64,
}

pub fn per_capita_scores(
    scores: &[CountryScore],
    population: &BTreeMap<String, u64>,
) -> Result<Vec<PerCapita>, MergeError> {
    let mut out = Vec::with_capacity(scores.len());
    for s in scores {
        let pop = *population
            .get(&s.country)
            .ok_or_else(|| MergeError::MissingPopulation(s.country.clone()))?;
        if pop == 0 {
            return Err(MergeError::BadPopulation(s.country.clone()));
        }
        out.push(PerCapita {
            country: s.country.clone(),
            per_10m: s.count as f64 / (pop as f64 / 1e7),
        });
    }
    out.sort_by(|a, b| {
        b.per_10m
            .total_cmp(&a.per_10m)
            .then(a.country.cmp(&b.country))
    });
    Ok(out)
}

pub fn write_per_capita_csv<W: Write>(out: W, rows: &[PerCapita]) -> Result<(), MergeError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cc", "per_10M"])?;
    for r in rows {
        w.write_record([r.country.clone(), format!("{}", r.per_10m)])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads `cc,population` rows (header required).
pub fn load_population(path: &Path) -> Result<BTreeMap<String, u64>, MergeError> {
    let file = std::fs::File::open(path).map_err(|source| MergeError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_population(file)
}

pub fn parse_population<R: Read>(input: R) -> Result<BTreeMap<String, u64>, MergeError> {
    #[derive(Deserialize)]
    struct Row {
        cc: String,
        population: u64,
    }
    let mut map = BTreeMap::new();
    for row in csv::Reader::from_reader(input).deserialize() {
        let r: Row = row?;
        map.insert(r.cc.trim().to_ascii_uppercase(), r.population);
    }
    Ok(map)
}

/// Average number of listed universities per edition, by country.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageCounts {
    pub editions: usize,
    pub totals: BTreeMap<String, usize>,
}

impl AverageCounts {
    pub fn average(&self, cc: &str) -> f64 {
        self.totals.get(cc).copied().unwrap_or(0) as f64 / self.editions as f64
    }

    /// Countries whose average is below one are left out of reports.
    pub fn is_reported(&self, cc: &str) -> bool {
        self.average(cc) >= 1.0
    }

    /// `(cc, average, reported)` by average descending, then country code.
    pub fn rows(&self) -> Vec<(String, f64, bool)> {
        let mut rows: Vec<_> = self
            .totals
            .keys()
            .map(|cc| (cc.clone(), self.average(cc), self.is_reported(cc)))
            .collect();
        rows.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        rows
    }
}

pub fn per_edition_average_counts(
    rankings: &[EditionRanking],
    catalog: &EntityCatalog,
) -> Result<AverageCounts, MergeError> {
    if rankings.is_empty() {
        return Err(MergeError::NoEditions);
    }
    let mut editions = BTreeSet::new();
    let mut totals: BTreeMap<String, usize> = BTreeMap::new();
    let mut missing = BTreeSet::new();
    for r in rankings {
        if !editions.insert(r.edition.to_ascii_uppercase()) {
            return Err(MergeError::DuplicateEdition(r.edition.clone()));
        }
        for e in &r.entries {
            match catalog.get(&e.canonical_id) {
                Some(entity) => *totals.entry(entity.country.clone()).or_default() += 1,
                None => {
                    missing.insert(e.canonical_id.clone());
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(MergeError::Unresolved(missing.into_iter().collect()));
    }
    Ok(AverageCounts {
        editions: rankings.len(),
        totals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Entity;
    use crate::extract::RankedEntity;

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
                    node: k as crate::graph::NodeId,
                    node_rank: k + 1,
                })
                .collect(),
        }
    }

    fn catalog(rows: &[(&str, &str)]) -> EntityCatalog {
        EntityCatalog::from_entities(
            rows.iter()
                .map(|(id, cc)| Entity {
                    canonical_id: id.to_string(),
                    display_name: id.to_string(),
                    titles: Default::default(),
                    country: cc.to_string(),
                    language: crate::catalog::country_language(cc).unwrap().to_string(),
                    foundation_year: 1900,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn first_everywhere_scores_maximum() {
        let rankings: Vec<_> = crate::catalog::EDITIONS
            .iter()
            .map(|e| ranking(e.code, &["cambridge", "oxford"]))
            .collect();
        let g = merge_editions(&rankings).unwrap();
        assert_eq!(g.entries[0].canonical_id, "cambridge");
        assert_eq!(g.entries[0].theta, 2400);
        assert_eq!(g.entries[0].appearances, 24);
        assert_eq!(g.entries[1].theta, 2376);
    }

    #[test]
    fn two_appearances() {
        let g = merge_editions(&[
            ranking("EN", &["u"]),
            ranking("FR", &["a", "b", "c", "d", "u"]),
            ranking("DE", &[]),
        ])
        .unwrap();
        let u = g.get("u").unwrap();
        assert_eq!((u.theta, u.appearances), (196, 2));
        assert_eq!(g.editions_used, vec!["DE", "EN", "FR"]);
    }

    #[test]
    fn ties_break_on_appearances_then_id() {
        // x: 100 from one edition; y: 50 + 50 from two; fr1 and de1 tie x exactly.
        let fillers = |prefix: &str| -> Vec<String> {
            (1..=50).map(|k| format!("{prefix}{k}")).chain(["y".to_string()]).collect()
        };
        let (fr, de) = (fillers("fr"), fillers("de"));
        let fr: Vec<&str> = fr.iter().map(String::as_str).collect();
        let de: Vec<&str> = de.iter().map(String::as_str).collect();
        let g = merge_editions(&[ranking("EN", &["x"]), ranking("FR", &fr), ranking("DE", &de)])
            .unwrap();
        let rank = |id: &str| g.get(id).unwrap().global_rank;
        assert_eq!(g.get("x").unwrap().theta, 100);
        assert_eq!(g.get("y").unwrap().theta, 100);
        assert_eq!(rank("y"), 1);
        assert!(rank("de1") < rank("fr1") && rank("fr1") < rank("x"));
    }

    #[test]
    fn input_errors() {
        assert!(matches!(merge_editions(&[]), Err(MergeError::NoEditions)));
        assert!(matches!(
            merge_editions(&[ranking("EN", &[]), ranking("en", &[])]),
            Err(MergeError::DuplicateEdition(_))
        ));
        let mut cr = ranking("FR", &[]);
        cr.algorithm = Algorithm::CheiRank;
        assert!(matches!(
            merge_editions(&[ranking("EN", &[]), cr]),
            Err(MergeError::MixedAlgorithms(..))
        ));
    }

    #[test]
    fn single_edition_is_101_minus_r() {
        let ids = ["a", "b", "c"];
        let g = merge_editions(&[ranking("EN", &ids)]).unwrap();
        for (k, e) in g.entries.iter().enumerate() {
            assert_eq!(e.canonical_id, ids[k]);
            assert_eq!(e.theta, 101 - (k as u64 + 1));
            assert_eq!(e.appearances, 1);
        }
    }

    #[test]
    fn country_score_ranks_one_and_three() {
        let cat = catalog(&[("a", "UK"), ("b", "US"), ("c", "UK")]);
        let g = merge_editions(&[ranking("EN", &["a", "b", "c"])]).unwrap();
        let s = country_scores(&g, &cat, 100).unwrap();
        assert_eq!(s[0].country, "UK");
        assert_eq!((s[0].theta_c, s[0].count, s[0].rank), (198, 2, 1));
        assert_eq!((s[1].country.as_str(), s[1].theta_c), ("US", 99));
        let empty = catalog(&[]);
        assert!(matches!(country_scores(&g, &empty, 100), Err(MergeError::Unresolved(_))));
    }

    #[test]
    fn equal_country_scores_break_on_count_then_code() {
        let cat = catalog(&[("i1", "IT"), ("j1", "JP"), ("j2", "JP")]);
        // ranks 1 (IT, 100), 2 and 3 (JP, 99 + 98 = 197) -> JP first
        let s = country_scores_for(["i1", "j1", "j2"], &cat, 100).unwrap();
        assert_eq!(s[0].country, "JP");
        // top = 2: IT 2, JP 1 -> IT first
        let s = country_scores_for(["i1", "j1", "j2"], &cat, 2).unwrap();
        assert_eq!((s[0].country.as_str(), s[0].theta_c), ("IT", 2));
        assert_eq!(s.iter().map(|x| x.count).sum::<usize>(), 2);
        // equal theta and count: alphabetical
        let cat = catalog(&[("x", "SE"), ("y", "CH"), ("z", "SE"), ("w", "CH")]);
        let s = country_scores_for(["x", "y", "w", "z"], &cat, 4).unwrap();
        assert_eq!((s[0].theta_c, s[1].theta_c), (5, 5));
        assert_eq!((s[0].country.as_str(), s[1].country.as_str()), ("CH", "SE"));
    }

    #[test]
    fn per_capita_values() {
        let scores = vec![
            CountryScore { country: "SE".into(), theta_c: 0, count: 4, rank: 1 },
            CountryScore { country: "EE".into(), theta_c: 0, count: 1, rank: 2 },
        ];
        let pop: BTreeMap<String, u64> =
            [("SE".to_string(), 40_000_000), ("EE".to_string(), 1_300_000)].into();
        let pc = per_capita_scores(&scores, &pop).unwrap();
        assert_eq!(pc[0].country, "EE");
        assert!((pc[0].per_10m - 7.6923076923076925).abs() < 1e-12);
        assert_eq!(pc[1].per_10m, 1.0);
        let partial: BTreeMap<String, u64> = [("SE".to_string(), 1)].into();
        assert!(matches!(
            per_capita_scores(&scores, &partial),
            Err(MergeError::MissingPopulation(cc)) if cc == "EE"
        ));
    }

    #[test]
    fn average_counts() {
        let ids: Vec<String> = (0..10).map(|k| format!("us{k}")).collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let mut rows: Vec<(&str, &str)> = refs.iter().map(|id| (*id, "US")).collect();
        rows.push(("fr", "FR"));
        let cat = catalog(&rows);
        let rankings: Vec<_> = ["EN", "FR", "DE"].iter().map(|e| ranking(e, &refs)).collect();
        let avg = per_edition_average_counts(&rankings, &cat).unwrap();
        assert_eq!(avg.average("US"), 10.0);
        assert_eq!(avg.average("FR"), 0.0);
        assert!(!avg.is_reported("FR"));
        assert!(avg.is_reported("US"));
    }

    #[test]
    fn population_csv() {
        let p = parse_population("cc,population\nee,1300000\nSE,9800000\n".as_bytes()).unwrap();
        assert_eq!(p["EE"], 1_300_000);
        assert_eq!(p.len(), 2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn editions() -> impl Strategy<Value = Vec<EditionRanking>> {
            let codes = ["EN", "FR", "DE", "IT", "JA"];
            prop::collection::vec(prop::sample::subsequence((0..30).collect::<Vec<u32>>(), 0..12).prop_shuffle(), 1..5)
                .prop_map(move |lists| {
                    lists
                        .into_iter()
                        .enumerate()
                        .map(|(e, ids)| {
                            let ids: Vec<String> = ids.iter().map(|i| format!("u{i:02}")).collect();
                            let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
                            let mut r = ranking(codes[e], &refs);
                            r.top = 12;
                            r
                        })
                        .collect()
                })
        }

        proptest! {
            #[test]
            fn permutation_invariant(mut rs in editions()) {
                let g = merge_editions(&rs).unwrap();
                rs.reverse();
                prop_assert_eq!(merge_editions(&rs).unwrap(), g);
            }

            #[test]
            fn theta_is_additive_over_edition_subsets(rs in editions()) {
                let all = merge_editions(&rs).unwrap();
                let split = rs.len() / 2;
                let mut sum: BTreeMap<String, u64> = BTreeMap::new();
                for part in [&rs[..split], &rs[split..]] {
                    if part.is_empty() { continue; }
                    for e in merge_editions(part).unwrap().entries {
                        *sum.entry(e.canonical_id).or_default() += e.theta;
                    }
                }
                for e in &all.entries {
                    prop_assert_eq!(sum[&e.canonical_id], e.theta);
                    prop_assert!(e.theta > 0 && e.theta <= 12 * rs.len() as u64);
                }
                prop_assert!(all.entries.windows(2).all(|w| w[0].theta >= w[1].theta));
            }

            #[test]
            fn promotion_never_lowers_theta(rs in editions(), pick in 0usize..100) {
                let before = merge_editions(&rs).unwrap();
                let Some((e_idx, r)) = rs.iter().enumerate().find(|(_, r)| r.entries.len() > 1) else {
                    return Ok(());
                };
                let pos = 1 + pick % (r.entries.len() - 1);
                let mut promoted = rs.clone();
                promoted[e_idx].entries.swap(pos - 1, pos);
                promoted[e_idx].entries[pos - 1].rank = pos;
                promoted[e_idx].entries[pos].rank = pos + 1;
                let id = promoted[e_idx].entries[pos - 1].canonical_id.clone();
                let after = merge_editions(&promoted).unwrap();
                let (b, a) = (before.get(&id).unwrap(), after.get(&id).unwrap());
                prop_assert_eq!(a.theta, b.theta + 1);
                prop_assert!(a.global_rank <= b.global_rank);
            }
        }
    }
}
