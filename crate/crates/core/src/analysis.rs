//! Comparative, geographic and temporal statistics over ranked lists.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::catalog::{century_of, EntityCatalog};
use crate::extract::EditionRanking;
use crate::merge::GlobalRanking;

/// Centuries always present in century histograms.
pub const FIRST_CENTURY: u32 = 11;
pub const LAST_CENTURY: u32 = 21;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("list `{list}` repeats `{id}`")]
    Duplicate { list: String, id: String },
    #[error("overlap depth {depth} exceeds list `{list}` of length {len}")]
    TooShort { list: String, depth: usize, len: usize },
    #[error("{} entit(ies) missing from the catalog: {}", .0.len(), .0.join(", "))]
    Unresolved(Vec<String>),
    #[error("number of editions must be positive")]
    NoEditions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapPoint {
    pub j: usize,
    /// `j_c`, items common to both top-`j` slices.
    pub common: usize,
    /// `η = j_c / j`.
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapCurve {
    pub a: String,
    pub b: String,
    pub points: Vec<OverlapPoint>,
}

impl OverlapCurve {
    /// `η(j)`, 1-based.
    pub fn eta(&self, j: usize) -> Option<f64> {
        self.points.get(j.checked_sub(1)?).map(|p| p.eta)
    }
}

fn check_unique<S: AsRef<str>>(name: &str, list: &[S]) -> Result<(), AnalysisError> {
    let mut seen = HashSet::new();
    for id in list {
        if !seen.insert(id.as_ref()) {
            return Err(AnalysisError::Duplicate {
                list: name.to_string(),
                id: id.as_ref().to_string(),
            });
        }
    }
    Ok(())
}

/// `η(j) = |top_j(a) ∩ top_j(b)| / j` for `j = 1..=depth`.
pub fn overlap_curve<S: AsRef<str>>(
    a_name: &str,
    a: &[S],
    b_name: &str,
    b: &[S],
    depth: usize,
) -> Result<OverlapCurve, AnalysisError> {
    check_unique(a_name, a)?;
    check_unique(b_name, b)?;
    for (name, len) in [(a_name, a.len()), (b_name, b.len())] {
        if depth > len {
            return Err(AnalysisError::TooShort {
                list: name.to_string(),
                depth,
                len,
            });
        }
    }
    let mut seen_a = HashSet::new();
    let mut seen_b = HashSet::new();
    let mut common = 0usize;
    let mut points = Vec::with_capacity(depth);
    for j in 1..=depth {
        let (x, y) = (a[j - 1].as_ref(), b[j - 1].as_ref());
        seen_a.insert(x);
        if seen_b.contains(x) {
            common += 1;
        }
        seen_b.insert(y);
        if seen_a.contains(y) {
            common += 1;
        }
        points.push(OverlapPoint {
            j,
            common,
            eta: common as f64 / j as f64,
        });
    }
    Ok(OverlapCurve {
        a: a_name.to_string(),
        b: b_name.to_string(),
        points,
    })
}

/// One axis of the `(K_U, K*_U)` plane; entities outside the plotted slice
/// of an axis sit `Beyond` it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Coordinate {
    Rank(usize),
    Beyond,
}

impl Serialize for Coordinate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Coordinate::Rank(k) => s.serialize_u64(*k as u64),
            Coordinate::Beyond => s.serialize_str("beyond"),
        }
    }
}

impl std::fmt::Display for Coordinate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Coordinate::Rank(k) => write!(f, "{k}"),
            Coordinate::Beyond => f.write_str("beyond"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanePoint {
    pub canonical_id: String,
    pub k: Coordinate,
    pub k_star: Coordinate,
}

/// Joins the PageRank and CheiRank world lists over the union of their
/// top-`top` slices. Sorted by `K_U`, then `K*_U`, then id.
pub fn rank_plane(pr_global: &GlobalRanking, cr_global: &GlobalRanking, top: usize) -> Vec<PlanePoint> {
    let slice = |g: &GlobalRanking| -> BTreeMap<String, usize> {
        g.entries
            .iter()
            .filter(|e| e.global_rank <= top)
            .map(|e| (e.canonical_id.clone(), e.global_rank))
            .collect()
    };
    let (pr, cr) = (slice(pr_global), slice(cr_global));
    let ids: BTreeSet<&String> = pr.keys().chain(cr.keys()).collect();
    let coord = |m: &BTreeMap<String, usize>, id: &String| {
        m.get(id).map_or(Coordinate::Beyond, |&k| Coordinate::Rank(k))
    };
    let mut points: Vec<PlanePoint> = ids
        .into_iter()
        .map(|id| PlanePoint {
            canonical_id: id.clone(),
            k: coord(&pr, id),
            k_star: coord(&cr, id),
        })
        .collect();
    points.sort_by(|a, b| {
        (a.k, a.k_star, &a.canonical_id).cmp(&(b.k, b.k_star, &b.canonical_id))
    });
    points
}

fn empty_century_axis() -> BTreeMap<u32, usize> {
    (FIRST_CENTURY..=LAST_CENTURY).map(|c| (c, 0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenturyDistribution {
    /// `N_f` per foundation century; centuries 11..=21 always present.
    pub counts: BTreeMap<u32, usize>,
    pub editions: usize,
}

impl CenturyDistribution {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn count(&self, century: u32) -> usize {
        self.counts.get(&century).copied().unwrap_or(0)
    }

    /// `N_fe = N_f / editions`.
    pub fn per_edition(&self, century: u32) -> f64 {
        self.count(century) as f64 / self.editions as f64
    }
}

fn resolve_all<'c, 'a, I>(
    entities: I,
    catalog: &'c EntityCatalog,
) -> Result<Vec<&'c crate::catalog::Entity>, AnalysisError>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut out = Vec::new();
    let mut missing = BTreeSet::new();
    for id in entities {
        match catalog.get(id) {
            Some(e) => out.push(e),
            None => {
                missing.insert(id.to_string());
            }
        }
    }
    if missing.is_empty() {
        Ok(out)
    } else {
        Err(AnalysisError::Unresolved(missing.into_iter().collect()))
    }
}

/// Histogram of foundation centuries over `entities` (multiplicity counts).
pub fn century_distribution<'a, I>(
    entities: I,
    catalog: &EntityCatalog,
    editions: usize,
) -> Result<CenturyDistribution, AnalysisError>
where
    I: IntoIterator<Item = &'a str>,
{
    if editions == 0 {
        return Err(AnalysisError::NoEditions);
    }
    let mut counts = empty_century_axis();
    for e in resolve_all(entities, catalog)? {
        *counts.entry(e.foundation_century()).or_default() += 1;
    }
    Ok(CenturyDistribution { counts, editions })
}

/// Universities per country, optionally only those founded before
/// `before_century` (e.g. 20 keeps centuries up to 19). Zero counts are omitted.
pub fn country_distribution<'a, I>(
    entities: I,
    catalog: &EntityCatalog,
    before_century: Option<u32>,
) -> Result<BTreeMap<String, usize>, AnalysisError>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counts = BTreeMap::new();
    for e in resolve_all(entities, catalog)? {
        if before_century.is_some_and(|c| e.foundation_century() >= c) {
            continue;
        }
        *counts.entry(e.country.clone()).or_default() += 1;
    }
    Ok(counts)
}

/// Edition × century table of listed universities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CenturyMatrix {
    pub editions: Vec<String>,
    pub centuries: Vec<u32>,
    /// `counts[e][c]` for `editions[e]`, `centuries[c]`.
    pub counts: Vec<Vec<usize>>,
}

impl CenturyMatrix {
    pub fn get(&self, edition: &str, century: u32) -> usize {
        let e = self.editions.iter().position(|x| x == edition);
        let c = self.centuries.iter().position(|&x| x == century);
        match (e, c) {
            (Some(e), Some(c)) => self.counts[e][c],
            _ => 0,
        }
    }

    /// Largest cell as `(edition, century, count)`; first in row-major order on ties.
    pub fn max_cell(&self) -> Option<(&str, u32, usize)> {
        let mut best: Option<(&str, u32, usize)> = None;
        for (e, row) in self.counts.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if best.is_none_or(|b| v > b.2) {
                    best = Some((&self.editions[e], self.centuries[c], v));
                }
            }
        }
        best
    }
}

pub fn per_edition_century_matrix(
    rankings: &[EditionRanking],
    catalog: &EntityCatalog,
) -> Result<CenturyMatrix, AnalysisError> {
    let mut per_edition: BTreeMap<String, BTreeMap<u32, usize>> = BTreeMap::new();
    let mut axis = empty_century_axis();
    let mut missing = BTreeSet::new();
    for r in rankings {
        let row = per_edition.entry(r.edition.clone()).or_default();
        for e in &r.entries {
            match catalog.get(&e.canonical_id) {
                Some(entity) => {
                    let c = entity.foundation_century();
                    *row.entry(c).or_default() += 1;
                    axis.entry(c).or_default();
                }
                None => {
                    missing.insert(e.canonical_id.clone());
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(AnalysisError::Unresolved(missing.into_iter().collect()));
    }
    let centuries: Vec<u32> = axis.into_keys().collect();
    let (editions, counts) = per_edition
        .into_iter()
        .map(|(ed, row)| {
            let cells = centuries.iter().map(|c| row.get(c).copied().unwrap_or(0)).collect();
            (ed, cells)
        })
        .unzip();
    Ok(CenturyMatrix {
        editions,
        centuries,
        counts,
    })
}

/// Sorted union of the canonical ids listed by `rankings`.
pub fn distinct_entities(rankings: &[EditionRanking]) -> Vec<String> {
    rankings
        .iter()
        .flat_map(|r| r.ids())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_string)
        .collect()
}

/// Every listed canonical id, once per edition that lists it.
pub fn all_listings(rankings: &[EditionRanking]) -> Vec<&str> {
    rankings.iter().flat_map(|r| r.ids()).collect()
}

/// Upper-case Roman numeral, for century labels.
pub fn roman(mut n: u32) -> String {
    const TABLE: [(u32, &str); 13] = [
        (1000, "M"),
        (900, "CM"),
        (500, "D"),
        (400, "CD"),
        (100, "C"),
        (90, "XC"),
        (50, "L"),
        (40, "XL"),
        (10, "X"),
        (9, "IX"),
        (5, "V"),
        (4, "IV"),
        (1, "I"),
    ];
    let mut out = String::new();
    for (value, glyph) in TABLE {
        while n >= value {
            out.push_str(glyph);
            n -= value;
        }
    }
    out
}

/// Foundation century of a year, as a Roman numeral.
pub fn century_label(year: i32) -> String {
    roman(century_of(year))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Entity;
    use crate::extract::{Algorithm, RankedEntity};
    use crate::merge::GlobalEntry;

    fn catalog(rows: &[(&str, &str, i32)]) -> EntityCatalog {
        EntityCatalog::from_entities(
            rows.iter()
                .map(|(id, cc, year)| Entity {
                    canonical_id: id.to_string(),
                    display_name: id.to_string(),
                    titles: Default::default(),
                    country: cc.to_string(),
                    language: crate::catalog::country_language(cc).unwrap().to_string(),
                    foundation_year: *year,
                })
                .collect(),
        )
        .unwrap()
    }

    fn global(ids: &[&str]) -> GlobalRanking {
        GlobalRanking {
            algorithm: Algorithm::PageRank,
            top: 100,
            editions_used: vec![],
            entries: ids
                .iter()
                .enumerate()
                .map(|(k, id)| GlobalEntry {
                    canonical_id: id.to_string(),
                    theta: 1000 - k as u64,
                    appearances: 1,
                    global_rank: k + 1,
                })
                .collect(),
        }
    }

    #[test]
    fn identical_and_disjoint_overlap() {
        let a = ["a", "b", "c", "d"];
        let same = overlap_curve("a", &a, "b", &a, 4).unwrap();
        assert!(same.points.iter().all(|p| p.eta == 1.0));
        let b = ["w", "x", "y", "z"];
        let none = overlap_curve("a", &a, "b", &b, 4).unwrap();
        assert!(none.points.iter().all(|p| p.eta == 0.0));
    }

    #[test]
    fn overlap_counts_cross_positions() {
        let a = ["a", "b", "c"];
        let b = ["b", "a", "d"];
        let c = overlap_curve("a", &a, "b", &b, 3).unwrap();
        let common: Vec<_> = c.points.iter().map(|p| p.common).collect();
        assert_eq!(common, vec![0, 2, 2]);
        assert_eq!(c.eta(2), Some(1.0));
        assert_eq!(c.eta(0), None);
    }

    #[test]
    fn overlap_errors() {
        assert!(matches!(
            overlap_curve("a", &["x", "x"], "b", &["y", "z"], 2),
            Err(AnalysisError::Duplicate { .. })
        ));
        assert!(matches!(
            overlap_curve("a", &["x"], "b", &["y", "z"], 2),
            Err(AnalysisError::TooShort { .. })
        ));
    }

    #[test]
    fn plane_join() {
        let pr = global(&["oxford", "cambridge", "harvard"]);
        let cr = global(&["oxford", "yale", "cambridge"]);
        let plane = rank_plane(&pr, &cr, 2);
        let got: Vec<_> = plane
            .iter()
            .map(|p| (p.canonical_id.as_str(), p.k, p.k_star))
            .collect();
        assert_eq!(
            got,
            vec![
                ("oxford", Coordinate::Rank(1), Coordinate::Rank(1)),
                ("cambridge", Coordinate::Rank(2), Coordinate::Beyond),
                ("yale", Coordinate::Beyond, Coordinate::Rank(2)),
            ]
        );
        assert_eq!(serde_json::to_string(&plane[1].k_star).unwrap(), "\"beyond\"");
    }

    #[test]
    fn centuries() {
        let cat = catalog(&[
            ("tartu", "EE", 1632),
            ("oxford", "UK", 1096),
            ("bologna", "IT", 1088),
            ("qarawiyyin", "MA", 859),
        ]);
        let d = century_distribution(["tartu"], &cat, 1).unwrap();
        assert_eq!(d.count(17), 1);
        assert_eq!(d.total(), 1);
        let d = century_distribution(["oxford", "bologna", "oxford"], &cat, 2).unwrap();
        assert_eq!(d.count(11), 3);
        assert_eq!(d.per_edition(11), 1.5);
        assert_eq!(d.counts.len(), 11);
        let early = century_distribution(["qarawiyyin"], &cat, 1).unwrap();
        assert_eq!(early.count(9), 1);
        assert_eq!(early.counts.len(), 12);
        assert!(matches!(
            century_distribution(["nowhere"], &cat, 1),
            Err(AnalysisError::Unresolved(_))
        ));
        assert_eq!(century_label(1096), "XI");
        assert_eq!(roman(19), "XIX");
    }

    #[test]
    fn countries_with_filter() {
        let cat = catalog(&[("a", "US", 1636), ("b", "US", 1965), ("c", "DE", 1386)]);
        assert!(country_distribution(std::iter::empty(), &cat, None).unwrap().is_empty());
        let all = country_distribution(["a", "b", "c", "a"], &cat, None).unwrap();
        assert_eq!(all["US"], 3);
        let old = country_distribution(["a", "b", "c", "a"], &cat, Some(20)).unwrap();
        assert_eq!(old["US"], 2);
        let older = country_distribution(["a", "b", "c"], &cat, Some(15)).unwrap();
        assert_eq!(older.get("US"), None);
        assert_eq!(older["DE"], 1);
    }

    #[test]
    fn single_edition_matrix() {
        let cat = catalog(&[("a", "US", 1850), ("b", "US", 1890)]);
        let r = EditionRanking {
            edition: "EN".into(),
            algorithm: Algorithm::PageRank,
            top: 10,
            entries: ["a", "b"]
                .iter()
                .enumerate()
                .map(|(k, id)| RankedEntity {
                    rank: k + 1,
                    canonical_id: id.to_string(),
                    title: String::new(),
                    node: 0,
                    node_rank: k + 1,
                })
                .collect(),
        };
        let m = per_edition_century_matrix(&[r], &cat).unwrap();
        let nonzero: Vec<_> = m.counts[0].iter().filter(|&&v| v > 0).collect();
        assert_eq!(nonzero, vec![&2]);
        assert_eq!(m.get("EN", 19), 2);
        assert_eq!(m.max_cell(), Some(("EN", 19, 2)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn two_lists() -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
            (
                prop::sample::subsequence((0u8..40).collect::<Vec<_>>(), 20).prop_shuffle(),
                prop::sample::subsequence((0u8..40).collect::<Vec<_>>(), 20).prop_shuffle(),
            )
        }

        proptest! {
            #[test]
            fn overlap_is_symmetric_and_matches_sets((a, b) in two_lists()) {
                let a: Vec<String> = a.iter().map(|x| x.to_string()).collect();
                let b: Vec<String> = b.iter().map(|x| x.to_string()).collect();
                let ab = overlap_curve("a", &a, "b", &b, 20).unwrap();
                let ba = overlap_curve("b", &b, "a", &a, 20).unwrap();
                prop_assert_eq!(&ab.points, &ba.points);
                let mut prev = 0;
                for p in &ab.points {
                    let sa: HashSet<_> = a[..p.j].iter().collect();
                    let brute = b[..p.j].iter().filter(|x| sa.contains(x)).count();
                    prop_assert_eq!(p.common, brute);
                    prop_assert!(p.common >= prev && p.common - prev <= 2);
                    prop_assert!((0.0..=1.0).contains(&p.eta));
                    prev = p.common;
                }
            }
        }
    }
}
