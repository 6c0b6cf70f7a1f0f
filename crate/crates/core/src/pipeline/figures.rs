//! The analysis stage: `figures.json`, the summary tables and one CSV per metric.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};

use crate::analysis::{
    century_distribution, country_distribution, overlap_curve, per_edition_century_matrix, rank_plane,
    roman, CenturyDistribution, CenturyMatrix, Coordinate, OverlapCurve,
};
use crate::catalog::EntityCatalog;
use crate::cultures::{build_culture_network, rank_cultures, CultureNetwork, CultureRanking, LinkMode};
use crate::extract::{Algorithm, EditionRanking};
use crate::merge::{
    country_scores, country_scores_for, per_capita_scores, per_edition_average_counts, CountryScore,
    GlobalRanking,
};
use crate::rank::RankConfig;

use super::stamp::StageOutputs;
use super::PipelineError;

/// Rows shown in the summary tables.
pub const TABLE_ROWS: usize = 10;

pub(super) struct AnalysisInputs<'a> {
    pub catalog: &'a EntityCatalog,
    pub rankings: &'a BTreeMap<Algorithm, Vec<EditionRanking>>,
    pub globals: &'a BTreeMap<Algorithm, GlobalRanking>,
    pub reference: Option<&'a [String]>,
    pub population: Option<&'a BTreeMap<String, u64>>,
    pub top: usize,
    pub rank: RankConfig,
    pub links: LinkMode,
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

fn top_slice(g: &GlobalRanking, top: usize) -> Vec<&str> {
    g.entries
        .iter()
        .filter(|e| e.global_rank <= top)
        .map(|e| e.canonical_id.as_str())
        .collect()
}

/// Sorted union of the ids listed by `rankings`.
fn distinct(rankings: &[EditionRanking]) -> Vec<&str> {
    rankings
        .iter()
        .flat_map(|r| r.ids())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

fn emit_overlap(out: &mut StageOutputs, curve: &OverlapCurve) {
    let rows = curve
        .points
        .iter()
        .map(|p| vec![p.j.to_string(), p.common.to_string(), p.eta.to_string()]);
    out.insert(
        format!("analysis/overlap_{}_{}.csv", curve.a, curve.b),
        csv_bytes(&["j", "common", "eta"], rows),
    );
}

fn overlap(
    out: &mut StageOutputs,
    curves: &mut Vec<OverlapCurve>,
    a_name: &str,
    a: &[&str],
    b_name: &str,
    b: &[&str],
    top: usize,
) -> Result<Value, PipelineError> {
    let depth = top.min(a.len()).min(b.len());
    let curve = overlap_curve(a_name, a, b_name, b, depth)?;
    emit_overlap(out, &curve);
    let value = serde_json::to_value(&curve).expect("serializable");
    curves.push(curve);
    Ok(value)
}

/// Country counts sorted by count descending, then code.
fn sorted_counts(counts: &BTreeMap<String, usize>) -> Vec<(&str, usize)> {
    let mut rows: Vec<_> = counts.iter().map(|(cc, &n)| (cc.as_str(), n)).collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    rows
}

fn countries_value(counts: &BTreeMap<String, usize>) -> Value {
    let rows = sorted_counts(counts);
    json!({
        "total": counts.values().sum::<usize>(),
        "max": rows.first().map(|(cc, n)| json!({"cc": cc, "count": n})),
        "counts": rows.iter().map(|(cc, n)| json!({"cc": cc, "count": n})).collect::<Vec<_>>(),
    })
}

fn emit_countries(out: &mut StageOutputs, name: &str, counts: &BTreeMap<String, usize>) -> Value {
    let rows = sorted_counts(counts)
        .into_iter()
        .map(|(cc, n)| vec![cc.to_string(), n.to_string()]);
    out.insert(format!("analysis/countries_{name}.csv"), csv_bytes(&["cc", "count"], rows));
    countries_value(counts)
}

fn centuries_value(d: &CenturyDistribution) -> Value {
    let rows: Vec<Value> = d
        .counts
        .iter()
        .map(|(&c, &n)| {
            json!({"century": c, "label": roman(c), "n_f": n, "n_fe": d.per_edition(c)})
        })
        .collect();
    json!({"total": d.total(), "editions": d.editions, "centuries": rows})
}

fn emit_centuries(out: &mut StageOutputs, name: &str, d: &CenturyDistribution) -> Value {
    let rows = d.counts.iter().map(|(&c, &n)| {
        vec![
            c.to_string(),
            roman(c),
            n.to_string(),
            d.per_edition(c).to_string(),
        ]
    });
    out.insert(
        format!("analysis/centuries_{name}.csv"),
        csv_bytes(&["century", "label", "n_f", "n_fe"], rows),
    );
    centuries_value(d)
}

fn emit_matrix(out: &mut StageOutputs, name: &str, m: &CenturyMatrix) -> Value {
    let mut header = vec!["edition".to_string()];
    header.extend(m.centuries.iter().map(|c| c.to_string()));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = m.editions.iter().zip(&m.counts).map(|(ed, row)| {
        std::iter::once(ed.clone())
            .chain(row.iter().map(|v| v.to_string()))
            .collect::<Vec<_>>()
    });
    out.insert(format!("analysis/century_matrix_{name}.csv"), csv_bytes(&header, rows));
    let max = m
        .max_cell()
        .map(|(ed, c, n)| json!({"edition": ed, "century": c, "count": n}));
    json!({"editions": m.editions, "centuries": m.centuries, "counts": m.counts, "max": max})
}

fn scores_value(scores: &[CountryScore]) -> Value {
    scores
        .iter()
        .map(|s| json!({"rank": s.rank, "cc": s.country, "theta_c": s.theta_c, "count": s.count}))
        .collect()
}

fn culture_value(net: &CultureNetwork, ranking: &CultureRanking) -> Value {
    let n = net.len();
    let matrix: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| net.weight(i, j)).collect()).collect();
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if net.weight(i, j) > 0 {
                edges.push(json!({
                    "src": net.codes()[j],
                    "dst": net.codes()[i],
                    "weight": net.weight(i, j),
                }));
            }
        }
    }
    json!({
        "codes": net.codes(),
        "matrix": matrix,
        "edges": edges,
        "nodes": ranking.plane,
    })
}

/// `ARWU rank − list rank`, signed; empty when the list does not hold the entity.
fn rank_shift(reference_rank: usize, g: Option<&GlobalRanking>, id: &str) -> String {
    match g.and_then(|g| g.get(id)) {
        Some(e) => {
            let d = reference_rank as i64 - e.global_rank as i64;
            if d > 0 {
                format!("+{d}")
            } else {
                d.to_string()
            }
        }
        None => String::new(),
    }
}

pub(super) fn build(inp: &AnalysisInputs) -> Result<(StageOutputs, Value), PipelineError> {
    let mut out = StageOutputs::default();
    let mut figs = Map::new();
    let mut curves = Vec::new();
    let top = inp.top;
    let cat = inp.catalog;
    let pr = inp.globals.get(&Algorithm::PageRank);
    let cr = inp.globals.get(&Algorithm::CheiRank);
    let td = inp.globals.get(&Algorithm::TwoDRank);
    let reference: Option<Vec<&str>> = inp
        .reference
        .map(|r| r.iter().take(top).map(String::as_str).collect());
    let pr_lists = inp.rankings.get(&Algorithm::PageRank);
    let cr_lists = inp.rankings.get(&Algorithm::CheiRank);

    if let (Some(arwu), Some(pr)) = (&reference, pr) {
        let mut fig = Vec::new();
        fig.push(overlap(&mut out, &mut curves, "ARWU", arwu, "WPRWU", &top_slice(pr, top), top)?);
        for r in pr_lists.into_iter().flatten() {
            let ids: Vec<&str> = r.ids().collect();
            fig.push(overlap(&mut out, &mut curves, "ARWU", arwu, &r.edition, &ids, top)?);
        }
        figs.insert("fig1".into(), json!({"curves": fig}));
    }

    let named: Vec<(&str, Vec<&str>)> = [
        (Algorithm::TwoDRank, td),
        (Algorithm::PageRank, pr),
        (Algorithm::CheiRank, cr),
    ]
    .into_iter()
    .filter_map(|(a, g)| g.map(|g| (a.global_list_name(), top_slice(g, top))))
    .collect();
    let mut fig2 = Vec::new();
    let pairs = [("W2RWU", "ARWU"), ("W2RWU", "WPRWU"), ("W2RWU", "WCRWU"), ("WPRWU", "WCRWU")];
    for (a, b) in pairs {
        let find = |name: &str| -> Option<&Vec<&str>> {
            if name == "ARWU" {
                reference.as_ref()
            } else {
                named.iter().find(|(n, _)| *n == name).map(|(_, ids)| ids)
            }
        };
        if let (Some(x), Some(y)) = (find(a), find(b)) {
            fig2.push(overlap(&mut out, &mut curves, a, x, b, y, top)?);
        }
    }
    if !fig2.is_empty() {
        figs.insert("fig2".into(), json!({"curves": fig2}));
    }

    if let (Some(pr), Some(cr)) = (pr, cr) {
        let span = pr.entries.len().max(cr.entries.len());
        let plane = rank_plane(pr, cr, span);
        let reference_rank = |id: &str| {
            inp.reference
                .and_then(|r| r.iter().position(|x| x == id))
                .filter(|&k| k < top)
                .map(|k| k + 1)
        };
        let rows = plane.iter().map(|p| {
            vec![
                p.canonical_id.clone(),
                p.k.to_string(),
                p.k_star.to_string(),
                reference_rank(&p.canonical_id).map_or(String::new(), |k| k.to_string()),
            ]
        });
        out.insert(
            "analysis/plane.csv",
            csv_bytes(&["canonical_id", "k", "k_star", "arwu_rank"], rows),
        );
        let points: Vec<Value> = plane
            .iter()
            .map(|p| {
                json!({
                    "canonical_id": p.canonical_id,
                    "k": p.k,
                    "k_star": p.k_star,
                    "arwu_rank": reference_rank(&p.canonical_id),
                })
            })
            .collect();
        let diagonal = plane
            .iter()
            .filter(|p| p.k == p.k_star && p.k != Coordinate::Beyond)
            .count();
        figs.insert("fig3".into(), json!({"points": points, "on_diagonal": diagonal}));
    }

    let mut fig4 = Map::new();
    let mut fig7 = Map::new();
    let mut fig12 = Map::new();
    let mut fig8 = Map::new();
    let mut score_tables: BTreeMap<&str, Vec<CountryScore>> = BTreeMap::new();
    let mut slices: Vec<(&str, &str, Vec<&str>)> = Vec::new();
    if let Some(g) = pr {
        slices.push(("A", "WPRWU", top_slice(g, top)));
        score_tables.insert("WPRWU", country_scores(g, cat, top)?);
    }
    if let Some(g) = td {
        slices.push(("B", "W2RWU", top_slice(g, top)));
    }
    if let Some(arwu) = &reference {
        slices.push(("C", "ARWU", arwu.clone()));
        score_tables.insert("ARWU", country_scores_for(arwu.iter().copied(), cat, top)?);
    }
    for (panel, name, ids) in &slices {
        let counts = country_distribution(ids.iter().copied(), cat, None)?;
        let value = emit_countries(&mut out, name, &counts);
        fig4.insert(panel.to_string(), json!({"list": name, "countries": value}));
        let d = century_distribution(ids.iter().copied(), cat, 1)?;
        let value = emit_centuries(&mut out, name, &d);
        fig12.insert(panel.to_string(), json!({"list": name, "centuries": value}));
        if *name != "W2RWU" {
            let panel7 = if *name == "WPRWU" { "A" } else { "B" };
            fig7.insert(panel7.into(), json!({"list": name, "countries": countries_value(&counts)}));
        }
    }
    if let Some(lists) = pr_lists {
        let avg = per_edition_average_counts(lists, cat)?;
        let rows: Vec<Value> = avg
            .rows()
            .into_iter()
            .filter(|r| r.2)
            .map(|(cc, a, _)| json!({"cc": cc, "average": a}))
            .collect();
        fig4.insert("D".into(), json!({"editions": avg.editions, "averages": rows}));
    }
    if !fig4.is_empty() {
        figs.insert("fig4".into(), Value::Object(fig4));
    }
    if !fig7.is_empty() {
        figs.insert("fig7".into(), Value::Object(fig7));
    }
    if !fig12.is_empty() {
        figs.insert("fig12".into(), Value::Object(fig12));
    }

    if let Some(pop) = inp.population {
        for (name, scores) in &score_tables {
            let rows = per_capita_scores(scores, pop)?;
            let csv = csv_bytes(
                &["cc", "per_10M"],
                rows.iter().map(|r| vec![r.country.clone(), r.per_10m.to_string()]),
            );
            out.insert(format!("analysis/per_capita_{name}.csv"), csv);
            let value: Vec<Value> = rows
                .iter()
                .map(|r| json!({"cc": r.country, "per_10M": r.per_10m}))
                .collect();
            fig8.insert(name.to_string(), Value::Array(value));
        }
        if !fig8.is_empty() {
            figs.insert("fig8".into(), Value::Object(fig8));
        }
    }

    for (key, name, lists) in [("fig5", "PR_all", pr_lists), ("fig6", "CR_all", cr_lists)] {
        if let Some(lists) = lists {
            let ids = distinct(lists);
            let counts = country_distribution(ids.iter().copied(), cat, None)?;
            figs.insert(key.into(), emit_countries(&mut out, name, &counts));
        }
    }
    if let Some(lists) = pr_lists {
        let ids = distinct(lists);
        for (key, name, before) in [("fig9", "PR_all_before_20", 20), ("fig10", "PR_all_before_19", 19)] {
            let counts = country_distribution(ids.iter().copied(), cat, Some(before))?;
            let mut value = emit_countries(&mut out, name, &counts);
            value["founded_before_century"] = json!(before);
            figs.insert(key.into(), value);
        }
        let d = century_distribution(ids.iter().copied(), cat, lists.len())?;
        figs.insert("fig11".into(), emit_centuries(&mut out, "PR_all", &d));
    }
    for (key, alg, lists) in [
        ("fig13", Algorithm::PageRank, pr_lists),
        ("fig14", Algorithm::CheiRank, cr_lists),
    ] {
        if let Some(lists) = lists {
            let m = per_edition_century_matrix(lists, cat)?;
            figs.insert(key.into(), emit_matrix(&mut out, alg.as_str(), &m));
        }
    }

    let mut fig17 = Map::new();
    for (key, panel, lists) in [("fig15", "A", pr_lists), ("fig16", "B", cr_lists)] {
        if let Some(lists) = lists {
            let net = build_culture_network(lists, cat)?;
            let ranking = rank_cultures(&net, &inp.rank, inp.links)?;
            figs.insert(key.into(), culture_value(&net, &ranking));
            fig17.insert(panel.into(), serde_json::to_value(&ranking.plane).expect("serializable"));
        }
    }
    if !fig17.is_empty() {
        figs.insert("fig17".into(), Value::Object(fig17));
    }

    for (table, alg) in [
        ("table3", Algorithm::PageRank),
        ("table4", Algorithm::CheiRank),
        ("table5", Algorithm::TwoDRank),
    ] {
        if let Some(g) = inp.globals.get(&alg) {
            let rows = g.entries.iter().take(TABLE_ROWS).map(|e| {
                let name = cat.get(&e.canonical_id).map_or(e.canonical_id.clone(), |x| x.display_name.clone());
                vec![e.global_rank.to_string(), name, e.theta.to_string(), e.appearances.to_string()]
            });
            out.insert(
                format!("analysis/{table}.csv"),
                csv_bytes(&["rank", alg.global_list_name(), "theta", "appearances"], rows),
            );
        }
    }
    if let Some(arwu) = &reference {
        let rows = arwu.iter().take(TABLE_ROWS).enumerate().map(|(k, id)| {
            let name = cat.get(id).map_or(id.to_string(), |x| x.display_name.clone());
            vec![
                (k + 1).to_string(),
                name,
                rank_shift(k + 1, pr, id),
                rank_shift(k + 1, cr, id),
                rank_shift(k + 1, td, id),
            ]
        });
        out.insert(
            "analysis/table6.csv",
            csv_bytes(&["rank", "ARWU", "WPRWU", "WCRWU", "W2RWU"], rows),
        );
    }
    if !score_tables.is_empty() {
        let left = score_tables.get("WPRWU");
        let right = score_tables.get("ARWU");
        let len = left.map_or(0, Vec::len).max(right.map_or(0, Vec::len)).min(TABLE_ROWS);
        let cells = |s: Option<&Vec<CountryScore>>, k: usize| -> Vec<String> {
            match s.and_then(|s| s.get(k)) {
                Some(c) => vec![c.rank.to_string(), c.country.clone(), c.theta_c.to_string(), c.count.to_string()],
                None => vec![String::new(); 4],
            }
        };
        let rows = (0..len).map(|k| {
            let mut row = cells(left, k);
            row.extend(cells(right, k));
            row
        });
        out.insert(
            "analysis/table7.csv",
            csv_bytes(
                &[
                    "rank_wprwu", "cc_wprwu", "theta_c_wprwu", "count_wprwu",
                    "rank_arwu", "cc_arwu", "theta_c_arwu", "count_arwu",
                ],
                rows,
            ),
        );
        let mut table7 = Map::new();
        for (name, scores) in &score_tables {
            table7.insert(name.to_string(), scores_value(scores));
        }
        figs.insert("table7".into(), Value::Object(table7));
    }

    let report_rows = curves.iter().map(|c| {
        let depth = c.points.len();
        vec![
            c.a.clone(),
            c.b.clone(),
            depth.to_string(),
            c.eta(TABLE_ROWS).map_or(String::new(), |e| e.to_string()),
            c.eta(depth).map_or(String::new(), |e| e.to_string()),
        ]
    });
    out.insert(
        "analysis/overlap_report.csv",
        csv_bytes(&["a", "b", "depth", "eta_10", "eta_depth"], report_rows),
    );

    let keys: Vec<String> = figs.keys().cloned().collect();
    let mut bundle = serde_json::to_vec_pretty(&Value::Object(figs)).expect("serializable");
    bundle.push(b'\n');
    out.insert("analysis/figures.json", bundle);

    let summary: Vec<Value> = curves
        .iter()
        .map(|c| {
            json!({
                "a": c.a,
                "b": c.b,
                "depth": c.points.len(),
                "eta_10": c.eta(TABLE_ROWS),
                "eta_depth": c.eta(c.points.len()),
            })
        })
        .collect();
    Ok((out, json!({"sections": keys, "overlaps": summary})))
}
