//! Structured reports.
//!
//! Every report is built as a JSON value first; the text form is a
//! line-per-leaf flattening of that value, so both carry the same numbers.

use std::collections::BTreeSet;

use serde_json::{json, Map, Value};

use crate::forcing::{
    best_entropy_bound, entropy_lower_bound, forced_period_threshold, is_ap_number,
    misiurewicz_threshold, zero_entropy_admissible, ForcingError,
};
use crate::pattern::Pattern;
use crate::plmap::{
    connect_the_dots, enumerate_periods, find_fixed_point, spectral_radius, PLTreeMap,
    PeriodEnumeration, PeriodicWitness, PlMapError, Point,
};
use crate::snowflake::{all_chains, decompose, Decomposition};
use crate::synthesis::{synth_snowflake_map, SynthesizedMap, Verification};
use crate::tree::{reduce, Tree};

/// A finished report and whether any period search ran out of budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub value: Value,
    pub budget_exceeded: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.value).expect("values serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        render_text(&self.value)
    }
}

/// Flattens a value into `path: scalar` lines; arrays of scalars stay on one
/// line.
pub fn render_text(value: &Value) -> String {
    let mut out = String::new();
    flatten("", value, &mut out);
    out
}

fn flatten(prefix: &str, value: &Value, out: &mut String) {
    let join = |key: &str| {
        if prefix.is_empty() {
            key.to_string()
        } else {
            format!("{prefix}.{key}")
        }
    };
    match value {
        Value::Object(map) if !map.is_empty() => {
            for (k, v) in map {
                flatten(&join(k), v, out);
            }
        }
        Value::Array(items) if items.iter().any(|v| v.is_object() || v.is_array()) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), v, out);
            }
        }
        _ => {
            out.push_str(prefix);
            out.push_str(": ");
            out.push_str(&value.to_string());
            out.push('\n');
        }
    }
}

fn point_json(tree: &Tree, p: &Point) -> Value {
    match p {
        Point::Node(v) => json!({ "node": tree.label(*v) }),
        Point::Edge { edge, t } => {
            let (u, v) = tree.edge(*edge);
            json!({ "edge": [tree.label(u), tree.label(v)], "t": t.to_string() })
        }
    }
}

fn witness_json(tree: &Tree, w: &PeriodicWitness) -> Value {
    let edges: Vec<Value> = w
        .loop_edges
        .iter()
        .map(|&e| {
            let (u, v) = tree.edge(e);
            json!([tree.label(u), tree.label(v)])
        })
        .collect();
    json!({ "period": w.period, "point": point_json(tree, &w.point), "loop": edges })
}

fn periods_json(tree: &Tree, found: &PeriodEnumeration) -> Value {
    json!({
        "cutoff": found.cutoff,
        "periods": found.periods(),
        "budget_exceeded": found.budget_exceeded,
        "witnesses": found.witnesses.values().map(|w| witness_json(tree, w)).collect::<Vec<_>>(),
    })
}

fn shape_json(tree: &Tree) -> Value {
    let s = reduce(tree);
    json!({ "nodes": tree.node_count(), "end": s.end_count, "edg": s.edge_count })
}

fn forcing_json(n: u64, end: u64, edg: u64) -> Value {
    if end < 2 {
        return json!({ "applicable": false });
    }
    let best = best_entropy_bound(n, end)
        .map(|b| json!({ "value": b.value, "ap_factor": b.ap_factor, "cofactor": b.cofactor }));
    json!({
        "applicable": true,
        "ap_number": is_ap_number(n, end),
        "forced_period_threshold": forced_period_threshold(n, end).ok(),
        "entropy_lower_bound": entropy_lower_bound(n, end).ok(),
        "best_entropy_bound": best,
        "misiurewicz_threshold": misiurewicz_threshold(end).ok(),
        "zero_entropy_admissible": zero_entropy_admissible(n, end, edg),
    })
}

fn snowflake_json(pattern: &Pattern) -> Value {
    match decompose(pattern) {
        Decomposition::Snowflake(t) => json!({
            "is_snowflake": true,
            "type": t.levels(),
            "ratios": t.ratios(),
            "valid_chains": all_chains(pattern).len(),
        }),
        Decomposition::NotSnowflake { attempts } => json!({
            "is_snowflake": false,
            "attempts": attempts,
        }),
    }
}

fn verification_json(tree: &Tree, v: &Verification) -> Value {
    json!({
        "cutoff": v.cutoff,
        "expected_periods": v.expected_periods,
        "found": periods_json(tree, &v.found),
        "radius": v.radius.value,
        "radius_at_most_one": v.radius.at_most_one,
        "declared_entropy_zero": v.declared_entropy_zero,
        "orbit_preserved": v.orbit_preserved,
        "passed": v.passed(),
    })
}

fn model_json(model: &PLTreeMap, found: &PeriodEnumeration, tol: f64) -> Result<Value, PlMapError> {
    let tree = model.domain();
    let radius = spectral_radius(&model.transition_matrix(), tol)?;
    let fixed = find_fixed_point(model)?;
    Ok(json!({
        "transition_matrix": model.transition_matrix(),
        "radius": radius.value,
        "radius_at_most_one": radius.at_most_one,
        "radius_agrees": radius.agrees(tol),
        "fixed_point": point_json(tree, &fixed.point),
        "periods": periods_json(tree, found),
    }))
}

/// Full analysis of a pattern inside its ambient tree.
pub fn analyze(
    pattern: &Pattern,
    ambient: &Tree,
    cutoff: u64,
    tol: f64,
    budget: u64,
) -> Result<Report, PlMapError> {
    let n = pattern.period() as u64;
    let amb = reduce(ambient);
    let model = connect_the_dots(pattern);
    let found = enumerate_periods(&model, cutoff, budget)?;
    let mut budget_exceeded = !found.is_complete();
    let mut value = Map::new();
    value.insert(
        "pattern".into(),
        json!({
            "period": n,
            "ambient": shape_json(ambient),
            "hull": shape_json(pattern.tree()),
        }),
    );
    value.insert("snowflake".into(), snowflake_json(pattern));
    value.insert(
        "forcing".into(),
        forcing_json(n, amb.end_count as u64, amb.edge_count as u64),
    );
    value.insert("model".into(), model_json(&model, &found, tol)?);
    let synthesis = match synth_snowflake_map(pattern, ambient) {
        Ok(s) => {
            let v = s.verify(2 * n, tol, budget)?;
            budget_exceeded |= !v.found.is_complete();
            verification_json(s.map.domain(), &v)
        }
        Err(e) => json!({ "available": false, "reason": e.to_string() }),
    };
    value.insert("synthesis".into(), synthesis);
    Ok(Report {
        value: Value::Object(value),
        budget_exceeded,
    })
}

/// Forcing numbers for a tree with the given reduced counts, listed up to
/// `bound`.
pub fn thresholds(end: u64, edg: u64, bound: u64) -> Result<Report, ForcingError> {
    let l = misiurewicz_threshold(end)?;
    if edg == 0 {
        return Err(ForcingError::NonPositive(edg));
    }
    let ap: Vec<u64> = (1..=bound).filter(|&n| is_ap_number(n, end)).collect();
    let forced: Vec<Value> = ap
        .iter()
        .map(|&n| {
            json!({
                "n": n,
                "forced_period_threshold": forced_period_threshold(n, end).ok(),
                "entropy_lower_bound": entropy_lower_bound(n, end).ok(),
            })
        })
        .collect();
    let admissible: BTreeSet<u64> = (1..=bound)
        .filter(|&n| zero_entropy_admissible(n, end, edg))
        .collect();
    Ok(Report {
        value: json!({
            "end": end,
            "edg": edg,
            "bound": bound,
            "misiurewicz_threshold": l,
            "ap_numbers": ap,
            "forced": forced,
            "admissible_periods": admissible,
        }),
        budget_exceeded: false,
    })
}

/// Report on a synthesized map after re-verification.
pub fn synthesized(
    kind: &str,
    s: &SynthesizedMap,
    v: &Verification,
    pattern: Option<&Pattern>,
) -> Report {
    let tree = s.map.domain();
    let mut value = Map::new();
    value.insert("kind".into(), json!(kind));
    value.insert(
        "map".into(),
        json!({ "nodes": tree.node_count(), "edges": tree.edge_count() }),
    );
    value.insert(
        "declared".into(),
        json!({ "periods": s.declared_periods, "entropy_zero": s.declared_entropy_zero }),
    );
    if let Some(p) = pattern {
        let orbit: Vec<&str> = s.orbit.iter().map(|&v| tree.label(v)).collect();
        value.insert("orbit".into(), json!(orbit));
        value.insert("snowflake".into(), snowflake_json(p));
    }
    value.insert("verification".into(), verification_json(tree, v));
    Report {
        value: Value::Object(value),
        budget_exceeded: !v.found.is_complete(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plmap::DEFAULT_BUDGET;

    #[test]
    fn text_flattening() {
        let v = json!({ "a": { "b": [1, 2], "c": [{ "d": "x" }] }, "e": 0.5 });
        assert_eq!(render_text(&v), "a.b: [1,2]\na.c.0.d: \"x\"\ne: 0.5\n");
    }

    #[test]
    fn stefan_analysis() {
        let p = Pattern::interval(&[0, 1, 2]).unwrap();
        let r = analyze(&p, p.tree(), 6, 1e-9, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.value["snowflake"]["is_snowflake"], json!(false));
        assert_eq!(
            r.value["model"]["periods"]["periods"],
            json!([1, 2, 3, 4, 5, 6])
        );
        assert_eq!(r.value["model"]["fixed_point"]["t"], json!("1/3"));
        assert!(!r.budget_exceeded);
    }

    #[test]
    fn threshold_examples() {
        let r = thresholds(3, 3, 40).unwrap();
        assert_eq!(r.value["misiurewicz_threshold"], json!(24));
        let r = thresholds(2, 1, 40).unwrap();
        assert_eq!(r.value["misiurewicz_threshold"], json!(8));
        assert_eq!(r.value["admissible_periods"], json!([1, 2, 4, 8, 16, 32]));
        assert_eq!(
            thresholds(4, 5, 40).unwrap().value["misiurewicz_threshold"],
            json!(32)
        );
        assert!(thresholds(1, 1, 40).is_err());
    }
}
