use kausal_core::bits::Seed;
use kausal_core::process::*;
use serde_json::json;

use crate::config::Params;
use crate::error::{invalid, Result};
use crate::report::{Outcome, Table};

/// A builtin name (`one_way`, `two_way`, `three_party`) or a relation file.
fn load_relation(p: &Params) -> Result<(String, GlobalRelation)> {
    let v = p.raw("relation").ok_or_else(|| invalid("missing relation = <builtin or file>"))?;
    let g = match v {
        "one_way" => GlobalRelation::one_way(),
        "two_way" => GlobalRelation::two_way(),
        "three_party" => GlobalRelation::three_party_cycle(),
        _ => GlobalRelation::read(p.path("relation").expect("key present"))?,
    };
    Ok((v.to_string(), g))
}

fn parse_combo(k: usize, text: &str) -> Result<Vec<LocalOp>> {
    let ops: Vec<LocalOp> = text
        .trim_matches(|c| c == '(' || c == ')' || c == ' ')
        .split(',')
        .map(|s| {
            LocalOp::ALL
                .iter()
                .copied()
                .find(|op| op.to_string() == s.trim())
                .ok_or_else(|| invalid(format!("unknown local operation {s:?}; expected const0, const1, id or neg")))
        })
        .collect::<Result<_>>()?;
    if ops.len() != k {
        return Err(invalid(format!("combination {text:?} names {} operations for {k} parties", ops.len())));
    }
    Ok(ops)
}

fn relation_rows(g: &GlobalRelation) -> serde_json::Value {
    let k = g.k();
    (0..1u32 << k).map(|o| (vector_ascii(o, k), json!(vector_ascii(g.apply(o), k)))).collect::<serde_json::Map<_, _>>().into()
}

pub fn process_check(p: &Params, _seed: &Seed) -> Result<Outcome> {
    let (name, g) = load_relation(p)?;
    let expect = p.raw("expect").map(|_| p.choice("expect", &["consistent", "inconsistent", "deterministic"])).transpose()?;
    let failing: Vec<Vec<LocalOp>> = p
        .raw("expect_failing")
        .unwrap_or("")
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_combo(g.k(), s))
        .collect::<Result<_>>()?;
    let limit = p.usize("party_limit", DEFAULT_PARTY_LIMIT)?;
    p.finish()?;

    let mut out = Outcome::default();
    let v = out.time("consistency", || check_logical_consistency_with_limit(&g, limit))?;
    match expect.as_deref() {
        Some("consistent") => out.check("consistent", v.consistent, json!({"failing": v.failing_combos.len()})),
        Some("inconsistent") => out.check("inconsistent", !v.consistent, json!({"failing": v.failing_combos.len()})),
        Some(_) => out.check(
            "unique_fixed_points",
            v.deterministic_process,
            json!({"combos": v.per_combo.len(), "consistent": v.consistent}),
        ),
        None => {}
    }
    for combo in &failing {
        let cname = combo_name(combo);
        let fps = fixed_points(&g, combo)?;
        out.check(
            &format!("failing:{cname}"),
            fps.is_empty() && v.failing_combos.contains(combo),
            json!({"fixed_points": fps.iter().map(|&o| vector_ascii(o, g.k())).collect::<Vec<_>>()}),
        );
    }
    let mut t = Table::new("combos", &["combo", "fixed_points", "count"]);
    for c in &v.per_combo {
        t.push(vec![combo_name(&c.combo), c.fixed_points.join(" "), c.fixed_points.len().to_string()]);
    }
    out.table(t);
    out.put("relation", name);
    out.put("k", g.k());
    out.put("rows", relation_rows(&g));
    out.put("consistent", v.consistent);
    out.put("deterministic_process", v.deterministic_process);
    out.put("failing_combos", v.failing_combos.iter().map(|c| combo_name(c)).collect::<Vec<_>>());
    Ok(out)
}

/// `B,C->A; A->B` as `(past, future)` pairs.
fn parse_groups(text: &str) -> Result<Vec<(Vec<String>, String)>> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (past, future) = item.split_once("->").ok_or_else(|| invalid(format!("expected `past->future`, got {item:?}")))?;
            let mut past: Vec<String> = past.split(',').map(|s| s.trim().to_string()).collect();
            past.sort();
            Ok((past, future.trim().to_string()))
        })
        .collect()
}

fn group_label(past: &[String], future: &str) -> String {
    format!("{}->{future}", past.join(","))
}

fn holds(m: &CausalRelationMatrix, past: &[String], future: &str) -> Result<bool> {
    let refs: Vec<&str> = past.iter().map(String::as_str).collect();
    let g = m.group(&refs, future).ok_or_else(|| invalid(format!("no group {} in this scenario", group_label(past, future))))?;
    Ok(g.status == CausalStatus::Precedes)
}

pub fn process_run(p: &Params, seed: &Seed) -> Result<Outcome> {
    let (name, g) = load_relation(p)?;
    let rounds = p.usize("rounds", 100_000)?;
    let runs = p.usize("runs", 1)?;
    let expect_class = p.raw("expect_class").map(|_| p.choice("expect_class", &["causal", "non_causal"])).transpose()?;
    let precedes = parse_groups(p.raw("expect_precedes").unwrap_or(""))?;
    let not_precedes = parse_groups(p.raw("expect_not_precedes").unwrap_or(""))?;
    let min_fraction = p.f64("min_fraction", 1.0)?;
    let max_fraction = p.f64("max_fraction", 0.0)?;
    let save = p.bool("save_scenario", false)?;
    let th = p.thresholds()?;
    let c = p.compressor()?;
    p.finish()?;
    if runs == 0 {
        return Err(invalid("runs must be at least 1"));
    }

    let mut out = Outcome::default();
    let mut matrices = Vec::with_capacity(runs);
    for i in 0..runs {
        let s = out.time(&format!("run-{i}"), || run_scenario(&g, &seed.derive(&format!("run-{i}")), rounds))?;
        let m = out.time(&format!("derive-{i}"), || derive_causal_relations(&s.parties, &th, c.as_ref()))?;
        if save && i == 0 {
            out.artifact("scenario.txt", s.to_text());
        }
        matrices.push(m);
    }
    let labels: Vec<String> = matrices[0].groups.iter().map(|gr| group_label(&gr.past, &gr.future)).collect();
    let mut header = vec!["run", "class"];
    header.extend(labels.iter().map(String::as_str));
    let mut t = Table::new("runs", &header);
    let mut classes = Vec::with_capacity(runs);
    for (i, m) in matrices.iter().enumerate() {
        let class = classify_scenario(m);
        classes.push(class);
        let mut row = vec![i.to_string(), serde_json::to_value(class)?.as_str().unwrap_or_default().to_string()];
        row.extend(m.groups.iter().map(|gr| serde_json::to_value(gr.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()));
        t.push(row);
    }
    out.table(t);

    let frac = |past: &[String], future: &str| -> Result<f64> {
        let mut hits = 0;
        for m in &matrices {
            hits += usize::from(holds(m, past, future)?);
        }
        Ok(hits as f64 / runs as f64)
    };
    for (past, future) in &precedes {
        let f = frac(past, future)?;
        out.check(&format!("precedes:{}", group_label(past, future)), f >= min_fraction, json!({"fraction": f, "min": min_fraction, "runs": runs}));
    }
    for (past, future) in &not_precedes {
        let f = frac(past, future)?;
        out.check(&format!("not_precedes:{}", group_label(past, future)), f <= max_fraction, json!({"fraction": f, "max": max_fraction, "runs": runs}));
    }
    if let Some(want) = &expect_class {
        let want_class = if want == "causal" { ScenarioClass::Causal } else { ScenarioClass::NonCausal };
        let hits = classes.iter().filter(|&&c| c == want_class).count();
        let f = hits as f64 / runs as f64;
        out.check("class", f >= min_fraction, json!({"expected": want, "fraction": f, "min": min_fraction}));
    }
    out.put("relation", name);
    out.put("rows", relation_rows(&g));
    out.put("rounds", rounds);
    out.put("runs", runs);
    if runs == 1 {
        out.put("relations", &matrices[0]);
    }
    Ok(out)
}

pub fn census(p: &Params, _seed: &Seed) -> Result<Outcome> {
    let k = p.usize("k", 2)?;
    p.finish()?;

    let mut out = Outcome::default();
    let r = out.time("census", || census_run(k))?;
    let expected_total = 1u64.checked_shl((k << k) as u32).unwrap_or(0);
    out.check("total", r.total == expected_total, json!({"total": r.total}));
    if let Some(all) = &r.per_relation {
        if k == 2 {
            let two = all[GlobalRelation::two_way().index() as usize];
            let one = all[GlobalRelation::one_way().index() as usize];
            out.check("two_way_inconsistent", two == RelationClass::Inconsistent, json!({"class": two}));
            out.check("one_way_causal", one == RelationClass::ConsistentCausal, json!({"class": one}));
        }
    }
    if k == 3 {
        let nc = r.count(RelationClass::ConsistentNonCausal);
        out.check("non_causal_found", nc >= 1, json!({"count": nc}));
        let three = analyze_relation(&GlobalRelation::three_party_cycle()).class;
        out.check("three_party_non_causal", three == RelationClass::ConsistentNonCausal, json!({"class": three}));
    }
    let mut t = Table::new("classes", &["class", "count", "exemplars"]);
    for c in &r.classes {
        t.push(vec![c.class.to_string(), c.count.to_string(), c.exemplars.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")]);
    }
    out.table(t);
    let mut csv = Vec::new();
    r.write_csv(&mut csv)?;
    out.artifact("census.csv", csv);
    out.put("k", k);
    out.put("total", r.total);
    out.put("classes", &r.classes);
    Ok(out)
}

fn census_run(k: usize) -> kausal_core::Result<CensusReport> {
    kausal_core::process::census(k)
}
