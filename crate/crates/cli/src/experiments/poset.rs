use kausal_core::bits::{sample_incompressible, BitString, Seed};
use kausal_core::poset::*;
use serde_json::json;

use crate::config::Params;
use crate::error::{invalid, CliError, Result};
use crate::report::{Outcome, Table};

/// `name bits` per line; blank lines and `#` comments are skipped.
fn read_elements(path: &std::path::Path) -> Result<Vec<(String, BitString)>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::File { path: path.into(), source })?;
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (name, bits) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| invalid(format!("{}: expected `name bits`, got {line:?}", path.display())))?;
        out.push((name.to_string(), BitString::parse(bits.trim())?));
    }
    Ok(out)
}

fn standard_corpus(n: usize, seed: &Seed) -> Vec<(String, BitString)> {
    let s = sample_incompressible(n, &seed.derive("s"));
    let t = sample_incompressible(n, &seed.derive("t"));
    vec![
        ("s".into(), s.clone()),
        ("t".into(), t.clone()),
        ("st".into(), s.concat(&t)),
        ("not_s".into(), s.not()),
        ("t_head".into(), t.prefix(n / 2)),
    ]
}

/// `x<y` strict cause, `x=y` equivalent, `x|y` spacelike.
fn parse_expectation(item: &str) -> Result<(String, Relation, String)> {
    let (at, rel) = item
        .char_indices()
        .find_map(|(i, ch)| match ch {
            '<' => Some((i, Relation::Precedes)),
            '=' => Some((i, Relation::Equivalent)),
            '|' => Some((i, Relation::Spacelike)),
            _ => None,
        })
        .ok_or_else(|| invalid(format!("expectation {item:?} needs one of < = |")))?;
    Ok((item[..at].trim().into(), rel, item[at + 1..].trim().into()))
}

pub fn poset_build(p: &Params, seed: &Seed) -> Result<Outcome> {
    let corpus = p.choice("corpus", &["standard", "file"])?;
    let elements = if corpus == "file" {
        let path = p.path("elements").ok_or_else(|| invalid("corpus = file needs elements = <path>"))?;
        read_elements(&path)?
    } else {
        standard_corpus(p.usize("n", 20_000)?, seed)
    };
    let prefix = p.opt_u64("subject_prefix")?.map(|v| v as usize);
    let expectations: Vec<(String, Relation, String)> =
        p.raw("expect").unwrap_or("").split(';').map(str::trim).filter(|s| !s.is_empty()).map(parse_expectation).collect::<Result<_>>()?;
    let th = p.thresholds()?;
    let c = p.compressor()?;
    p.finish()?;

    let mut out = Outcome::default();
    let opts = PosetOptions { subject_prefix: prefix };
    let poset = out.time("build", || build_poset_with(&elements, &th, c.as_ref(), &opts))?;
    out.check(
        "transitive",
        poset.violations.is_empty(),
        json!({"violations": poset.violations.len(), "triples_checked": poset.triples_checked}),
    );
    for (x, rel, y) in &expectations {
        let got = poset.relation_between(x, y)?;
        out.check(&format!("relation:{x}:{y}"), got == *rel, json!({"expected": rel, "got": got}));
    }

    let mut t = Table::new("relations", &["x", "y", "relation", "k_x_given_y", "margin_x_leq_y"]);
    for i in 0..poset.len() {
        for j in 0..poset.len() {
            if i != j {
                t.push(vec![
                    poset.names[i].clone(),
                    poset.names[j].clone(),
                    serde_json::to_value(poset.relation[i][j])?.as_str().unwrap_or_default().to_string(),
                    poset.cond_bits[i][j].to_string(),
                    format!("{:.6}", poset.margins[i][j]),
                ]);
            }
        }
    }
    out.table(t);
    out.artifact("poset.dot", poset.to_dot());
    out.artifact("poset.json", serde_json::to_string_pretty(&poset.to_json())? + "\n");
    out.put("names", &poset.names);
    out.put("extremes", poset.detect_extremes());
    out.put("violations", &poset.violations);
    Ok(out)
}

pub fn triviality(p: &Params, seed: &Seed) -> Result<Outcome> {
    let count = p.usize("count", 20)?;
    let n = p.usize("n", 8192)?;
    let th = p.thresholds()?;
    let c = p.compressor()?;
    p.finish()?;

    let mut out = Outcome::default();
    let sets = triviality_corpus(count, n, seed);
    let mut t = Table::new("sets", &["set", "elements", "deterministic", "status", "big_bang"]);
    let mut confirmed = 0;
    for (i, set) in sets.iter().enumerate() {
        let (poset, det) = out.time(&format!("set-{i}"), || -> Result<_> {
            let poset = build_poset(set, &th, c.as_ref())?;
            let det = poset.classify_determinism(c.as_ref())?;
            Ok((poset, det))
        })?;
        let report = poset.check_triviality(&det);
        let (status, big_bang) = match &report {
            TrivialityReport::Confirmed { big_bang } => ("confirmed", big_bang.clone()),
            TrivialityReport::Counterexample { big_bang, .. } => ("counterexample", big_bang.clone()),
            TrivialityReport::Skipped { .. } => ("skipped", String::new()),
        };
        confirmed += usize::from(status == "confirmed");
        out.check(&format!("set-{i}"), status == "confirmed", serde_json::to_value(&report)?);
        t.push(vec![i.to_string(), poset.names.join(" "), det.deterministic.to_string(), status.into(), big_bang]);
    }
    out.table(t);
    out.put("sets", count);
    out.put("confirmed", confirmed);
    Ok(out)
}
