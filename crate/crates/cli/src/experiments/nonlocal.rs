use kausal_core::bits::{BitString, Seed};
use kausal_core::complexity::{estimate_k, estimate_k_cond, ComplexityEstimate};
use kausal_core::nonlocal::*;
use serde_json::json;

use crate::config::Params;
use crate::error::{invalid, Result};
use crate::report::{Outcome, Table};

fn estimate_row(t: &mut Table, name: &str, e: &ComplexityEstimate) {
    t.push(vec![name.into(), e.value_bits.to_string(), e.n.to_string(), format!("{:.6}", e.ratio())]);
}

pub fn pr_inherit(p: &Params, seed: &Seed) -> Result<Outcome> {
    let n = p.usize("n", 100_000)?;
    let strategy = p.choice("strategy", &["nonlocal_unbiased", "biased", "local"])?;
    let th = p.thresholds()?;
    let c = p.compressor()?;
    let mut out = Outcome::default();
    out.put("n", n);
    out.put("strategy", &strategy);

    if strategy == "local" {
        let max_ratio = p.f64("max_collapse_ratio", 0.05)?;
        p.finish()?;
        let mut t = Table::new("strategies", &["strategy", "k_x_given_a_lambda", "ratio", "no_signaling", "local"]);
        for s in bundled_local_strategies() {
            let (q, lambda) = out.time(&format!("generate:{}", s.name), || gen_pr(n, seed, &PrStrategy::Local(s.clone())))?;
            let (a, x) = (q.a.bits().expect("pr"), q.x.bits().expect("pr"));
            let mut cond = vec![a];
            if let Some(l) = &lambda {
                cond.extend(l.parts.iter());
            }
            let e = out.time(&format!("collapse:{}", s.name), || estimate_k_cond(x, &cond, c.as_ref(), None))?;
            let ns = test_no_signaling(&q, &th, c.as_ref())?;
            let loc = match &lambda {
                Some(l) => Some(test_locality(&q, Some(l), &th, c.as_ref())?),
                None => None,
            };
            out.check(
                &format!("collapse:{}", s.name),
                e.ratio() <= max_ratio,
                json!({"k_x_given_a_lambda": e.value_bits, "ratio": e.ratio(), "max": max_ratio}),
            );
            out.check(&format!("no_signaling:{}", s.name), ns.verdict.holds(), json!({"checks": ns.checks}));
            t.push(vec![
                s.name.clone(),
                e.value_bits.to_string(),
                format!("{:.6}", e.ratio()),
                ns.verdict.holds().to_string(),
                loc.as_ref().map_or("n/a".into(), |l| l.local.to_string()),
            ]);
            if let Some(loc) = loc {
                out.check(&format!("locality:{}", s.name), loc.local, json!({"checks": loc.checks}));
            }
        }
        out.table(t);
        return Ok(out);
    }

    let pr = if strategy == "biased" { PrStrategy::Biased { p: p.f64("p", 0.1)? } } else { PrStrategy::NonlocalUnbiased };
    let min_kx = p.f64("min_kx_ratio", 0.5)?;
    let min_kx_a = p.f64("min_kx_given_a_ratio", 0.3)?;
    p.finish()?;

    let (q, _) = out.time("generate", || gen_pr(n, seed, &pr))?;
    let (a, b, x, y) = (q.a.bits().expect("pr"), q.b.bits().expect("pr"), q.x.bits().expect("pr"), q.y.bits().expect("pr"));
    let (ka, kb) = out.time("inputs", || rayon::join(|| estimate_k(a, c.as_ref()), || estimate_k(b, c.as_ref())));
    let inputs = th.incompressible(&ka).holds() && th.incompressible(&kb).holds();
    out.check("inputs_incompressible", inputs, json!({"k_a": ka.ratio(), "k_b": kb.ratio(), "min": th.eps_incomp}));

    let kx = out.time("k_x", || estimate_k(x, c.as_ref()));
    let kxa = out.time("k_x_given_a", || estimate_k_cond(x, &[a], c.as_ref(), None))?;
    let kyb = estimate_k_cond(y, &[b], c.as_ref(), None)?;
    out.check("k_x_ratio", kx.ratio() >= min_kx, json!({"value": kx.ratio(), "min": min_kx}));
    out.check("k_x_given_a_ratio", kxa.ratio() >= min_kx_a, json!({"value": kxa.ratio(), "min": min_kx_a}));

    let rel = check_relation(&q);
    out.check("pr_relation", rel.violations.is_empty(), json!({"violations": rel.violations.len()}));
    let ns = out.time("no_signaling", || test_no_signaling(&q, &th, c.as_ref()))?;
    out.check("no_signaling", ns.verdict.holds(), json!({"eps_dep": th.eps_dep, "checks": ns.checks}));

    let mut t = Table::new("estimates", &["quantity", "value_bits", "n", "ratio"]);
    for (name, e) in [
        ("K(a)", &ka),
        ("K(b)", &kb),
        ("K(x)", &kx),
        ("K(x|a)", &kxa),
        ("K(y|b)", &kyb),
        ("K(x|a,b)", &ns.k_x_given_ab),
        ("K(y|a,b)", &ns.k_y_given_ab),
    ] {
        estimate_row(&mut t, name, e);
    }
    out.table(t);
    out.put("k_x_ratio", kx.ratio());
    out.put("k_x_given_a_ratio", kxa.ratio());
    out.put("k_y_given_b_ratio", kyb.ratio());
    out.put("no_signaling", &ns);
    Ok(out)
}

pub fn chained_bell(p: &Params, seed: &Seed) -> Result<Outcome> {
    let n = p.usize("n", 1_000_000)?;
    let m = p.u32("m", 8)?;
    if m < 3 {
        return Err(invalid(format!("m = {m}; the chained system needs m >= 3")));
    }
    let rate = p.f64("error_rate", 1.0 / (m as f64 * m as f64))?;
    let ones_tol = p.f64("b_one_tolerance", 0.01)?;
    let chi_tol = p.f64("chi_tolerance", 0.15)?;
    let viol_tol = p.f64("violation_tolerance", 0.2)?;
    let c = p.compressor()?;
    p.finish()?;

    let mut out = Outcome::default();
    let q = out.time("generate", || gen_chained(n, m, seed, rate))?;
    let (a, b) = (q.a.symbols().expect("chained"), q.b.symbols().expect("chained"));
    let ones = b.indicator(1);
    let frac = ones.count_ones() as f64 / n as f64;
    let expect = 1.0 / m as f64;
    out.check("b_one_fraction", (frac - expect).abs() <= ones_tol, json!({"value": frac, "expected": expect, "tolerance": ones_tol}));

    let chi = chained_indicator(a, b);
    let mask = ones.ones_positions();
    let e = out.time("masked_chi", || estimate_k_cond(&chi, &[], c.as_ref(), Some(&mask)))?;
    let target = n as f64 / m as f64;
    let rel = (e.value_bits as f64 - target).abs() / target;
    out.check("masked_chi", rel <= chi_tol, json!({"value_bits": e.value_bits, "target": target, "relative_error": rel, "tolerance": chi_tol}));

    let viol = check_relation(&q).violation_fraction();
    let viol_rel = if rate > 0.0 { (viol - rate).abs() / rate } else { viol };
    out.check("violation_fraction", viol_rel <= viol_tol, json!({"value": viol, "configured": rate, "relative_error": viol_rel, "tolerance": viol_tol}));

    let kx = out.time("k_x", || estimate_k(q.x.bits().expect("chained"), c.as_ref()));
    let floor = n as f64 / (6.0 * m as f64);
    out.check("k_x_floor", kx.value_bits as f64 >= floor, json!({"value_bits": kx.value_bits, "min": floor}));

    let mut t = Table::new("b_symbols", &["symbol", "count"]);
    for v in 1..=m {
        t.push(vec![v.to_string(), b.indicator(v).count_ones().to_string()]);
    }
    out.table(t);
    out.put("n", n);
    out.put("m", m);
    out.put("b_one_fraction", frac);
    out.put("masked_chi_bits", e.value_bits);
    out.put("violation_fraction", viol);
    out.put("k_x_bits", kx.value_bits);
    Ok(out)
}

pub fn magic_square(p: &Params, seed: &Seed) -> Result<Outcome> {
    let n = p.usize("n", 100_000)?;
    let strategy = p.choice("strategy", &["deterministic_optimal", "consistent"])?;
    let tol = p.f64("tolerance", 0.01)?;
    p.finish()?;

    let mut out = Outcome::default();
    let v = out.time("value", magic_square_value);
    out.check("classical_value", (v.wins, v.rounds) == (8, 9), json!({"wins": v.wins, "rounds": v.rounds}));
    out.put("value", json!({"wins": v.wins, "rounds": v.rounds, "alice": v.alice, "bob": v.bob}));
    if n > 0 {
        let strat = match strategy.as_str() {
            "consistent" => MagicStrategy::ConsistentPerRound,
            _ => MagicStrategy::Deterministic { alice: v.alice, bob: v.bob },
        };
        let q = out.time("replay", || gen_magic_square(n, seed, &strat))?;
        let rel = check_relation(&q);
        let frac = rel.ok_count as f64 / n as f64;
        if strategy == "consistent" {
            out.check("never_loses", rel.violations.is_empty(), json!({"losses": rel.violations.len()}));
        } else {
            let target = v.fraction();
            out.check("replay_fraction", (frac - target).abs() <= tol, json!({"value": frac, "expected": target, "tolerance": tol}));
        }
        out.put("replay_win_fraction", frac);
    }
    Ok(out)
}

pub fn parallel_value(p: &Params, _seed: &Seed) -> Result<Outcome> {
    let r = p.u32("r", 1)?;
    let expected = p.opt_u64("expected")?;
    p.finish()?;

    let mut out = Outcome::default();
    let v = out.time("search", || pr_parallel_value(r))?;
    out.check("below_total", v.wins < v.total, json!({"wins": v.wins, "total": v.total}));
    if let Some(e) = expected {
        out.check("matches_expected", u64::from(v.wins) == e, json!({"wins": v.wins, "expected": e}));
    }
    out.check("replay", pr_parallel_wins(r, &v.f, &v.g) == v.wins, json!({}));
    let mut t = Table::new("strategy", &["input", "f", "g"]);
    let fmt = |x: u32| BitString::from_fn(r as usize, |j| (x >> j) & 1 == 1).to_ascii();
    for i in 0..v.f.len() {
        t.push(vec![fmt(i as u32), fmt(v.f[i]), fmt(v.g[i])]);
    }
    out.table(t);
    out.put("r", r);
    out.put("wins", v.wins);
    out.put("total", v.total);
    Ok(out)
}
