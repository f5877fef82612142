//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use kausal_cli::golden::compare_files;
use kausal_cli::{run, Config, RunReport};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn bundled(name: &str) -> Result<RunReport, String> {
    let cfg = Config::load(root().join("configs").join(format!("{name}.conf"))).map_err(|e| format!("{name}: {e}"))?;
    let experiment = cfg.get("experiment").unwrap_or_default().to_string();
    run(&experiment, &cfg).map_err(|e| format!("{name}: {e}"))
}

/// Named checks must all be present and passing.
fn require(r: &RunReport, names: &[&str]) -> Result<(), String> {
    for n in names {
        match r.check(n) {
            Some(c) if c.pass => {}
            Some(c) => return Err(format!("{}: {n} failed: {}", r.experiment, c.detail)),
            None => return Err(format!("{}: no check {n}", r.experiment)),
        }
    }
    Ok(())
}

fn require_prefix(r: &RunReport, prefix: &str, at_least: usize) -> Result<(), String> {
    let matching: Vec<_> = r.outcome.checks.iter().filter(|c| c.name.starts_with(prefix)).collect();
    if matching.len() < at_least {
        return Err(format!("{}: only {} checks named {prefix}*", r.experiment, matching.len()));
    }
    match matching.iter().find(|c| !c.pass) {
        Some(c) => Err(format!("{}: {} failed: {}", r.experiment, c.name, c.detail)),
        None => Ok(()),
    }
}

fn num(r: &RunReport, key: &str) -> f64 {
    r.result(key).and_then(|v| v.as_f64()).unwrap_or(f64::NAN)
}

fn ac1() -> Result<String, String> {
    let r = bundled("grandfather")?;
    require(&r, &["inconsistent", "failing:(id,neg)"])?;
    Ok(format!("failing combos {}", r.result("failing_combos").unwrap()))
}

fn ac2() -> Result<String, String> {
    let check = bundled("three-party-check")?;
    require(&check, &["unique_fixed_points"])?;
    let run = bundled("three-party-run")?;
    require(&run, &["precedes:B,C->A", "precedes:A,C->B", "precedes:A,B->C", "class"])?;
    Ok("unique fixed point in all 64 combinations; non_causal".into())
}

fn ac3() -> Result<String, String> {
    let r = bundled("one-way-runs")?;
    require(&r, &["precedes:A->B", "not_precedes:B->A"])?;
    let f = |n: &str| r.check(n).unwrap().detail["fraction"].clone();
    Ok(format!("A->B in {} of runs, B->A in {}", f("precedes:A->B"), f("not_precedes:B->A")))
}

fn ac4() -> Result<String, String> {
    let r = bundled("pr-inherit")?;
    require(&r, &["inputs_incompressible", "k_x_ratio", "k_x_given_a_ratio", "no_signaling"])?;
    Ok(format!("K(x)/n = {:.3}, K(x|a)/n = {:.3}", num(&r, "k_x_ratio"), num(&r, "k_x_given_a_ratio")))
}

fn ac5() -> Result<String, String> {
    let r = bundled("pr-local")?;
    require_prefix(&r, "collapse:", 5)?;
    Ok("all bundled local strategies collapse".into())
}

fn ac6() -> Result<String, String> {
    let one = bundled("parallel-value-1")?;
    require(&one, &["matches_expected", "below_total"])?;
    let two = bundled("parallel-value-2")?;
    require(&two, &["matches_expected", "below_total"])?;
    compare_files(&two.files().map_err(|e| e.to_string())?, &root().join("goldens/parallel-value-2")).map_err(|e| e.to_string())?;
    let ms = bundled("magic-square")?;
    require(&ms, &["classical_value"])?;
    Ok(format!("value(1) = {}, value(2) = {}/16, magic square 8/9", num(&one, "wins"), num(&two, "wins")))
}

fn ac7() -> Result<String, String> {
    let r = bundled("chained-bell")?;
    require(&r, &["b_one_fraction", "masked_chi", "violation_fraction"])?;
    Ok(format!(
        "b=1 fraction {:.4}, masked K(chi|b) {} bits, violations {:.5}",
        num(&r, "b_one_fraction"),
        num(&r, "masked_chi_bits"),
        num(&r, "violation_fraction")
    ))
}

fn ac8() -> Result<String, String> {
    let r = bundled("second-law")?;
    require(&r, &["exhaustive_reversibility", "randomized_reversibility"])?;
    require_prefix(&r, "audit:", 1)?;
    Ok("reversible everywhere; zero second-law violations at slack 128".into())
}

fn ac9() -> Result<String, String> {
    let f = bundled("fuel")?;
    require(&f, &["zeros_lower", "random_upper", "known_upper"])?;
    let b = bundled("bennett")?;
    require(&b, &["extracted_all", "x_restored", "s_zeroed", "work_clean"])?;
    Ok(format!("bennett extracted {} zeros", num(&b, "extracted_zeros")))
}

fn ac10() -> Result<String, String> {
    let r = bundled("triviality")?;
    require_prefix(&r, "set-", 20)?;
    Ok(format!("{} of 20 sets confirmed", num(&r, "confirmed")))
}

fn ac11() -> Result<String, String> {
    let start = Instant::now();
    let two = bundled("census-2")?;
    let t2 = start.elapsed();
    require(&two, &["total", "two_way_inconsistent", "one_way_causal"])?;
    if t2 >= Duration::from_secs(1) {
        return Err(format!("k=2 census took {t2:.2?}"));
    }
    let three = bundled("census-3")?;
    require(&three, &["total", "non_causal_found"])?;
    let nc = three.check("non_causal_found").unwrap().detail["count"].clone();
    Ok(format!("k=2 in {t2:.2?}; k=3 consistent_non_causal = {nc}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<String, String>, u64); 11] = [
        ("grandfather antinomy", ac1, 1),
        ("non-causal consistency", ac2, 30),
        ("one-way channel", ac3, 300),
        ("PR complexity inheritance", ac4, 60),
        ("local collapse", ac5, 60),
        ("parallel-repetition oracles", ac6, 120),
        ("chained Bell", ac7, 120),
        ("reversibility and second law", ac8, 300),
        ("fuel bounds", ac9, 60),
        ("triviality", ac10, 120),
        ("census", ac11, 1800),
    ];
    let mut failures = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let took = start.elapsed();
        let verdict = match result {
            Ok(msg) if took <= Duration::from_secs(*limit) => Ok(msg),
            Ok(msg) => Err(format!("{msg}; over the {limit}s budget")),
            Err(e) => Err(e),
        };
        match verdict {
            Ok(msg) => println!("AC{} PASS {name} ({took:.2?}): {msg}", i + 1),
            Err(e) => {
                failures += 1;
                println!("AC{} FAIL {name} ({took:.2?}): {e}", i + 1);
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
