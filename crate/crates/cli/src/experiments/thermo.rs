use kausal_core::bits::{sample_biased, sample_incompressible, BitString, Seed};
use kausal_core::complexity::estimate_k;
use kausal_core::thermo::*;
use kausal_core::Error;
use rayon::prelude::*;
use serde_json::json;

use crate::config::Params;
use crate::error::{invalid, CliError, Result};
use crate::report::{Outcome, Table};

fn families(p: &Params) -> Result<Vec<ModelFamily>> {
    p.list("families", &[])
        .iter()
        .map(|f| serde_json::from_value(json!(f)).map_err(|_| invalid(format!("unknown model family {f:?}"))))
        .collect::<Result<Vec<_>>>()
        .map(|v| if v.is_empty() { ModelFamily::ALL.to_vec() } else { v })
}

pub fn fuel(p: &Params, seed: &Seed) -> Result<Outcome> {
    let n = p.usize("n", 100_000)?;
    let physics = Physics { temperature_k: p.f64("temperature_k", 300.0)? };
    let zeros_min = p.f64("zeros_min_lower", 0.98)?;
    let random_max = p.f64("random_max_upper", 0.05)?;
    let known_min = p.f64("known_min_upper", 0.9)?;
    let c = p.compressor()?;
    p.finish()?;

    let mut out = Outcome::default();
    let empty = BitString::zeros(0);
    let s = sample_incompressible(n, &seed.derive("s"));
    let half = s.prefix(n / 2).concat(&BitString::zeros(n - n / 2));
    let cases = [
        ("zeros", BitString::zeros(n), empty.clone()),
        ("random", s.clone(), empty.clone()),
        ("known", s.clone(), s.clone()),
        ("half", half, empty.clone()),
    ];
    let mut t = Table::new("fuel", &["case", "len", "lower_bits", "upper_bits", "lower_j", "upper_j"]);
    let mut reports = serde_json::Map::new();
    for (name, s, x) in &cases {
        let r = out.time(name, || fuel_bounds(s, x, c.as_ref(), &physics));
        let nf = n as f64;
        match *name {
            "zeros" => out.check(
                "zeros_lower",
                r.lower_bound_bits as f64 >= zeros_min * nf,
                json!({"lower_bits": r.lower_bound_bits, "min": zeros_min * nf}),
            ),
            "random" => out.check(
                "random_upper",
                r.upper_bound_bits as f64 <= random_max * nf,
                json!({"upper_bits": r.upper_bound_bits, "max": random_max * nf}),
            ),
            "known" => out.check(
                "known_upper",
                r.upper_bound_bits as f64 >= known_min * nf,
                json!({"upper_bits": r.upper_bound_bits, "min": known_min * nf}),
            ),
            _ => {}
        }
        t.push(vec![
            name.to_string(),
            r.len_s.to_string(),
            r.lower_bound_bits.to_string(),
            r.upper_bound_bits.to_string(),
            format!("{:e}", r.lower_bound_j),
            format!("{:e}", r.upper_bound_j),
        ]);
        reports.insert(name.to_string(), serde_json::to_value(&r)?);
    }
    out.table(t);
    out.put("kt_ln2_j", physics.kt_ln2());
    out.put("cases", reports);
    out.put("erase_random", landauer_ledger(&s, &BitString::zeros(n), c.as_ref(), &physics));
    Ok(out)
}

pub fn bennett(p: &Params, seed: &Seed) -> Result<Outcome> {
    let len = p.usize("len", 64)?;
    let history = p.usize("history", 16)?;
    let generator_kind = p.choice("generator", &["copy", "copy_flip"])?;
    let flip_bit = if generator_kind == "copy_flip" { p.usize("flip_bit", 0)? } else { 0 };
    p.finish()?;
    if len == 0 || flip_bit >= len {
        return Err(invalid(format!("need len >= 1 and flip_bit < len (len = {len}, flip_bit = {flip_bit})")));
    }

    let mut out = Outcome::default();
    let s = sample_incompressible(len, &seed.derive("s"));
    let mut generator = copy_generator(len);
    // Scribble on the history so that it has to be uncomputed.
    generator.extend((0..history).map(|h| Gate::Cnot(h % len, 2 * len + h)));
    if generator_kind == "copy_flip" {
        generator.push(Gate::Not(len + flip_bit));
    }
    let mut tape = BennettTape::new(&s, &s, history);
    let before = tape.tape().clone();
    let result = out.time("extract", || tape.extract(&generator));
    out.put("len", len);
    out.put("history", history);
    out.put("generator_gates", generator.len());

    match (generator_kind.as_str(), result) {
        ("copy", Ok(o)) => {
            out.check("extracted_all", o.extracted_zeros == len, json!({"extracted": o.extracted_zeros, "len": len}));
            out.check("s_zeroed", tape.s_region() == BitString::zeros(len), json!({}));
            out.check("x_restored", tape.x_region() == s, json!({}));
            out.check("work_clean", tape.copy_region().count_ones() + tape.history_region().count_ones() == 0, json!({}));
            let mut m = ReversibleMachine::new(before.clone(), o.transcript.clone())?;
            m.run_silent();
            let replays = m.tape() == tape.tape() && m.invert() == before;
            out.check("transcript_replays", replays, json!({"gates": o.transcript.len()}));
            out.put("extracted_zeros", o.extracted_zeros);
            let mut t = Table::new("transcript", &["step", "gate"]);
            for (i, g) in o.transcript.iter().enumerate() {
                t.push(vec![i.to_string(), g.to_string()]);
            }
            out.table(t);
        }
        ("copy_flip", Err(Error::GeneratorMismatch { first_diff })) => {
            out.check("mismatch_detected", first_diff == flip_bit, json!({"first_diff": first_diff, "expected": flip_bit}));
            out.check("tape_restored", tape.tape() == &before, json!({}));
            out.put("first_diff", first_diff);
        }
        ("copy_flip", Ok(o)) => {
            out.check("mismatch_detected", false, json!({"extracted": o.extracted_zeros}));
        }
        (_, Err(e)) => return Err(CliError::Core(e)),
        _ => unreachable!("generator kinds are validated"),
    }
    Ok(out)
}

pub fn structure_fn(p: &Params, seed: &Seed) -> Result<Outcome> {
    let instance = p.choice("instance", &["random", "zeros", "half", "biased", "file"])?;
    let s = match instance.as_str() {
        "file" => {
            let path = p.path("input").ok_or_else(|| invalid("instance = file needs input = <path>"))?;
            let text = std::fs::read_to_string(&path).map_err(|source| CliError::File { path, source })?;
            BitString::parse(text.trim())?
        }
        kind => {
            let n = p.usize("n", 4096)?;
            match kind {
                "zeros" => BitString::zeros(n),
                "half" => sample_incompressible(n / 2, &seed.derive("s")).concat(&BitString::zeros(n - n / 2)),
                "biased" => sample_biased(n, p.f64("p", 0.125)?, &seed.derive("s")),
                _ => sample_incompressible(n, &seed.derive("s")),
            }
        }
    };
    let fams = families(p)?;
    let tolerance = p.opt_f64("two_part_tolerance")?;
    let c = p.compressor()?;
    p.finish()?;

    let mut out = Outcome::default();
    let sf = out.time("structure_function", || structure_function(&s, &fams))?;
    let k_hat = estimate_k(&s, c.as_ref()).value_bits;
    let monotone = sf.points.windows(2).all(|w| w[1].log_size <= w[0].log_size);
    out.check("non_increasing", monotone, json!({"points": sf.points.len()}));
    out.check("macrostate_contains", sf.macrostate.contains(&s), json!({"macrostate": sf.macrostate.to_string()}));
    if let Some(tol) = tolerance {
        let two = sf.two_part_bits();
        let rel = (k_hat as f64 - two).abs() / two.max(1.0);
        out.check("two_part_tracks_estimate", rel <= tol, json!({"k_hat": k_hat, "two_part": two, "relative_error": rel, "tolerance": tol}));
    }
    let mut t = Table::new("structure", &["k", "log_size", "model"]);
    // The curve is a step function; its breakpoints and the final budget suffice.
    for (i, pt) in sf.points.iter().enumerate() {
        if i > 0 && i + 1 < sf.points.len() && sf.points[i - 1].model == pt.model {
            continue;
        }
        t.push(vec![pt.k.to_string(), format!("{:.6}", pt.log_size), sf.models[pt.model].to_string()]);
    }
    out.table(t);
    out.put("n", s.len());
    out.put("k0", sf.k0);
    out.put("macrostate", sf.macrostate.to_string());
    out.put("macrostate_model", &sf.macrostate);
    out.put("macrostate_log_size", sf.macrostate_log_size);
    out.put("two_part_bits", sf.two_part_bits());
    out.put("fuel_bound_bits", sf.fuel_bound_bits);
    out.put("k_hat", k_hat);
    Ok(out)
}

pub fn second_law(p: &Params, seed: &Seed) -> Result<Outcome> {
    let ex_width = p.usize("exhaustive_width", 16)?;
    let ex_programs = p.u64("exhaustive_programs", 100)?;
    let ex_len = p.usize("exhaustive_program_len", 200)?;
    let rnd_trials = p.u64("random_trials", 8)?;
    let rnd_width = p.usize("random_width", 4096)?;
    let rnd_len = p.usize("random_program_len", 20_000)?;
    let width = p.usize("width", 4096)?;
    let steps = p.usize("steps", 1000)?;
    let tapes = p.list("tapes", &["random", "zeros", "half"]);
    let params = SecondLawParams { slope: p.f64("slope", 8.0)?, slack: p.f64("slack", 128.0)? };
    let c = p.compressor()?;
    p.finish()?;
    if !(3..=20).contains(&ex_width) || width < 3 || rnd_width < 3 {
        return Err(invalid("widths must be at least 3 and exhaustive_width at most 20"));
    }

    let mut out = Outcome::default();
    let bad: u64 = out.time("exhaustive", || {
        (0..ex_programs)
            .into_par_iter()
            .map(|i| {
                let prog = random_program(ex_width, ex_len, &seed.derive(&format!("exhaustive-{i}")));
                (0..1u64 << ex_width).filter(|&w| invert_word(&prog, run_word(&prog, w)) != w).count() as u64
            })
            .sum()
    });
    out.check(
        "exhaustive_reversibility",
        bad == 0,
        json!({"width": ex_width, "programs": ex_programs, "program_len": ex_len, "failures": bad}),
    );

    let failures = out.time("randomized", || -> Result<u64> {
        let mut failures = 0;
        for i in 0..rnd_trials {
            let s = seed.derive(&format!("random-{i}"));
            let tape = sample_incompressible(rnd_width, &s.derive("tape"));
            let mut m = ReversibleMachine::new(tape.clone(), random_program(rnd_width, rnd_len, &s.derive("program")))?;
            m.run_silent();
            failures += u64::from(m.invert() != tape);
        }
        Ok(failures)
    })?;
    out.check(
        "randomized_reversibility",
        failures == 0,
        json!({"width": rnd_width, "trials": rnd_trials, "program_len": rnd_len, "failures": failures}),
    );

    let mut t = Table::new("complexity", &["tape", "step", "k_hat"]);
    let mut audits = serde_json::Map::new();
    for name in &tapes {
        let s = seed.derive(&format!("tape-{name}"));
        let tape = match name.as_str() {
            "random" => sample_incompressible(width, &s),
            "zeros" => BitString::zeros(width),
            "half" => sample_incompressible(width / 2, &s).concat(&BitString::zeros(width - width / 2)),
            other => return Err(invalid(format!("unknown tape {other:?}; expected random, zeros or half"))),
        };
        let prog = random_program(width, steps, &s.derive("program"));
        let trace = ReversibleMachine::new(tape, prog)?.run();
        let r = out.time(&format!("audit:{name}"), || second_law_audit(&trace, c.as_ref(), params));
        out.check(
            &format!("audit:{name}"),
            r.violation_count == 0,
            json!({"pairs": r.pairs_checked, "violations": r.violation_count, "worst_margin": r.worst_margin}),
        );
        for (step, k) in &r.complexities {
            t.push(vec![name.clone(), step.to_string(), k.to_string()]);
        }
        audits.insert(
            name.clone(),
            json!({"pairs_checked": r.pairs_checked, "violation_count": r.violation_count, "worst_margin": r.worst_margin, "violations": r.violations}),
        );
    }
    out.table(t);
    out.put("params", params);
    out.put("audits", audits);
    Ok(out)
}

pub fn mixing_demo(p: &Params, seed: &Seed) -> Result<Outcome> {
    let n = p.usize("n", 512)?;
    let steps = p.usize("steps", 4 * n * n)?;
    let frames = p.usize("frames", 16)?;
    let fams = families(p)?;
    let c = p.compressor()?;
    p.finish()?;

    let mut out = Outcome::default();
    let fr = out.time("mixing", || kausal_core::thermo::mixing_demo(n, steps, frames, seed, &fams, c.as_ref()))?;
    let (first, last) = (&fr[0], fr.last().expect("frames"));
    out.check(
        "macrostate_grows",
        last.macrostate_log_size >= first.macrostate_log_size && last.k_hat > first.k_hat,
        json!({"first": first, "last": last}),
    );
    let mut t = Table::new("frames", &["step", "k_hat", "k0", "macrostate", "macrostate_log_size"]);
    for f in &fr {
        t.push(vec![f.step.to_string(), f.k_hat.to_string(), f.k0.to_string(), f.macrostate.clone(), format!("{:.6}", f.macrostate_log_size)]);
    }
    out.table(t);
    out.put("n", n);
    out.put("steps", steps);
    Ok(out)
}
