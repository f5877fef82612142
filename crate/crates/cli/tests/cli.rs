use std::path::{Path, PathBuf};
use std::process::Command;

use kausal_cli::golden::compare_files;
use kausal_cli::{run, verify_golden, CliError, Config, EXPERIMENTS};
use kausal_core::process::GlobalRelation;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn config(name: &str) -> Config {
    Config::load(root().join("configs").join(format!("{name}.conf"))).unwrap()
}

fn experiment_of(cfg: &Config) -> String {
    cfg.get("experiment").unwrap().to_string()
}

fn kausal(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_kausal")).args(args).env_remove("KAUSAL_THREADS").output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.conf");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn committed_goldens_match() {
    let mut checked = 0;
    for entry in std::fs::read_dir(root().join("goldens")).unwrap() {
        let dir = entry.unwrap().path();
        let name = dir.file_name().unwrap().to_string_lossy().into_owned();
        let cfg = config(&name);
        let report = run(&experiment_of(&cfg), &cfg).unwrap();
        if let Err(e) = compare_files(&report.files().unwrap(), &dir) {
            panic!("{name}: {e}");
        }
        checked += 1;
    }
    assert!(checked >= 10);
}

#[test]
fn edited_threshold_names_the_field() {
    let mut cfg = config("structure-fn");
    cfg.set("two_part_tolerance", "0.2");
    let report = run("structure-fn", &cfg).unwrap();
    let err = compare_files(&report.files().unwrap(), &root().join("goldens/structure-fn")).unwrap_err();
    let CliError::GoldenMismatch { file, diff } = err else { panic!("expected a mismatch") };
    assert_eq!(file, "report.jsonl");
    assert!(diff.contains("check[two_part_tracks_estimate].detail.tolerance: 0.1 -> 0.2"), "{diff}");
    assert!(diff.contains("run.config_hash"), "{diff}");
    assert!(diff.contains("--- golden/report.jsonl"), "{diff}");
}

#[test]
fn missing_golden_is_an_error() {
    let report = run("parallel-value", &config("parallel-value-1")).unwrap();
    let empty = tempfile::tempdir().unwrap();
    assert!(matches!(compare_files(&report.files().unwrap(), empty.path()), Err(CliError::GoldenMissing(_))));

    // A golden set lacking one of the report's tables is also an error.
    let partial = tempfile::tempdir().unwrap();
    std::fs::copy(root().join("goldens/parallel-value-1/report.jsonl"), partial.path().join("report.jsonl")).unwrap();
    assert!(matches!(compare_files(&report.files().unwrap(), partial.path()), Err(CliError::GoldenMissing(_))));
}

#[test]
fn bundled_relations_match_builtins() {
    let dir = root().join("configs/relations");
    assert_eq!(GlobalRelation::read(dir.join("one_way.json")).unwrap(), GlobalRelation::one_way());
    assert_eq!(GlobalRelation::read(dir.join("two_way.json")).unwrap(), GlobalRelation::two_way());
    assert_eq!(GlobalRelation::read(dir.join("three_party.json")).unwrap(), GlobalRelation::three_party_cycle());
}

#[test]
fn every_experiment_has_a_bundled_config() {
    let mut named = std::collections::BTreeSet::new();
    for entry in std::fs::read_dir(root().join("configs")).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "conf") {
            named.insert(experiment_of(&Config::load(&p).unwrap()));
        }
    }
    for e in EXPERIMENTS {
        assert!(named.contains(e.name), "{}", e.name);
    }
}

#[test]
fn library_errors() {
    assert!(matches!(run("no-such", &Config::default()), Err(CliError::UnknownExperiment(_))));
    let typo = Config::parse("r = 1\nexpectd = 3").unwrap();
    let err = run("parallel-value", &typo).unwrap_err();
    assert!(matches!(&err, CliError::InvalidConfig(m) if m.contains("expectd")), "{err}");
    assert!(matches!(run("census", &config("parallel-value-1")), Err(CliError::InvalidConfig(_))));
    let bad = Config::parse("relation = missing.json").unwrap();
    assert!(matches!(run("process-check", &bad), Err(CliError::Core(_))));
    let short = Config::parse("strategy = nonlocal_unbiased\nn = 100").unwrap();
    assert!(matches!(run("pr-inherit", &short), Err(CliError::Core(kausal_core::Error::TooShort { .. }))));
}

#[test]
fn inconsistent_relation_propagates() {
    let cfg = Config::parse("relation = two_way\nrounds = 5000").unwrap();
    assert!(matches!(run("process-run", &cfg), Err(CliError::Core(kausal_core::Error::InconsistentRelation { .. }))));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = root().join("configs/parallel-value-1.conf");
    let ok = kausal(&["parallel-value", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(out.join("report.jsonl").is_file() && out.join("timings.json").is_file());

    let wrong = write_config(tmp.path(), "r = 1\nexpected = 4\n");
    let fail = kausal(&["parallel-value", "--config", wrong.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(fail.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&fail.stdout).contains("FAIL matches_expected"));

    let unknown = write_config(tmp.path(), "r = 1\nbogus = 4\n");
    let err = kausal(&["parallel-value", "--config", unknown.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(err.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&err.stderr).contains("bogus"));

    assert_eq!(kausal(&["nope", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(kausal(&["parallel-value", "--config", "/nonexistent.conf"]).status.code(), Some(1));
}

#[test]
fn threads_env_overrides_flag_and_is_validated() {
    assert_eq!(kausal_cli::thread_count(Some(4), Some("2")).unwrap(), Some(2));
    assert_eq!(kausal_cli::thread_count(Some(4), None).unwrap(), Some(4));
    assert_eq!(kausal_cli::thread_count(None, Some(" ")).unwrap(), None);
    assert!(kausal_cli::thread_count(Some(0), None).is_err());
    assert!(kausal_cli::thread_count(None, Some("many")).is_err());

    let cfg = root().join("configs/parallel-value-1.conf");
    let tmp = tempfile::tempdir().unwrap();
    let bad = Command::new(env!("CARGO_BIN_EXE_kausal"))
        .args(["parallel-value", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap(), "--threads", "2"])
        .env("KAUSAL_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn seed_override_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = root().join("configs/bennett.conf");
    let run_to = |dir: &str, extra: &[&str]| {
        let out = tmp.path().join(dir);
        let mut args = vec!["bennett", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend(extra);
        assert_eq!(kausal(&args).status.code(), Some(0));
        std::fs::read_to_string(out.join("report.jsonl")).unwrap()
    };
    let a = run_to("a", &[]);
    let b = run_to("b", &["--threads", "1"]);
    assert_eq!(a, b);
    let c = run_to("c", &["--seed", "99"]);
    assert_ne!(a, c);
    assert!(c.contains(&kausal_core::bits::Seed::from_u64(99).to_hex()));
    assert_eq!(kausal(&["bennett", "--config", cfg.to_str().unwrap(), "--seed", "x"]).status.code(), Some(1));
}

#[test]
fn golden_flag_verifies_written_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = root().join("configs/grandfather.conf");
    let golden = root().join("goldens/grandfather");
    let args = ["process-check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--golden", golden.to_str().unwrap()];
    let ok = kausal(&args);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    verify_golden(&out, &golden).unwrap();
    assert!(matches!(verify_golden(&out, &root().join("goldens/bennett")), Err(CliError::GoldenMismatch { .. })));
}
