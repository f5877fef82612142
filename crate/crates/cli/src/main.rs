use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kausal_cli::{config::parse_seed, golden, thread_count, CliError, Config, EXIT_ERROR, EXIT_PASS, EXIT_VERDICT_FAIL, THREADS_ENV};

#[derive(Parser)]
#[command(name = "kausal", version, about = "Run a kausal experiment from a config file")]
struct Args {
    /// Experiment name, e.g. process-check.
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to `out_dir` from the config, then `out/<experiment>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<String>,
    /// Compare the written report with a golden directory.
    #[arg(long)]
    golden: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}

fn run(args: &Args) -> Result<i32, CliError> {
    let env = std::env::var(THREADS_ENV).ok();
    if let Some(n) = thread_count(args.threads, env.as_deref())? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::InvalidConfig(format!("thread pool: {e}")))?;
    }
    let mut cfg = Config::load(&args.config)?;
    if let Some(s) = &args.seed {
        if parse_seed(s).is_none() {
            return Err(CliError::InvalidConfig(format!("--seed {s:?} is neither a u64 nor 64 hex digits")));
        }
        cfg.set("seed", s.clone());
    }
    let out = match (&args.out, cfg.get("out_dir")) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => cfg.resolve(o),
        (None, None) => PathBuf::from("out").join(&args.experiment),
    };
    let report = kausal_cli::run(&args.experiment, &cfg)?;
    report.write(&out)?;
    for c in &report.outcome.checks {
        println!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
    }
    println!("report: {}", out.display());
    if let Some(g) = &args.golden {
        golden::verify_golden(&out, g)?;
        println!("golden: match");
    }
    Ok(if report.passed() { EXIT_PASS } else { EXIT_VERDICT_FAIL })
}
