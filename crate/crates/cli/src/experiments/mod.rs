mod nonlocal;
mod poset;
mod process;
mod thermo;

use kausal_core::bits::Seed;

use crate::config::{Config, Params};
use crate::error::{invalid, CliError, Result};
use crate::report::{Outcome, RunReport};

pub struct Experiment {
    pub name: &'static str,
    pub about: &'static str,
    run: fn(&Params, &Seed) -> Result<Outcome>,
}

pub const EXPERIMENTS: &[Experiment] = &[
    Experiment { name: "pr-inherit", about: "complexity of PR-box outputs, or collapse under local strategies", run: nonlocal::pr_inherit },
    Experiment { name: "chained-bell", about: "chained Bell statistics and masked conditional complexity", run: nonlocal::chained_bell },
    Experiment { name: "magic-square", about: "classical magic-square value and replay", run: nonlocal::magic_square },
    Experiment { name: "parallel-value", about: "classical value of the r-fold parallel PR game", run: nonlocal::parallel_value },
    Experiment { name: "poset-build", about: "causal order on a set of strings", run: poset::poset_build },
    Experiment { name: "triviality", about: "deterministic sets with a big bang collapse to one class", run: poset::triviality },
    Experiment { name: "fuel", about: "fuel value bounds", run: thermo::fuel },
    Experiment { name: "bennett", about: "work extraction on a reversible tape", run: thermo::bennett },
    Experiment { name: "structure-fn", about: "structure function and macrostate", run: thermo::structure_fn },
    Experiment { name: "second-law", about: "reversibility and the complexity second law", run: thermo::second_law },
    Experiment { name: "mixing-demo", about: "macrostate growth while two species mix", run: thermo::mixing_demo },
    Experiment { name: "process-check", about: "logical consistency of a global relation", run: process::process_check },
    Experiment { name: "process-run", about: "seeded runs and derived causal relations", run: process::process_run },
    Experiment { name: "census", about: "classification of every bit-wise relation on k parties", run: process::census },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}

/// Runs `experiment` on `cfg`. A config naming a different experiment is rejected.
pub fn run(experiment: &str, cfg: &Config) -> Result<RunReport> {
    let exp = find(experiment).ok_or_else(|| CliError::UnknownExperiment(experiment.to_string()))?;
    if let Some(named) = cfg.get("experiment") {
        if named != experiment {
            return Err(invalid(format!("config is for experiment {named:?}, not {experiment:?}")));
        }
    }
    let params = Params::new(cfg);
    let seed = params.seed()?;
    let outcome = (exp.run)(&params, &seed)?;
    Ok(RunReport {
        experiment: experiment.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: cfg.hash(),
        seed: seed.to_hex(),
        outcome,
    })
}
