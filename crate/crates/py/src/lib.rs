//! Python bindings. Structured results come back as plain dicts and lists.

use kausal_core::bits::{sample_incompressible, Seed};
use kausal_core::complexity::{self, Thresholds};
use kausal_core::compress::{self, Codec};
use kausal_core::{nonlocal, poset, process, thermo};
use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn codec(id: &str) -> PyResult<Box<dyn Codec>> {
    compress::builtin(id).ok_or_else(|| err(format!("unknown compressor {id:?}; expected stack, lz77 or cm")))
}

/// Immutable bit string.
#[pyclass(module = "kausal", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
pub struct BitString(pub kausal_core::BitString);

#[pymethods]
impl BitString {
    /// Parses a string of `0` and `1` characters.
    #[new]
    fn new(bits: &str) -> PyResult<Self> {
        kausal_core::BitString::parse(bits).map(BitString).map_err(err)
    }

    #[staticmethod]
    fn zeros(n: usize) -> Self {
        BitString(kausal_core::BitString::zeros(n))
    }

    #[staticmethod]
    fn ones(n: usize) -> Self {
        BitString(kausal_core::BitString::ones(n))
    }

    /// Seeded incompressible string.
    #[staticmethod]
    fn random(n: usize, seed: u64) -> Self {
        BitString(sample_incompressible(n, &Seed::from_u64(seed)))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_ascii()
    }

    fn __repr__(&self) -> String {
        let s = self.0.to_ascii();
        if s.len() <= 64 {
            format!("BitString('{s}')")
        } else {
            format!("BitString(len={}, ones={})", s.len(), self.0.count_ones())
        }
    }

    fn __getitem__(&self, i: isize) -> PyResult<bool> {
        let n = self.0.len() as isize;
        let j = if i < 0 { i + n } else { i };
        if !(0..n).contains(&j) {
            return Err(PyIndexError::new_err("bit index out of range"));
        }
        Ok(self.0.get(j as usize))
    }

    fn count_ones(&self) -> usize {
        self.0.count_ones()
    }

    fn concat(&self, other: &BitString) -> Self {
        BitString(self.0.concat(&other.0))
    }

    fn prefix(&self, n: usize) -> Self {
        BitString(self.0.prefix(n))
    }

    fn invert(&self) -> Self {
        BitString(self.0.not())
    }

    fn xor(&self, other: &BitString) -> PyResult<Self> {
        self.0.xor(&other.0).map(BitString).map_err(err)
    }

    fn and_(&self, other: &BitString) -> PyResult<Self> {
        self.0.and(&other.0).map(BitString).map_err(err)
    }
}

/// Compressed-length estimate of `K(s)` in bits.
#[pyfunction]
#[pyo3(signature = (s, compressor = "stack"))]
fn estimate_k(s: &BitString, compressor: &str) -> PyResult<u64> {
    Ok(complexity::estimate_k(&s.0, codec(compressor)?.as_ref()).value_bits)
}

/// Estimate of `K(s | cond...)` in bits.
#[pyfunction]
#[pyo3(signature = (s, cond, compressor = "stack"))]
fn estimate_k_cond(s: &BitString, cond: Vec<BitString>, compressor: &str) -> PyResult<u64> {
    let parts: Vec<&kausal_core::BitString> = cond.iter().map(|b| &b.0).collect();
    complexity::estimate_k_cond(&s.0, &parts, codec(compressor)?.as_ref(), None).map(|e| e.value_bits).map_err(err)
}

/// PR-box data `(a, b, x, y)`; strategy `nonlocal_unbiased` or `biased` with `p`.
#[pyfunction]
#[pyo3(signature = (n, seed, strategy = "nonlocal_unbiased", p = 0.1))]
fn gen_pr(n: usize, seed: u64, strategy: &str, p: f64) -> PyResult<(BitString, BitString, BitString, BitString)> {
    let s = match strategy {
        "nonlocal_unbiased" => nonlocal::PrStrategy::NonlocalUnbiased,
        "biased" => nonlocal::PrStrategy::Biased { p },
        other => return Err(err(format!("unknown strategy {other:?}"))),
    };
    let (q, _) = nonlocal::gen_pr(n, &Seed::from_u64(seed), &s).map_err(err)?;
    let get = |st: &nonlocal::Strand| BitString(st.bits().expect("pr strands are bits").clone());
    Ok((get(&q.a), get(&q.b), get(&q.x), get(&q.y)))
}

/// No-signaling report for PR data.
#[pyfunction]
#[pyo3(signature = (a, b, x, y, compressor = "stack"))]
fn test_no_signaling<'py>(
    py: Python<'py>,
    a: &BitString,
    b: &BitString,
    x: &BitString,
    y: &BitString,
    compressor: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let q = nonlocal::Quadruple::pr(a.0.clone(), b.0.clone(), x.0.clone(), y.0.clone()).map_err(err)?;
    let r = nonlocal::test_no_signaling(&q, &Thresholds::default(), codec(compressor)?.as_ref()).map_err(err)?;
    to_py(py, &r)
}

/// `(wins, total)` of the best classical strategy for `r` parallel PR games.
#[pyfunction]
fn pr_parallel_value(r: u32) -> PyResult<(u32, u32)> {
    nonlocal::pr_parallel_value(r).map(|v| (v.wins, v.total)).map_err(err)
}

/// Causal poset of named strings, as a dict with `relations` by name.
#[pyfunction]
#[pyo3(signature = (elements, compressor = "stack"))]
fn build_poset<'py>(py: Python<'py>, elements: Vec<(String, BitString)>, compressor: &str) -> PyResult<Bound<'py, PyAny>> {
    let items: Vec<(String, kausal_core::BitString)> = elements.into_iter().map(|(n, b)| (n, b.0)).collect();
    let p = poset::build_poset(&items, &Thresholds::default(), codec(compressor)?.as_ref()).map_err(err)?;
    let d = to_py(py, &p.to_json())?;
    d.cast::<PyDict>()?.set_item("relations", to_py(py, &poset::relation_table(&p))?)?;
    d.cast::<PyDict>()?.set_item("extremes", to_py(py, &p.detect_extremes())?)?;
    Ok(d)
}

/// Lower and upper fuel bounds of `s` given optional side information `x`.
#[pyfunction]
#[pyo3(signature = (s, x = None, compressor = "stack", temperature_k = 300.0))]
fn fuel_bounds<'py>(
    py: Python<'py>,
    s: &BitString,
    x: Option<&BitString>,
    compressor: &str,
    temperature_k: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let empty = kausal_core::BitString::zeros(0);
    let physics = thermo::Physics { temperature_k };
    let r = thermo::fuel_bounds(&s.0, x.map_or(&empty, |b| &b.0), codec(compressor)?.as_ref(), &physics);
    to_py(py, &r)
}

#[pyfunction]
fn structure_function<'py>(py: Python<'py>, s: &BitString) -> PyResult<Bound<'py, PyAny>> {
    let sf = thermo::structure_function(&s.0, &thermo::ModelFamily::ALL).map_err(err)?;
    let d = to_py(py, &sf)?;
    d.cast::<PyDict>()?.set_item("macrostate_name", sf.macrostate.to_string())?;
    Ok(d)
}

/// Runs a seeded random reversible program on `tape`; returns the final
/// tape and the tape recovered by running it backwards.
#[pyfunction]
fn reversible_roundtrip(tape: &BitString, program_len: usize, seed: u64) -> PyResult<(BitString, BitString)> {
    if tape.0.len() < 3 {
        return Err(err("tape needs at least 3 bits"));
    }
    let prog = thermo::random_program(tape.0.len(), program_len, &Seed::from_u64(seed));
    let mut m = thermo::ReversibleMachine::new(tape.0.clone(), prog).map_err(err)?;
    m.run_silent();
    let end = m.tape().clone();
    Ok((BitString(end), BitString(m.invert())))
}

fn relation(spec: &Bound<'_, PyAny>) -> PyResult<process::GlobalRelation> {
    if let Ok(name) = spec.extract::<String>() {
        return match name.as_str() {
            "one_way" => Ok(process::GlobalRelation::one_way()),
            "two_way" => Ok(process::GlobalRelation::two_way()),
            "three_party" => Ok(process::GlobalRelation::three_party_cycle()),
            path => process::GlobalRelation::read(path).map_err(err),
        };
    }
    // {"k": 2, "rows": {"ab": "xy", ...}}
    let text: String = spec.py().import("json")?.call_method1("dumps", (spec,))?.extract()?;
    serde_json::from_str(&text).map_err(err)
}

/// Logical consistency of a relation: a builtin name, a file path or a
/// `{"k", "rows"}` dict.
#[pyfunction]
fn check_consistency<'py>(py: Python<'py>, relation_spec: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let g = relation(relation_spec)?;
    let v = process::check_logical_consistency(&g).map_err(err)?;
    let d = to_py(py, &v)?;
    let failing: Vec<String> = v.failing_combos.iter().map(|c| process::combo_name(c)).collect();
    d.cast::<PyDict>()?.set_item("failing_combo_names", failing)?;
    Ok(d)
}

/// Runs a relation for `rounds` rounds and derives the causal relations.
#[pyfunction]
#[pyo3(signature = (relation_spec, rounds, seed, compressor = "stack"))]
fn derive_relations<'py>(
    py: Python<'py>,
    relation_spec: &Bound<'py, PyAny>,
    rounds: usize,
    seed: u64,
    compressor: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let g = relation(relation_spec)?;
    let c = codec(compressor)?;
    let s = process::run_scenario(&g, &Seed::from_u64(seed), rounds).map_err(err)?;
    let m = process::derive_causal_relations(&s.parties, &Thresholds::default(), c.as_ref()).map_err(err)?;
    let d = to_py(py, &m)?;
    d.cast::<PyDict>()?.set_item("class", to_py(py, &process::classify_scenario(&m))?)?;
    Ok(d)
}

#[pyfunction]
fn census<'py>(py: Python<'py>, k: usize) -> PyResult<Bound<'py, PyAny>> {
    let mut r = process::census(k).map_err(err)?;
    r.per_relation = None;
    to_py(py, &r)
}

/// Runs a named experiment on config text; returns checks, result and verdict.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, experiment: &str, config: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = kausal_cli::Config::parse(config).map_err(err)?;
    let r = kausal_cli::run(experiment, &cfg).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("experiment", &r.experiment)?;
    d.set_item("config_hash", &r.config_hash)?;
    d.set_item("passed", r.passed())?;
    d.set_item("checks", to_py(py, &r.outcome.checks)?)?;
    d.set_item("result", to_py(py, &r.outcome.result)?)?;
    Ok(d.into_any())
}

#[pymodule]
fn kausal(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<BitString>()?;
    m.add_function(wrap_pyfunction!(estimate_k, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_k_cond, m)?)?;
    m.add_function(wrap_pyfunction!(gen_pr, m)?)?;
    m.add_function(wrap_pyfunction!(test_no_signaling, m)?)?;
    m.add_function(wrap_pyfunction!(pr_parallel_value, m)?)?;
    m.add_function(wrap_pyfunction!(build_poset, m)?)?;
    m.add_function(wrap_pyfunction!(fuel_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(structure_function, m)?)?;
    m.add_function(wrap_pyfunction!(reversible_roundtrip, m)?)?;
    m.add_function(wrap_pyfunction!(check_consistency, m)?)?;
    m.add_function(wrap_pyfunction!(derive_relations, m)?)?;
    m.add_function(wrap_pyfunction!(census, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("EXPERIMENTS", kausal_cli::EXPERIMENTS.iter().map(|e| e.name).collect::<Vec<_>>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
