//! Flat `key = value` configuration with `[section]` headers.
//!
//! Keys inside a section are addressed as `section.key`. Lines starting with
//! `#` or `;` are comments. Values may be wrapped in double quotes.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use kausal_core::bits::Seed;
use kausal_core::complexity::Thresholds;
use kausal_core::compress::{self, Codec};
use sha2::{Digest, Sha256};

use crate::error::{invalid, CliError, Result};

/// Keys every experiment accepts.
pub const COMMON_KEYS: [&str; 2] = ["experiment", "out_dir"];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
    base_dir: PathBuf,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let at = |msg: &str| invalid(format!("line {}: {msg}: {raw:?}", no + 1));
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| at("unterminated section header"))?.trim();
                if !valid_name(name) {
                    return Err(at("bad section name"));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| at("expected key = value"))?;
            let key = key.trim();
            if !valid_name(key) {
                return Err(at("bad key"));
            }
            let value = value.trim();
            let value = value.strip_prefix('"').and_then(|v| v.strip_suffix('"')).unwrap_or(value);
            let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            if entries.insert(full.clone(), value.to_string()).is_some() {
                return Err(at(&format!("duplicate key {full}")));
            }
        }
        Ok(Config { entries, base_dir: PathBuf::from(".") })
    }

    /// Reads a file; relative paths inside it resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Config> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CliError::File { path: path.into(), source })?;
        let mut cfg = Config::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = dir.into();
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    /// Sorted `key = value` lines.
    pub fn canonical(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// SHA-256 of [`Config::canonical`], hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() { p.to_path_buf() } else { self.base_dir.join(p) }
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-')
}

/// Typed, tracked access to a config. Every key read is remembered so that
/// [`Params::finish`] can reject the rest.
pub struct Params<'a> {
    cfg: &'a Config,
    used: RefCell<BTreeSet<String>>,
}

impl<'a> Params<'a> {
    pub fn new(cfg: &'a Config) -> Self {
        Params { cfg, used: RefCell::new(COMMON_KEYS.iter().map(|k| k.to_string()).collect()) }
    }

    pub fn raw(&self, key: &str) -> Option<&'a str> {
        self.used.borrow_mut().insert(key.to_string());
        self.cfg.get(key)
    }

    fn parsed<T>(&self, key: &str, default: T, parse: impl Fn(&str) -> Option<T>, what: &str) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => parse(v).ok_or_else(|| invalid(format!("{key} = {v:?} is not {what}"))),
        }
    }

    pub fn string(&self, key: &str, default: &str) -> String {
        self.raw(key).unwrap_or(default).to_string()
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64> {
        self.parsed(key, default, parse_u64, "a non-negative integer")
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        self.u64(key, default as u64).and_then(|v| usize::try_from(v).map_err(|_| invalid(format!("{key} too large"))))
    }

    pub fn u32(&self, key: &str, default: u32) -> Result<u32> {
        self.u64(key, default as u64).and_then(|v| u32::try_from(v).map_err(|_| invalid(format!("{key} too large"))))
    }

    pub fn opt_u64(&self, key: &str) -> Result<Option<u64>> {
        self.parsed(key, None, |v| parse_u64(v).map(Some), "a non-negative integer")
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        self.parsed(key, default, |v| v.replace('_', "").parse().ok().filter(|x: &f64| x.is_finite()), "a number")
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(_) => self.f64(key, 0.0).map(Some),
        }
    }

    pub fn bool(&self, key: &str, default: bool) -> Result<bool> {
        self.parsed(
            key,
            default,
            |v| match v {
                "true" | "yes" | "1" => Some(true),
                "false" | "no" | "0" => Some(false),
                _ => None,
            },
            "a boolean",
        )
    }

    /// Comma-separated list; empty items are dropped.
    pub fn list(&self, key: &str, default: &[&str]) -> Vec<String> {
        match self.raw(key) {
            None => default.iter().map(|s| s.to_string()).collect(),
            Some(v) => v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect(),
        }
    }

    /// One of `choices`, defaulting to the first.
    pub fn choice(&self, key: &str, choices: &[&str]) -> Result<String> {
        let v = self.string(key, choices[0]);
        if choices.contains(&v.as_str()) {
            Ok(v)
        } else {
            Err(invalid(format!("{key} = {v:?}; expected one of {}", choices.join(", "))))
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(|v| self.cfg.resolve(v))
    }

    /// `seed` as a decimal `u64` or 64 hex digits.
    pub fn seed(&self) -> Result<Seed> {
        let v = self.string("seed", "1");
        parse_seed(&v).ok_or_else(|| invalid(format!("seed = {v:?} is neither a u64 nor 64 hex digits")))
    }

    /// `[thresholds]` section over the defaults.
    pub fn thresholds(&self) -> Result<Thresholds> {
        let d = Thresholds::default();
        let th = Thresholds {
            eps_zero: self.f64("thresholds.eps_zero", d.eps_zero)?,
            eps_incomp: self.f64("thresholds.eps_incomp", d.eps_incomp)?,
            eps_dep: self.f64("thresholds.eps_dep", d.eps_dep)?,
            n_min: self.usize("thresholds.n_min", d.n_min)?,
        };
        th.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(th)
    }

    pub fn compressor(&self) -> Result<Box<dyn Codec>> {
        let id = self.string("compressor", "stack");
        compress::builtin(&id).ok_or_else(|| invalid(format!("unknown compressor {id:?}; expected stack, lz77 or cm")))
    }

    /// Rejects every key that was never read.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self.cfg.entries.keys().filter(|k| !used.contains(*k)).map(String::as_str).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(invalid(format!("unknown keys: {}", unknown.join(", "))))
        }
    }
}

fn parse_u64(v: &str) -> Option<u64> {
    let v = v.replace('_', "");
    if let Ok(x) = v.parse::<u64>() {
        return Some(x);
    }
    // Scientific notation such as 1e5, when it is an exact integer.
    let x: f64 = v.parse().ok()?;
    (x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(53)).then_some(x as u64)
}

pub fn parse_seed(v: &str) -> Option<Seed> {
    if v.len() == 64 && v.chars().all(|c| c.is_ascii_hexdigit()) {
        let mut bytes = [0u8; 32];
        for (i, b) in bytes.iter_mut().enumerate() {
            *b = u8::from_str_radix(&v[2 * i..2 * i + 2], 16).ok()?;
        }
        return Some(Seed(bytes));
    }
    v.replace('_', "").parse::<u64>().ok().map(Seed::from_u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let cfg = Config::parse("# c\nexperiment = fuel\nn = 1e5\n[thresholds]\neps_zero = \"0.04\"\n; done\n").unwrap();
        assert_eq!(cfg.get("thresholds.eps_zero"), Some("0.04"));
        let p = Params::new(&cfg);
        assert_eq!(p.usize("n", 0).unwrap(), 100_000);
        assert_eq!(p.thresholds().unwrap().eps_zero, 0.04);
        p.finish().unwrap();
    }

    #[test]
    fn rejects_malformed_and_unknown() {
        assert!(Config::parse("n 5").is_err());
        assert!(Config::parse("n = 1\nn = 2").is_err());
        assert!(Config::parse("[x\nn = 1").is_err());
        let cfg = Config::parse("n = 5\ntypo = 1").unwrap();
        let p = Params::new(&cfg);
        p.usize("n", 0).unwrap();
        let err = p.finish().unwrap_err().to_string();
        assert!(err.contains("typo"), "{err}");
        assert!(Params::new(&Config::parse("n = 1.5").unwrap()).usize("n", 0).is_err());
    }

    #[test]
    fn hash_ignores_layout() {
        let a = Config::parse("b = 2\na = 1").unwrap();
        let b = Config::parse("# x\na=1\n\nb =  2").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), Config::parse("a = 1\nb = 3").unwrap().hash());
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seed("7"), Some(Seed::from_u64(7)));
        let hex = Seed::from_u64(9).to_hex();
        assert_eq!(parse_seed(&hex), Some(Seed::from_u64(9)));
        assert_eq!(parse_seed("x"), None);
    }
}
