//! Experiment configuration: plain-text key-value files plus command-line
//! overrides, canonicalized for hashing so identical configurations produce
//! identical artifacts.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone)]
pub struct Config {
    pub experiment: String,
    values: BTreeMap<String, String>,
}

#[derive(Debug)]
pub enum ConfigError {
    Usage(String),
    NotFound(String),
    Malformed(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Usage(s) => write!(f, "usage error: {s}"),
            ConfigError::NotFound(s) => write!(f, "not found: {s}"),
            ConfigError::Malformed(s) => write!(f, "malformed: {s}"),
        }
    }
}

pub const EXPERIMENTS: &[&str] = &[
    "lyapunov",
    "sections",
    "srb",
    "schottky-sections",
    "cusp-integrability",
    "canonical-check",
    "certify",
];

impl Config {
    /// Parse `<experiment> [--key value]...`; `--config <path>` merges a
    /// key-value file (command-line flags win).
    pub fn from_args(args: &[String]) -> Result<Config, ConfigError> {
        let experiment = args
            .first()
            .ok_or_else(|| ConfigError::Usage("missing experiment".into()))?
            .clone();
        if !EXPERIMENTS.contains(&experiment.as_str()) {
            return Err(ConfigError::Usage(format!(
                "unknown experiment `{experiment}` (expected one of {})",
                EXPERIMENTS.join(", ")
            )));
        }
        let mut flags = BTreeMap::new();
        let mut i = 1;
        while i < args.len() {
            let key = args[i]
                .strip_prefix("--")
                .ok_or_else(|| ConfigError::Usage(format!("expected --flag, got `{}`", args[i])))?;
            let value = args
                .get(i + 1)
                .ok_or_else(|| ConfigError::Usage(format!("--{key} needs a value")))?;
            flags.insert(key.to_string(), value.clone());
            i += 2;
        }
        let mut values = BTreeMap::new();
        if let Some(path) = flags.get("config") {
            let text = std::fs::read_to_string(path)
                .map_err(|_| ConfigError::NotFound(format!("config file `{path}`")))?;
            for line in text.lines() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| ConfigError::Malformed(format!("bad config line `{line}`")))?;
                values.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        values.extend(flags);
        values.remove("config");
        Ok(Config { experiment, values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn str_or(&self, key: &str, default: &str) -> String {
        self.get(key).unwrap_or(default).to_string()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError::Malformed(format!("--{key} expects a number, got `{v}`"))),
        }
    }

    /// Like [`f64_or`](Self::f64_or) but rejects non-positive values.
    pub fn positive_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.f64_or(key, default)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(ConfigError::Malformed(format!("--{key} must be positive, got {v}")))
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError::Malformed(format!("--{key} expects a count, got `{v}`"))),
        }
    }

    /// Like [`usize_or`](Self::usize_or) but rejects zero.
    pub fn count_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        let v = self.usize_or(key, default)?;
        if v == 0 {
            Err(ConfigError::Malformed(format!("--{key} must be at least 1")))
        } else {
            Ok(v)
        }
    }

    pub fn seed(&self) -> Result<u64, ConfigError> {
        match self.get("seed") {
            None => Ok(1),
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError::Malformed(format!("--seed expects a u64, got `{v}`"))),
        }
    }

    pub fn out_dir(&self) -> String {
        self.get("out")
            .map(String::from)
            .or_else(|| std::env::var("RICCATI_OUT").ok())
            .unwrap_or_else(|| "out".to_string())
    }

    /// Canonical text of the configuration: experiment plus sorted keys.
    pub fn canonical_text(&self) -> String {
        let mut out = format!("experiment = {}\n", self.experiment);
        for (k, v) in &self.values {
            if k == "out" {
                continue; // output location does not affect results
            }
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    /// FNV-1a hash of the canonical text.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.canonical_text().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}
