use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde_json::Value;

/// Bad invocation: unknown scenario, malformed or unused parameter, etc.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Raw `--key value` pairs with lookup tracking, so leftovers can be reported.
#[derive(Clone, Debug, Default)]
pub struct Params {
    raw: BTreeMap<String, String>,
    used: BTreeSet<String>,
    resolved: BTreeMap<String, Value>,
}

impl Params {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        Params {
            raw: pairs.into_iter().collect(),
            ..Default::default()
        }
    }

    /// Parses `--key value` and `--key=value` tokens.
    pub fn parse_args(args: &[String]) -> anyhow::Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        let mut it = args.iter();
        while let Some(tok) = it.next() {
            let Some(key) = tok.strip_prefix("--") else {
                return Err(config_err(format!("expected --name, got `{tok}`")));
            };
            if let Some((k, v)) = key.split_once('=') {
                out.push((k.to_string(), v.to_string()));
            } else {
                let v = it.next().ok_or_else(|| config_err(format!("--{key} needs a value")))?;
                out.push((key.to_string(), v.clone()));
            }
        }
        Ok(out)
    }

    /// Reads a flat JSON object of parameters.
    pub fn read_config(path: &Path) -> anyhow::Result<Vec<(String, String)>> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| config_err(format!("bad config JSON: {e}")))?;
        let Value::Object(map) = v else {
            return Err(config_err("config must be a JSON object"));
        };
        map.into_iter()
            .map(|(k, v)| match v {
                Value::String(s) => Ok((k, s)),
                Value::Number(n) => Ok((k, n.to_string())),
                Value::Bool(b) => Ok((k, b.to_string())),
                _ => Err(config_err(format!("config value for `{k}` must be a scalar"))),
            })
            .collect()
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.raw.get(key).cloned()
    }

    pub fn f64(&mut self, key: &str, default: f64) -> anyhow::Result<f64> {
        let v = match self.take(key) {
            None => default,
            Some(s) => s.parse::<f64>().map_err(|_| config_err(format!("--{key}: `{s}` is not a number")))?,
        };
        if !v.is_finite() {
            return Err(config_err(format!("--{key} must be finite")));
        }
        self.resolved.insert(key.into(), Value::from(v));
        Ok(v)
    }

    /// A strictly positive number, used for tolerances and step sizes.
    pub fn positive(&mut self, key: &str, default: f64) -> anyhow::Result<f64> {
        let v = self.f64(key, default)?;
        if v <= 0.0 {
            return Err(config_err(format!("--{key} must be > 0")));
        }
        Ok(v)
    }

    pub fn usize(&mut self, key: &str, default: usize) -> anyhow::Result<usize> {
        let v = match self.take(key) {
            None => default,
            Some(s) => s.parse::<usize>().map_err(|_| config_err(format!("--{key}: `{s}` is not a count")))?,
        };
        self.resolved.insert(key.into(), Value::from(v));
        Ok(v)
    }

    pub fn u64(&mut self, key: &str, default: u64) -> anyhow::Result<u64> {
        let v = match self.take(key) {
            None => default,
            Some(s) => s.parse::<u64>().map_err(|_| config_err(format!("--{key}: `{s}` is not an integer")))?,
        };
        self.resolved.insert(key.into(), Value::from(v));
        Ok(v)
    }

    pub fn choice(&mut self, key: &str, default: &str, allowed: &[&str]) -> anyhow::Result<String> {
        let v = self.take(key).unwrap_or_else(|| default.to_string());
        if !allowed.contains(&v.as_str()) {
            return Err(config_err(format!("--{key} must be one of {}", allowed.join(", "))));
        }
        self.resolved.insert(key.into(), Value::from(v.clone()));
        Ok(v)
    }

    /// A number, or `<x>periods` meaning x times `unit`.
    pub fn scaled(&mut self, key: &str, default_units: f64, unit: f64) -> anyhow::Result<f64> {
        let v = match self.take(key) {
            None => default_units * unit,
            Some(s) => {
                let bad = || config_err(format!("--{key}: `{s}` is not a number or <x>periods"));
                match s.strip_suffix("periods") {
                    Some(x) => x.parse::<f64>().map_err(|_| bad())? * unit,
                    None => s.parse::<f64>().map_err(|_| bad())?,
                }
            }
        };
        if !v.is_finite() {
            return Err(config_err(format!("--{key} must be finite")));
        }
        self.resolved.insert(key.into(), Value::from(v));
        Ok(v)
    }

    /// Fails on any parameter the scenario did not read.
    pub fn finish(&self) -> anyhow::Result<()> {
        let extra: Vec<&String> = self.raw.keys().filter(|k| !self.used.contains(*k)).collect();
        if extra.is_empty() {
            Ok(())
        } else {
            let names: Vec<String> = extra.iter().map(|k| format!("--{k}")).collect();
            Err(config_err(format!("unknown parameter(s) {}", names.join(", "))))
        }
    }

    pub fn resolved(&self) -> &BTreeMap<String, Value> {
        &self.resolved
    }
}
