//! Key=value config handling and the parameter resolver.
//!
//! A run's parameters come from an optional plain-text config file overlaid
//! by command-line flags (flags win). The resolver hands out typed values,
//! records every resolved parameter (defaults included) for the envelope
//! echo, and tracks which keys were consumed so that unknown keys can be
//! rejected instead of silently ignored.

use anoslab_core::{Error, Result};
use serde_json::{json, Map, Value};
use std::collections::{BTreeMap, BTreeSet};

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

/// Parses the config file format: one `key=value` per line, blank lines and
/// full-line `#` comments allowed, duplicate keys rejected.
pub fn parse_config_file(text: &str, origin: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(invalid(format!(
                "{origin}:{}: expected key=value, got {line:?}",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(invalid(format!("{origin}:{}: empty key", lineno + 1)));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(invalid(format!(
                "{origin}:{}: duplicate key {key:?}",
                lineno + 1
            )));
        }
    }
    Ok(map)
}

/// Resolved resource budgets, echoed under `params.budgets`.
#[derive(Debug, Clone, Copy)]
pub struct Budgets {
    pub max_words: u64,
    pub max_orbits: u64,
    pub grid: u64,
    pub time_limit_s: f64,
}

/// Resolved output routing, echoed under `params.output`.
#[derive(Debug, Clone, PartialEq)]
pub enum OutFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone)]
pub struct Output {
    pub format: OutFormat,
    pub path: Option<String>,
}

pub struct Resolver {
    map: BTreeMap<String, String>,
    used: BTreeSet<String>,
    echo: Map<String, Value>,
    pub budgets: Budgets,
    pub output: Output,
    /// Set when a budget clamped the requested work; drives exit status 3.
    pub budget_exhausted: bool,
    pub notes: Vec<String>,
}

impl Resolver {
    /// Merges config-file values under command-line values and resolves the
    /// common keys (output routing and budgets) right away.
    pub fn new(
        command: &str,
        cli: BTreeMap<String, String>,
        file: BTreeMap<String, String>,
    ) -> Result<Resolver> {
        let mut map = file;
        for (k, v) in cli {
            map.insert(k, v);
        }
        let mut r = Resolver {
            map,
            used: BTreeSet::new(),
            echo: Map::new(),
            budgets: Budgets {
                max_words: 0,
                max_orbits: 0,
                grid: 0,
                time_limit_s: 0.0,
            },
            output: Output {
                format: OutFormat::Json,
                path: None,
            },
            budget_exhausted: false,
            notes: Vec::new(),
        };
        if let Some(c) = r.take("command") {
            if c != command {
                return Err(invalid(format!(
                    "config file names command {c:?} but {command:?} was invoked"
                )));
            }
        }
        r.budgets = Budgets {
            max_words: r.u64_in("max-words", 10_000_000, 1, u64::MAX)?,
            max_orbits: r.u64_in("max-orbits", 1_000_000, 1, u64::MAX)?,
            grid: r.u64_in("max-grid", 501, 1, u64::MAX)?,
            time_limit_s: r.f64_default("time-limit-s", 600.0)?,
        };
        if !(r.budgets.time_limit_s > 0.0 && r.budgets.time_limit_s.is_finite()) {
            return Err(invalid("time-limit-s must be positive and finite"));
        }
        let format = match r.take("format").as_deref() {
            None | Some("json") => OutFormat::Json,
            Some("csv") => OutFormat::Csv,
            Some(other) => {
                return Err(invalid(format!(
                    "format must be json or csv, got {other:?}"
                )))
            }
        };
        let path = r.take("path");
        if format == OutFormat::Csv && path.is_none() {
            return Err(invalid("format=csv needs a --path for the payload file"));
        }
        r.output = Output { format, path };
        Ok(r)
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.map.get(key).cloned()
    }

    fn record(&mut self, key: &str, v: Value) {
        self.echo.insert(key.to_string(), v);
    }

    /// Adds a value to the echo directly, for parameters a command resolves
    /// itself (computed defaults and the like).
    pub fn record_value(&mut self, key: &str, v: Value) {
        self.record(key, v);
    }

    /// The full parameter echo: budgets, output, then the flat entries.
    pub fn params_echo(&self) -> Value {
        let mut top = Map::new();
        top.insert(
            "budgets".into(),
            json!({
                "max_words": self.budgets.max_words,
                "max_orbits": self.budgets.max_orbits,
                "grid": self.budgets.grid,
                "time_limit_s": self.budgets.time_limit_s,
            }),
        );
        top.insert(
            "output".into(),
            json!({
                "format": match self.output.format { OutFormat::Json => "json", OutFormat::Csv => "csv" },
                "path": self.output.path,
            }),
        );
        for (k, v) in &self.echo {
            // Budget keys already sit structured under "budgets".
            if matches!(
                k.as_str(),
                "max-words" | "max-orbits" | "max-grid" | "time-limit-s"
            ) {
                continue;
            }
            top.insert(k.clone(), v.clone());
        }
        Value::Object(top)
    }

    /// Errors on any key that no resolver call consumed.
    pub fn reject_unknown(&self) -> Result<()> {
        let unknown: Vec<&String> = self
            .map
            .keys()
            .filter(|k| !self.used.contains(*k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(invalid(format!(
                "unknown parameter key{} {}",
                if unknown.len() == 1 { "" } else { "s" },
                unknown
                    .iter()
                    .map(|k| format!("{k:?}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )))
        }
    }

    /// Marks a budget clamp: remembers the note and flags the exit status.
    pub fn clamp(&mut self, msg: impl Into<String>) {
        self.budget_exhausted = true;
        self.notes.push(msg.into());
    }

    // ----- typed getters; each records the resolved value ------------------

    pub fn str_required(&mut self, key: &str) -> Result<String> {
        let v = self
            .take(key)
            .ok_or_else(|| invalid(format!("missing required parameter {key:?}")))?;
        self.record(key, Value::String(v.clone()));
        Ok(v)
    }

    pub fn str_optional(&mut self, key: &str) -> Option<String> {
        let v = self.take(key);
        self.record(
            key,
            v.as_ref().map_or(Value::Null, |s| Value::String(s.clone())),
        );
        v
    }

    pub fn f64_required(&mut self, key: &str) -> Result<f64> {
        let raw = self
            .take(key)
            .ok_or_else(|| invalid(format!("missing required parameter {key:?}")))?;
        let v = parse_f64(key, &raw)?;
        self.record(key, json!(v));
        Ok(v)
    }

    pub fn f64_default(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = match self.take(key) {
            Some(raw) => parse_f64(key, &raw)?,
            None => default,
        };
        self.record(key, json!(v));
        Ok(v)
    }

    pub fn f64_optional(&mut self, key: &str) -> Result<Option<f64>> {
        let v = match self.take(key) {
            Some(raw) => Some(parse_f64(key, &raw)?),
            None => None,
        };
        self.record(key, v.map_or(Value::Null, |x| json!(x)));
        Ok(v)
    }

    pub fn u64_in(&mut self, key: &str, default: u64, lo: u64, hi: u64) -> Result<u64> {
        let v = match self.take(key) {
            Some(raw) => raw
                .parse::<u64>()
                .map_err(|_| invalid(format!("{key} must be an unsigned integer, got {raw:?}")))?,
            None => default,
        };
        if v < lo || v > hi {
            return Err(invalid(format!("{key} must be in {lo}..={hi}, got {v}")));
        }
        self.record(key, json!(v));
        Ok(v)
    }

    pub fn u32_in(&mut self, key: &str, default: u32, lo: u32, hi: u32) -> Result<u32> {
        Ok(self.u64_in(key, default as u64, lo as u64, hi as u64)? as u32)
    }

    pub fn usize_in(&mut self, key: &str, default: usize, lo: usize, hi: usize) -> Result<usize> {
        Ok(self.u64_in(key, default as u64, lo as u64, hi as u64)? as usize)
    }

    pub fn seed_required(&mut self, key: &str) -> Result<u64> {
        let raw = self.take(key).ok_or_else(|| {
            invalid(format!(
                "this command samples; the {key} parameter is mandatory"
            ))
        })?;
        let v = raw
            .parse::<u64>()
            .map_err(|_| invalid(format!("{key} must be an unsigned integer, got {raw:?}")))?;
        self.record(key, json!(v));
        Ok(v)
    }

    /// Four comma-separated reals.
    pub fn vec4(&mut self, key: &str, default: Option<[f64; 4]>) -> Result<[f64; 4]> {
        let v = match (self.take(key), default) {
            (Some(raw), _) => {
                let parts = split_n(key, &raw, 4)?;
                let mut out = [0.0; 4];
                for (slot, p) in out.iter_mut().zip(&parts) {
                    *slot = parse_f64(key, p)?;
                }
                out
            }
            (None, Some(d)) => d,
            (None, None) => return Err(invalid(format!("missing required parameter {key:?}"))),
        };
        self.record(key, json!(v));
        Ok(v)
    }

    /// Integer 2x2 matrix "a,b,c,d" read row major.
    pub fn mat2(&mut self, key: &str, default: [[i64; 2]; 2]) -> Result<[[i64; 2]; 2]> {
        let v = match self.take(key) {
            Some(raw) => {
                let parts = split_n(key, &raw, 4)?;
                let mut flat = [0i64; 4];
                for (slot, p) in flat.iter_mut().zip(&parts) {
                    *slot = p
                        .parse::<i64>()
                        .map_err(|_| invalid(format!("{key} entries must be integers, got {p:?}")))?;
                }
                [[flat[0], flat[1]], [flat[2], flat[3]]]
            }
            None => default,
        };
        self.record(key, json!(v));
        Ok(v)
    }

    /// Two comma-separated axis indices.
    pub fn axes(&mut self, key: &str, default: [usize; 2]) -> Result<[usize; 2]> {
        let v = match self.take(key) {
            Some(raw) => {
                let parts = split_n(key, &raw, 2)?;
                let mut out = [0usize; 2];
                for (slot, p) in out.iter_mut().zip(&parts) {
                    *slot = p
                        .parse::<usize>()
                        .map_err(|_| invalid(format!("{key} must hold axis indices, got {p:?}")))?;
                }
                out
            }
            None => default,
        };
        self.record(key, json!(v));
        Ok(v)
    }

    /// "lo,hi" real pair.
    pub fn pair_f64(&mut self, key: &str, default: (f64, f64)) -> Result<(f64, f64)> {
        let v = match self.take(key) {
            Some(raw) => {
                let parts = split_n(key, &raw, 2)?;
                (parse_f64(key, &parts[0])?, parse_f64(key, &parts[1])?)
            }
            None => default,
        };
        self.record(key, json!([v.0, v.1]));
        Ok(v)
    }
}

fn parse_f64(key: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| invalid(format!("{key} must be a real number, got {raw:?}")))?;
    if !v.is_finite() {
        return Err(invalid(format!("{key} must be finite, got {raw:?}")));
    }
    Ok(v)
}

fn split_n(key: &str, raw: &str, n: usize) -> Result<Vec<String>> {
    let parts: Vec<String> = raw.split(',').map(|p| p.trim().to_string()).collect();
    if parts.len() != n {
        return Err(invalid(format!(
            "{key} needs {n} comma-separated values, got {:?}",
            raw
        )));
    }
    Ok(parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines_parse_and_duplicates_fail() {
        let map = parse_config_file("# c\n a = 1 \nb=x=y\n\n", "t").unwrap();
        assert_eq!(map.get("a").map(String::as_str), Some("1"));
        assert_eq!(map.get("b").map(String::as_str), Some("x=y"));
        assert!(parse_config_file("a=1\na=2", "t").is_err());
        assert!(parse_config_file("=v", "t").is_err());
        assert!(parse_config_file("novalue", "t").is_err());
    }

    #[test]
    fn cli_overrides_file_and_unknown_keys_are_rejected() {
        let file = parse_config_file("maxlen=3\nstray=1", "t").unwrap();
        let cli = BTreeMap::from([("maxlen".to_string(), "5".to_string())]);
        let mut r = Resolver::new("spectrum", cli, file).unwrap();
        assert_eq!(r.usize_in("maxlen", 4, 1, 10).unwrap(), 5);
        let err = r.reject_unknown().unwrap_err();
        assert!(err.to_string().contains("stray"));
    }

    #[test]
    fn command_key_must_match_the_invoked_command() {
        let file = parse_config_file("command=entropy", "t").unwrap();
        assert!(Resolver::new("length", BTreeMap::new(), file).is_err());
        let file = parse_config_file("command=length", "t").unwrap();
        assert!(Resolver::new("length", BTreeMap::new(), file).is_ok());
    }

    #[test]
    fn budgets_must_be_positive() {
        let file = parse_config_file("max-words=0", "t").unwrap();
        assert!(Resolver::new("spectrum", BTreeMap::new(), file).is_err());
        let file = parse_config_file("time-limit-s=-1", "t").unwrap();
        assert!(Resolver::new("spectrum", BTreeMap::new(), file).is_err());
    }

    #[test]
    fn csv_without_path_is_invalid() {
        let file = parse_config_file("format=csv", "t").unwrap();
        assert!(Resolver::new("spectrum", BTreeMap::new(), file).is_err());
    }
}
