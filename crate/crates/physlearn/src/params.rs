use std::cell::Cell;

use serde_json::{Map, Value};

use crate::error::RunError;

/// A typed parameter value. Overrides are parsed against the type of the
/// default.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Float(f64),
    Int(u64),
    /// One of a fixed set of names.
    Choice {
        value: &'static str,
        options: &'static [&'static str],
    },
}

impl ParamValue {
    fn parse(&self, key: &str, text: &str) -> Result<ParamValue, RunError> {
        let bad = |reason: String| RunError::BadValue { key: key.to_string(), value: text.to_string(), reason };
        match self {
            ParamValue::Float(_) => match text.trim().parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(ParamValue::Float(x)),
                _ => Err(bad("expected a finite number".into())),
            },
            ParamValue::Int(_) => {
                let t = text.trim();
                if let Ok(n) = t.parse::<u64>() {
                    return Ok(ParamValue::Int(n));
                }
                // Accept integral floats such as 1e5.
                match t.parse::<f64>() {
                    Ok(x) if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64 => {
                        Ok(ParamValue::Int(x as u64))
                    }
                    _ => Err(bad("expected a non-negative integer".into())),
                }
            }
            ParamValue::Choice { options, .. } => options
                .iter()
                .find(|o| **o == text.trim())
                .map(|o| ParamValue::Choice { value: o, options })
                .ok_or_else(|| bad(format!("expected one of {}", options.join(", ")))),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            ParamValue::Float(x) => Value::from(*x),
            ParamValue::Int(n) => Value::from(*n),
            ParamValue::Choice { value, .. } => Value::from(*value),
        }
    }
}

/// Declared parameter of an experiment.
#[derive(Debug, Clone)]
pub struct ParamSpec {
    pub key: &'static str,
    pub default: ParamValue,
    pub help: &'static str,
}

impl ParamSpec {
    pub const fn float(key: &'static str, default: f64, help: &'static str) -> Self {
        Self { key, default: ParamValue::Float(default), help }
    }

    pub const fn int(key: &'static str, default: u64, help: &'static str) -> Self {
        Self { key, default: ParamValue::Int(default), help }
    }

    pub const fn choice(key: &'static str, options: &'static [&'static str], help: &'static str) -> Self {
        Self { key, default: ParamValue::Choice { value: options[0], options }, help }
    }
}

/// Resolved parameters of one run. Reads are recorded so that tests can
/// check that every declared parameter is consumed.
#[derive(Debug)]
pub struct Params {
    entries: Vec<(ParamSpec, ParamValue, Cell<bool>)>,
}

impl Params {
    /// Applies `overrides` in order on top of the defaults. Unknown keys are
    /// rejected with the closest declared names.
    pub fn resolve(experiment: &str, specs: Vec<ParamSpec>, overrides: &[(String, String)]) -> Result<Self, RunError> {
        let mut entries: Vec<(ParamSpec, ParamValue, Cell<bool>)> = specs
            .into_iter()
            .map(|s| {
                let v = s.default.clone();
                (s, v, Cell::new(false))
            })
            .collect();
        for (key, text) in overrides {
            let Some(entry) = entries.iter_mut().find(|e| e.0.key == key) else {
                let names: Vec<&str> = entries.iter().map(|e| e.0.key).collect();
                return Err(RunError::UnknownParameter {
                    experiment: experiment.to_string(),
                    key: key.clone(),
                    suggestions: nearest(key, &names),
                });
            };
            entry.1 = entry.0.default.parse(key, text)?;
        }
        Ok(Self { entries })
    }

    fn get(&self, key: &str) -> &ParamValue {
        let entry = self
            .entries
            .iter()
            .find(|e| e.0.key == key)
            .unwrap_or_else(|| panic!("experiment reads undeclared parameter `{key}`"));
        entry.2.set(true);
        &entry.1
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.get(key) {
            ParamValue::Float(x) => *x,
            ParamValue::Int(n) => *n as f64,
            other => panic!("parameter `{key}` is not numeric: {other:?}"),
        }
    }

    pub fn int(&self, key: &str) -> u64 {
        match self.get(key) {
            ParamValue::Int(n) => *n,
            other => panic!("parameter `{key}` is not an integer: {other:?}"),
        }
    }

    pub fn count(&self, key: &str) -> usize {
        self.int(key) as usize
    }

    pub fn choice(&self, key: &str) -> &'static str {
        match self.get(key) {
            ParamValue::Choice { value, .. } => value,
            other => panic!("parameter `{key}` is not a choice: {other:?}"),
        }
    }

    /// Declared keys that the run never read.
    pub fn unread(&self) -> Vec<&'static str> {
        self.entries.iter().filter(|e| !e.2.get()).map(|e| e.0.key).collect()
    }

    pub fn specs(&self) -> impl Iterator<Item = (&ParamSpec, &ParamValue)> {
        self.entries.iter().map(|e| (&e.0, &e.1))
    }

    pub fn to_json(&self) -> Map<String, Value> {
        self.entries.iter().map(|e| (e.0.key.to_string(), e.1.to_json())).collect()
    }
}

/// Up to three candidates ranked by edit similarity, best first.
pub(crate) fn nearest(target: &str, candidates: &[&str]) -> Vec<String> {
    let mut scored: Vec<(f64, &str)> = candidates
        .iter()
        .map(|c| (strsim::normalized_damerau_levenshtein(target, c), *c))
        .filter(|(s, c)| *s >= 0.4 || c.contains(target) || target.contains(c))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    scored.into_iter().take(3).map(|(_, c)| c.to_string()).collect()
}

/// Parses one `key=value` override.
pub(crate) fn parse_override(text: &str) -> Result<(String, String), RunError> {
    match text.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(RunError::MalformedOverride(text.to_string())),
    }
}

/// Reads a flat JSON object of parameter values into overrides.
pub(crate) fn overrides_from_json(path: &std::path::Path, text: &str) -> Result<Vec<(String, String)>, RunError> {
    let fail = |reason: String| RunError::ConfigFile { path: path.to_path_buf(), reason };
    let value: Value = serde_json::from_str(text).map_err(|e| fail(e.to_string()))?;
    let Value::Object(map) = value else {
        return Err(fail("expected a JSON object of key-value pairs".into()));
    };
    map.into_iter()
        .map(|(k, v)| match v {
            Value::Number(n) => Ok((k, n.to_string())),
            Value::String(s) => Ok((k, s)),
            other => Err(fail(format!("value of `{k}` must be a number or string, found {other}"))),
        })
        .collect()
}
