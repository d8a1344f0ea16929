//! Field-by-field reading of a flat JSON config. Every problem is recorded
//! so one run reports all of them at once.

use std::collections::BTreeSet;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use semialg::rational::parse_rational;
use semialg::Rational;

pub struct Fields {
    map: Map<String, Value>,
    used: BTreeSet<String>,
    problems: Vec<String>,
}

impl Fields {
    pub fn new(map: Map<String, Value>) -> Self {
        let mut used = BTreeSet::new();
        used.insert("command".to_string());
        Fields { map, used, problems: Vec::new() }
    }

    pub fn problem(&mut self, msg: impl Into<String>) {
        self.problems.push(msg.into());
    }

    pub fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub fn opt<T: DeserializeOwned>(&mut self, key: &str) -> Option<T> {
        self.used.insert(key.to_string());
        let v = self.map.get(key)?.clone();
        match serde_json::from_value(v) {
            Ok(x) => Some(x),
            Err(e) => {
                self.problems.push(format!("{key}: {e}"));
                None
            }
        }
    }

    pub fn or<T: DeserializeOwned>(&mut self, key: &str, default: T) -> T {
        self.opt(key).unwrap_or(default)
    }

    pub fn req<T: DeserializeOwned>(&mut self, key: &str) -> Option<T> {
        if !self.map.contains_key(key) {
            self.used.insert(key.to_string());
            self.problems.push(format!("{key}: required"));
            return None;
        }
        self.opt(key)
    }

    /// A rational given as a string like `"3/2"` or as an integer.
    pub fn opt_rational(&mut self, key: &str) -> Option<Rational> {
        self.used.insert(key.to_string());
        let parsed = match self.map.get(key)? {
            Value::String(s) => parse_rational(s).map_err(|e| e.to_string()),
            Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(n.as_i64().unwrap().into())),
            other => Err(format!("expected a rational string, found {other}")),
        };
        match parsed {
            Ok(r) => Some(r),
            Err(e) => {
                self.problems.push(format!("{key}: {e}"));
                None
            }
        }
    }

    pub fn req_rational(&mut self, key: &str) -> Option<Rational> {
        if !self.map.contains_key(key) {
            self.used.insert(key.to_string());
            self.problems.push(format!("{key}: required"));
            return None;
        }
        self.opt_rational(key)
    }

    /// Reads the whole map as an internally tagged value, such as a family.
    pub fn tagged<T: DeserializeOwned + Serialize>(&mut self, tag: &str) -> Option<T> {
        self.used.insert(tag.to_string());
        if !self.map.contains_key(tag) {
            self.problems.push(format!("{tag}: required"));
            return None;
        }
        let mut map = self.map.clone();
        map.remove("command");
        match serde_json::from_value::<T>(Value::Object(map)) {
            Ok(x) => {
                if let Ok(Value::Object(m)) = serde_json::to_value(&x) {
                    self.used.extend(m.keys().cloned());
                }
                Some(x)
            }
            Err(e) => {
                self.problems.push(format!("{tag}: {e}"));
                None
            }
        }
    }

    pub fn positive(&mut self, key: &str, value: f64) {
        if value.is_nan() || value <= 0.0 {
            self.problems.push(format!("{key}: must be positive, got {value}"));
        }
    }

    /// Fails with every recorded problem plus any keys nothing asked for.
    pub fn finish(mut self) -> Result<(), Vec<String>> {
        for k in self.map.keys() {
            if !self.used.contains(k) {
                self.problems.push(format!("{k}: unknown field"));
            }
        }
        if self.problems.is_empty() {
            Ok(())
        } else {
            Err(self.problems)
        }
    }
}
