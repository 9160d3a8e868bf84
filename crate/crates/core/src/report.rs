use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Outcome of one identity check.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CheckResult {
    pub pass: bool,
    pub residual: f64,
    #[serde(default)]
    pub details: Value,
}

impl CheckResult {
    pub fn new(pass: bool, residual: f64, details: Value) -> Self {
        CheckResult { pass, residual, details }
    }

    /// Passes iff `residual <= tol` (and is not NaN).
    pub fn within(residual: f64, tol: f64, details: Value) -> Self {
        CheckResult { pass: residual <= tol, residual, details }
    }
}

/// Named collection of checks, serialized as `{name: {pass, residual, details}}`.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(transparent)]
pub struct VerificationReport {
    pub checks: BTreeMap<String, CheckResult>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(name: impl Into<String>, result: CheckResult) -> Self {
        let mut r = Self::new();
        r.insert(name, result);
        r
    }

    pub fn insert(&mut self, name: impl Into<String>, result: CheckResult) {
        self.checks.insert(name.into(), result);
    }

    /// Merges `other`, prefixing its names with `prefix.` when non-empty.
    pub fn merge(&mut self, prefix: &str, other: VerificationReport) {
        for (k, v) in other.checks {
            let key = if prefix.is_empty() { k } else { format!("{prefix}.{k}") };
            self.checks.insert(key, v);
        }
    }

    pub fn all_pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.values().all(|c| c.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.values().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.get(name)
    }
}

/// JSON-friendly float: non-finite values become strings.
pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::from(x.to_string())
    }
}
