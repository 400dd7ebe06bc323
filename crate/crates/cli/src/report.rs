use std::time::Instant;

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub parameters: Value,
    /// Exact or derived quantities worth reading alongside the residuals.
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub values: Map<String, Value>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Collects checks; `finish` sorts them by name and sets the overall flag.
pub struct ReportBuilder {
    scenario: String,
    parameters: Value,
    values: Map<String, Value>,
    checks: Vec<Check>,
    timings: bool,
}

impl ReportBuilder {
    pub fn new(scenario: &str, parameters: Value, timings: bool) -> Self {
        Self {
            scenario: scenario.into(),
            parameters,
            values: Map::new(),
            checks: Vec::new(),
            timings,
        }
    }

    pub fn value(&mut self, key: &str, v: impl Into<Value>) {
        self.values.insert(key.into(), v.into());
    }

    /// Runs `f`, recording its residual against `tolerance` (pass iff
    /// `residual <= tolerance`; a non-finite residual never passes).
    pub fn check<E>(
        &mut self,
        name: &str,
        tolerance: f64,
        f: impl FnOnce() -> Result<f64, E>,
    ) -> Result<f64, E> {
        let start = Instant::now();
        let residual = f()?;
        let runtime_ms = self.timings.then(|| start.elapsed().as_secs_f64() * 1e3);
        let pass = residual.is_finite() && residual <= tolerance;
        self.checks.push(Check {
            name: name.into(),
            residual,
            tolerance,
            pass,
            runtime_ms,
        });
        Ok(residual)
    }

    pub fn finish(mut self) -> Report {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        let pass = self.checks.iter().all(|c| c.pass);
        Report {
            scenario: self.scenario,
            parameters: self.parameters,
            values: self.values,
            checks: self.checks,
            pass,
        }
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
