use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NumericalFailure,
}

/// Everything a command computed, next to its theoretical counterpart.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub config: Value,
    pub theory: Value,
    pub empirics: Value,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn new(command: &str, config: Value) -> Self {
        RunReport {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            status: Status::Ok,
            error: None,
            config,
            theory: Value::Null,
            empirics: Value::Null,
            timings: BTreeMap::new(),
        }
    }

    pub fn failed(mut self, message: &str) -> Self {
        self.status = Status::NumericalFailure;
        self.error = Some(message.to_string());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json() + "\n")?;
        Ok(())
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("value serializes")
}

/// Accumulates named wall-clock phases.
#[derive(Debug, Default)]
pub struct Timings {
    phases: BTreeMap<String, f64>,
}

impl Timings {
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.phases.entry(phase.to_string()).or_default() += start.elapsed().as_secs_f64();
        out
    }

    pub fn into_map(self) -> BTreeMap<String, f64> {
        self.phases
    }
}
