//! Machine-readable verification records.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub parameters: Value,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

impl CheckRecord {
    pub fn new(check: &str, parameters: Value, failure: Option<String>) -> Self {
        let status = if failure.is_some() { Status::Fail } else { Status::Pass };
        CheckRecord { check: check.to_string(), parameters, status, counterexample: failure }
    }

    pub fn pass(check: &str, parameters: Value) -> Self {
        CheckRecord::new(check, parameters, None)
    }

    pub fn fail(check: &str, parameters: Value, why: impl Into<String>) -> Self {
        CheckRecord::new(check, parameters, Some(why.into()))
    }

    /// The reason is recorded under `parameters.reason`.
    pub fn not_applicable(check: &str, mut parameters: Value, why: impl Into<String>) -> Self {
        if let Value::Object(map) = &mut parameters {
            map.insert("reason".into(), Value::String(why.into()));
        }
        CheckRecord { check: check.to_string(), parameters, status: Status::NotApplicable, counterexample: None }
    }

    pub fn from_bool(check: &str, parameters: Value, ok: bool, why: impl FnOnce() -> String) -> Self {
        if ok {
            CheckRecord::pass(check, parameters)
        } else {
            CheckRecord::fail(check, parameters, why())
        }
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

pub fn any_failed(records: &[CheckRecord]) -> bool {
    records.iter().any(CheckRecord::failed)
}
