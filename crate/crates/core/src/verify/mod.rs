//! Verification reports.
//!
//! [`check_structure`] checks an extracted structure against its chain and
//! schedule; [`laws`] holds the randomized law suites for the kernel and the
//! dense-set meets. Both produce a [`Report`], which [`render`] turns into a
//! text table or JSON. Exit-code convention for callers: 0 when every check
//! passes, 1 otherwise ([`Report::exit_code`]).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub mod laws;
mod structure;

pub use laws::{check_condition_laws, check_condition_laws_with, dense_meet_contract, oracle_equivalence, Amalgamator};
pub use structure::{
    check_ideal_escape, check_max, check_partition, check_separation, check_structure, check_structure_only,
    check_trace_audit, check_transitivity, IDEAL_ESCAPE_BANNER,
};

/// Failing checks keep at most this many witnesses.
pub const MAX_WITNESSES: usize = 20;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),
    #[error("unknown report format {0:?} (expected \"text\" or \"json\")")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Concrete counterexamples when failing; `null` when passing.
    pub witness: Value,
    /// One line on what was examined.
    #[serde(default)]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Coverage {
    pub separations: usize,
    pub ordinals: usize,
    pub colors: u64,
    /// Scheduled separations per limit ordinal.
    #[serde(default)]
    pub per_lambda: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<Coverage>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    /// Sorts checks by name so assembly order never shows in the output.
    pub fn new(mut checks: Vec<Check>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        Report {
            checks,
            coverage: None,
            notes: Vec::new(),
        }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.checks.len() - self.passed()
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            1
        }
    }
}

/// Collects witnesses for one named check.
pub(crate) struct Tally {
    name: &'static str,
    examined: usize,
    failures: Vec<Value>,
    total_failures: usize,
}

impl Tally {
    pub(crate) fn new(name: &'static str) -> Self {
        Tally {
            name,
            examined: 0,
            failures: Vec::new(),
            total_failures: 0,
        }
    }

    pub(crate) fn examine(&mut self) {
        self.examined += 1;
    }

    pub(crate) fn fail(&mut self, witness: Value) {
        self.total_failures += 1;
        if self.failures.len() < MAX_WITNESSES {
            self.failures.push(witness);
        }
    }

    /// `ok` counts as one examined case; a false `ok` records the witness.
    pub(crate) fn expect(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.examine();
        if !ok {
            self.fail(witness());
        }
    }

    pub(crate) fn finish(self, what: &str) -> Check {
        let pass = self.total_failures == 0;
        Check {
            name: self.name.to_string(),
            pass,
            witness: if pass { Value::Null } else { Value::Array(self.failures) },
            detail: if pass {
                format!("{} {what}", self.examined)
            } else {
                format!("{} of {} {what} failed", self.total_failures, self.examined)
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

impl FromStr for Format {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            other => Err(VerifyError::UnknownFormat(other.to_string())),
        }
    }
}

pub fn render(report: &Report, format: &str) -> Result<String, VerifyError> {
    Ok(match format.parse::<Format>()? {
        Format::Text => render_text(report),
        Format::Json => render_json(report),
    })
}

fn render_text(report: &Report) -> String {
    let mut out = String::new();
    for note in &report.notes {
        let _ = writeln!(out, "# {note}");
    }
    let width = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &report.checks {
        let mark = if c.pass { '✓' } else { '✗' };
        let _ = writeln!(out, "{mark} {:<width$}  {}", c.name, c.detail);
        if !c.pass {
            let _ = writeln!(out, "    witness: {}", c.witness);
        }
    }
    if let Some(cov) = &report.coverage {
        let _ = write!(
            out,
            "coverage: {} separations, {} ordinals, {} colours",
            cov.separations, cov.ordinals, cov.colors
        );
        if !cov.per_lambda.is_empty() {
            let per: Vec<String> = cov.per_lambda.iter().map(|(l, n)| format!("{l}: {n}")).collect();
            let _ = write!(out, " ({})", per.join(", "));
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "{}: {} passed, {} failed",
        if report.pass() { "PASS" } else { "FAIL" },
        report.passed(),
        report.failed()
    );
    out
}

fn render_json(report: &Report) -> String {
    let failures: Vec<Value> = report
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| json!({"name": c.name, "witness": c.witness}))
        .collect();
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| json!({"name": c.name, "pass": c.pass, "witness": c.witness, "detail": c.detail}))
        .collect();
    let mut v = json!({
        "pass": report.pass(),
        "checks": checks,
        "failures": failures,
        "summary": {"passed": report.passed(), "failed": report.failed()},
    });
    if let Some(cov) = &report.coverage {
        v["coverage"] = serde_json::to_value(cov).expect("coverage serializes");
    }
    if !report.notes.is_empty() {
        v["notes"] = json!(report.notes);
    }
    serde_json::to_string_pretty(&v).expect("json value serializes")
}
