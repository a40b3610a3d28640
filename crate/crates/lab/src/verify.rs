//! The `verify` subcommand: the canonical oracle cross-check as JSON.

use echelon_core::oracle::{run_canonical, CrossCheckReport, Mismatch, OracleError};
use echelon_core::reward::SchemeKind;
use echelon_core::CommScenario;
use serde::Serialize;

/// Mismatches kept per entry; the full count is always reported.
pub const MAX_LISTED: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyEntry {
    pub instance: String,
    pub scenario: CommScenario,
    pub scheme: SchemeKind,
    pub sequences: usize,
    pub steps: usize,
    pub passed: bool,
    pub mismatch_count: usize,
    pub mismatches: Vec<Mismatch>,
}

impl From<CrossCheckReport> for VerifyEntry {
    fn from(r: CrossCheckReport) -> Self {
        let passed = r.passed();
        let mismatch_count = r.mismatches.len();
        let mut mismatches = r.mismatches;
        mismatches.truncate(MAX_LISTED);
        VerifyEntry { instance: r.instance, scenario: r.scenario, scheme: r.scheme, sequences: r.sequences, steps: r.steps, passed, mismatch_count, mismatches }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub entries: Vec<VerifyEntry>,
}

impl VerifyReport {
    pub fn from_reports(reports: Vec<CrossCheckReport>) -> Self {
        let entries: Vec<VerifyEntry> = reports.into_iter().map(VerifyEntry::from).collect();
        VerifyReport { passed: entries.iter().all(|e| e.passed), entries }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn total_mismatches(&self) -> usize {
        self.entries.iter().map(|e| e.mismatch_count).sum()
    }
}

pub fn verify() -> Result<VerifyReport, OracleError> {
    run_canonical().map(VerifyReport::from_reports)
}
