//! Report data model shared by the verification suites and the CLI. Reports
//! are deterministic for a fixed `(config, seed)` pair: all sampling is
//! stream-keyed and all collections iterate in a fixed order.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportStatus {
    Pass,
    Fail,
    /// The check failed as expected for a report-mode run and measured a
    /// defect phase; does not gate the exit code.
    Defect,
}

/// Outcome of one named check: pass/fail, how many samples ran, the first
/// counterexample found, and a defect phase (exact rational angle) when the
/// check measured one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: String,
    pub status: ReportStatus,
    pub samples: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defect_phase: Option<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.status == ReportStatus::Pass
    }

    /// A check gates the run unless it is a measured report-mode defect.
    pub fn gate_ok(&self) -> bool {
        self.status != ReportStatus::Fail
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn new(name: impl Into<String>) -> Self {
        SuiteReport {
            name: name.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: CheckReport) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckReport::passed)
    }

    /// All checks pass or are measured defects.
    pub fn gate_passed(&self) -> bool {
        self.checks.iter().all(CheckReport::gate_ok)
    }

    pub fn find(&self, id: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.id == id)
    }
}

/// Accumulator for a single check across samples; records the first
/// counterexample and the first observed defect phase.
#[derive(Debug)]
pub struct Check {
    id: String,
    samples: u64,
    failures: u64,
    counterexample: Option<String>,
    defect_phase: Option<String>,
}

impl Check {
    pub fn new(id: impl Into<String>) -> Self {
        Check {
            id: id.into(),
            samples: 0,
            failures: 0,
            counterexample: None,
            defect_phase: None,
        }
    }

    pub fn record(&mut self, ok: bool, counterexample: impl FnOnce() -> String) {
        self.samples += 1;
        if !ok {
            self.failures += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(counterexample());
            }
        }
    }

    /// Like [`Check::record`], also capturing the defect phase of the first
    /// failing sample.
    pub fn record_with_defect(
        &mut self,
        ok: bool,
        counterexample: impl FnOnce() -> String,
        defect: impl FnOnce() -> String,
    ) {
        if !ok && self.defect_phase.is_none() {
            self.defect_phase = Some(defect());
        }
        self.record(ok, counterexample);
    }

    pub fn ok_so_far(&self) -> bool {
        self.failures == 0
    }

    pub fn finish(self) -> CheckReport {
        self.finish_with(ReportStatus::Fail)
    }

    /// Finishes with `fail_status` on failure: `Defect` for report-mode
    /// checks whose failures carry measured phases, `Fail` otherwise.
    pub fn finish_with(self, fail_status: ReportStatus) -> CheckReport {
        CheckReport {
            id: self.id,
            status: if self.failures == 0 {
                ReportStatus::Pass
            } else {
                fail_status
            },
            samples: self.samples,
            counterexample: self.counterexample,
            defect_phase: self.defect_phase,
        }
    }
}
