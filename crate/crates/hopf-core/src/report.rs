//! Ordered check reports with per-entry status, evidence, and timing.
//!
//! Every externally visible verification run produces a
//! [`VerificationReport`]: a plan name, an ordered list of entries, and a
//! one-line verdict derived from the entry statuses. Entries carry free-form
//! evidence strings (reduced normal forms, table orders, search bounds) so a
//! report can be audited without re-running anything.

use std::time::Instant;

use serde::Serialize;

/// Outcome of a single named check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// The check ran and the claim holds.
    Pass,
    /// The check ran and the claim is refuted.
    Fail,
    /// The check ran but could neither confirm nor refute the claim.
    Inconclusive,
    /// Not machine-checked: recorded on the strength of a cited result.
    Assumed,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportEntry {
    pub id: String,
    pub description: String,
    pub status: Status,
    pub evidence: String,
    pub elapsed_ms: u64,
}

impl ReportEntry {
    pub fn new(
        id: impl Into<String>,
        description: impl Into<String>,
        status: Status,
        evidence: impl Into<String>,
    ) -> Self {
        ReportEntry {
            id: id.into(),
            description: description.into(),
            status,
            evidence: evidence.into(),
            elapsed_ms: 0,
        }
    }

    /// Runs `body`, recording its wall time on the resulting entry.
    pub fn timed(
        id: impl Into<String>,
        description: impl Into<String>,
        body: impl FnOnce() -> (Status, String),
    ) -> Self {
        let start = Instant::now();
        let (status, evidence) = body();
        let mut entry = ReportEntry::new(id, description, status, evidence);
        entry.elapsed_ms = start.elapsed().as_millis() as u64;
        entry
    }
}

/// Verdict line when every non-assumed entry passes and a witness run
/// completed: the strongest claim a report can make.
pub const VERDICT_WITNESS: &str = "non-Hopfian witness established";
/// Verdict line when every non-assumed entry passes but no witness run was
/// part of the plan.
pub const VERDICT_ALL_PASSED: &str = "all checks passed";
/// Verdict line when at least one entry failed outright.
pub const VERDICT_FAILED: &str = "verification failed";
/// Verdict line when nothing failed but some entry could not conclude.
pub const VERDICT_INCONCLUSIVE: &str = "inconclusive";

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub plan_name: String,
    pub entries: Vec<ReportEntry>,
    pub verdict: String,
}

impl VerificationReport {
    /// Assembles a report, deriving the verdict. `witness_established` is set
    /// by the caller when a full witness pipeline ran to completion; the
    /// strongest verdict additionally requires that no entry failed or came
    /// back inconclusive.
    pub fn assemble(
        plan_name: impl Into<String>,
        entries: Vec<ReportEntry>,
        witness_established: bool,
    ) -> Self {
        for (i, e) in entries.iter().enumerate() {
            assert!(
                entries[..i].iter().all(|p| p.id != e.id),
                "duplicate report entry id {}",
                e.id
            );
        }
        let any_fail = entries.iter().any(|e| e.status == Status::Fail);
        let any_open = entries.iter().any(|e| e.status == Status::Inconclusive);
        let verdict = if any_fail {
            VERDICT_FAILED
        } else if any_open {
            VERDICT_INCONCLUSIVE
        } else if witness_established {
            VERDICT_WITNESS
        } else {
            VERDICT_ALL_PASSED
        };
        VerificationReport {
            plan_name: plan_name.into(),
            entries,
            verdict: verdict.to_string(),
        }
    }

    /// Process exit code for this report: 0 only when nothing failed and
    /// nothing was left inconclusive.
    pub fn exit_code(&self) -> i32 {
        let clean = self
            .entries
            .iter()
            .all(|e| matches!(e.status, Status::Pass | Status::Assumed));
        if clean {
            0
        } else {
            1
        }
    }

    /// Fixed-width human-readable table, one line per entry plus the verdict.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("plan: {}\n", self.plan_name));
        let id_width = self
            .entries
            .iter()
            .map(|e| e.id.len())
            .max()
            .unwrap_or(0)
            .max(2);
        for e in &self.entries {
            let status = match e.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Inconclusive => "inconclusive",
                Status::Assumed => "assumed",
            };
            out.push_str(&format!(
                "{status:<12} {:<id_width$} {:>6} ms  {}\n",
                e.id, e.elapsed_ms, e.evidence
            ));
        }
        out.push_str(&format!("verdict: {}\n", self.verdict));
        out
    }
}
