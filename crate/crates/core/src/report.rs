//! Check reports shared by every verifier and the command line.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Error;
use crate::symexpr::SampleOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub id: String,
    pub status: Status,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub entries: Vec<CheckEntry>,
}

impl Report {
    pub fn new(suite: &str) -> Report {
        Report { suite: suite.to_string(), entries: Vec::new() }
    }

    pub fn push(&mut self, entry: CheckEntry) {
        self.entries.push(entry);
    }

    pub fn record(&mut self, id: impl Into<String>, outcome: &SampleOutcome) {
        self.push(CheckEntry {
            id: id.into(),
            status: if outcome.pass { Status::Pass } else { Status::Fail },
            residual: outcome.max_residual,
            witness: if outcome.pass { None } else { outcome.witness.as_ref().map(|p| p.to_string()) },
            note: None,
            wall_ms: None,
        });
    }

    /// Records a sampled outcome, turning an error into a failing entry.
    pub fn record_result(&mut self, id: impl Into<String>, outcome: Result<SampleOutcome, Error>) {
        match outcome {
            Ok(o) => self.record(id, &o),
            Err(e) => self.fail(id, f64::NAN, None, &e.to_string()),
        }
    }

    pub fn pass(&mut self, id: impl Into<String>, residual: f64) {
        self.push(CheckEntry {
            id: id.into(),
            status: Status::Pass,
            residual,
            witness: None,
            note: None,
            wall_ms: None,
        });
    }

    pub fn fail(&mut self, id: impl Into<String>, residual: f64, witness: Option<String>, note: &str) {
        self.push(CheckEntry {
            id: id.into(),
            status: Status::Fail,
            residual,
            witness,
            note: Some(note.to_string()),
            wall_ms: None,
        });
    }

    pub fn skip(&mut self, id: impl Into<String>, reason: &str) {
        self.push(CheckEntry {
            id: id.into(),
            status: Status::Skip,
            residual: 0.0,
            witness: None,
            note: Some(reason.to_string()),
            wall_ms: None,
        });
    }

    /// Records a boolean condition with a residual.
    pub fn check(&mut self, id: impl Into<String>, ok: bool, residual: f64, note: &str) {
        if ok {
            self.pass(id, residual);
        } else {
            self.fail(id, residual, None, note);
        }
    }

    /// Appends another report's entries, prefixing their ids.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for mut e in other.entries {
            if !prefix.is_empty() {
                e.id = format!("{}.{}", prefix, e.id);
            }
            self.entries.push(e);
        }
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }

    pub fn max_residual(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.status != Status::Skip)
            .map(|e| if e.residual.is_nan() { f64::INFINITY } else { e.residual })
            .fold(0.0, f64::max)
    }

    pub fn get(&self, id: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Sorts entries by id; the sort is stable so equal ids keep their order.
    pub fn sort(&mut self) {
        self.entries.sort_by(|a, b| a.id.cmp(&b.id));
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = write!(out, "{:<4} {} residual={:.3e}", e.status.as_str(), e.id, e.residual);
            if let Some(w) = &e.witness {
                let _ = write!(out, " witness={}", w);
            }
            if let Some(n) = &e.note {
                let _ = write!(out, " note=\"{}\"", n);
            }
            if let Some(t) = e.wall_ms {
                let _ = write!(out, " wall_ms={:.1}", t);
            }
            out.push('\n');
        }
        let fails = self.failures().count();
        let skips = self.entries.iter().filter(|e| e.status == Status::Skip).count();
        let _ =
            writeln!(out, "suite {}: {} checks, {} failed, {} skipped", self.suite, self.entries.len(), fails, skips);
        out
    }

    /// One JSON object per check.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let mut v = serde_json::to_value(e).expect("entry serializes");
            if let serde_json::Value::Object(m) = &mut v {
                m.insert("suite".into(), self.suite.clone().into());
                if e.residual.is_nan() {
                    m.insert("residual".into(), serde_json::Value::Null);
                }
            }
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }
}
