//! Verification reports: flat lists of per-instance check results.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub check: String,
    pub instance: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Report {
    pub entries: Vec<Entry>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn pass(&mut self, check: &str, instance: impl fmt::Display) {
        self.entries.push(Entry {
            check: check.to_string(),
            instance: instance.to_string(),
            status: Status::Pass,
            witness: None,
        });
    }

    pub fn fail(&mut self, check: &str, instance: impl fmt::Display, witness: impl Into<String>) {
        self.entries.push(Entry {
            check: check.to_string(),
            instance: instance.to_string(),
            status: Status::Fail,
            witness: Some(witness.into()),
        });
    }

    pub fn skip(&mut self, check: &str, instance: impl fmt::Display, reason: impl Into<String>) {
        self.entries.push(Entry {
            check: check.to_string(),
            instance: instance.to_string(),
            status: Status::Skip,
            witness: Some(reason.into()),
        });
    }

    /// Records pass or fail depending on `outcome`.
    pub fn record(&mut self, check: &str, instance: impl fmt::Display, outcome: Result<(), String>) {
        match outcome {
            Ok(()) => self.pass(check, instance),
            Err(w) => self.fail(check, instance, w),
        }
    }

    pub fn extend(&mut self, other: Report) {
        self.entries.extend(other.entries);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }

    pub fn all_pass(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn count(&self, check: &str, status: Status) -> usize {
        self.entries
            .iter()
            .filter(|e| e.check == check && e.status == status)
            .count()
    }

    /// Per-check summary lines followed by every failure.
    pub fn to_text(&self) -> String {
        let mut checks: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !checks.contains(&e.check.as_str()) {
                checks.push(&e.check);
            }
        }
        let mut out = String::new();
        for c in &checks {
            let p = self.count(c, Status::Pass);
            let f = self.count(c, Status::Fail);
            let s = self.count(c, Status::Skip);
            let verdict = if f == 0 { "PASS" } else { "FAIL" };
            out.push_str(&format!("{verdict} {c}: {p} passed, {f} failed, {s} skipped\n"));
        }
        for e in self.failures() {
            out.push_str(&format!(
                "  fail {} {}: {}\n",
                e.check,
                e.instance,
                e.witness.as_deref().unwrap_or("")
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let mut r = Report::new();
        r.pass("a", "x");
        r.fail("b", "y", "w");
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(
            s,
            r#"[{"check":"a","instance":"x","status":"pass"},{"check":"b","instance":"y","status":"fail","witness":"w"}]"#
        );
        assert!(!r.all_pass());
        let back: Report = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
