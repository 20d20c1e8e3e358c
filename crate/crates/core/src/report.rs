//! Machine-readable run reports and the exit-code contract.
//!
//! Notes carry a tag prefix. `DOMAIN:` marks a declared skip of a gated
//! parameter combination, `PAPER_LITERAL:` and `PAPER:` mark deviations of
//! printed statements that were reported rather than asserted, and `INFO:`
//! is plain commentary. Only the two paper tags turn a pass into exit 2.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::fock::FockSpace;
use crate::higgs::{Residual, ResidualReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_NOTES: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INVALID: i32 = 65;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    PassWithNotes,
    Fail,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => EXIT_PASS,
            Status::PassWithNotes => EXIT_NOTES,
            Status::Fail => EXIT_FAIL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub space: Option<FockSpace>,
    pub windows: Vec<String>,
    pub residuals: Vec<Residual>,
    pub domain: Option<Value>,
    pub notes: Vec<String>,
    /// Errors that are not declared skips (e.g. an unexpected DOMAIN error).
    pub errors: Vec<String>,
    pub status: Status,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            params: BTreeMap::new(),
            space: None,
            windows: Vec::new(),
            residuals: Vec::new(),
            domain: None,
            notes: Vec::new(),
            errors: Vec::new(),
            status: Status::Pass,
        }
    }

    pub fn param(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.params.insert(key.to_string(), serde_json::to_value(v).expect("serializable"));
        self
    }

    pub fn window(&mut self, label: impl Into<String>) {
        let label = label.into();
        if !self.windows.contains(&label) {
            self.windows.push(label);
        }
    }

    /// Adds the residuals of `rep`, each name prefixed with `ctx`.
    pub fn absorb(&mut self, ctx: &str, rep: ResidualReport) {
        self.window(rep.window.clone());
        for mut r in rep.residuals {
            if !ctx.is_empty() {
                r.name = format!("{ctx}: {}", r.name);
            }
            self.residuals.push(r);
        }
        self.refresh();
    }

    pub fn residual(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.residuals.push(Residual::new(name, value, tolerance));
        self.refresh();
    }

    pub fn note(&mut self, tag: &str, msg: impl std::fmt::Display) {
        self.notes.push(format!("{tag}: {msg}"));
        self.refresh();
    }

    pub fn error(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
        self.refresh();
    }

    /// Folds a sub-report into this one; the sub-report's params are
    /// dropped, its domain kept under its command name.
    pub fn merge(&mut self, sub: Report) {
        let ctx = sub.command.clone();
        for w in sub.windows {
            self.window(w);
        }
        for mut r in sub.residuals {
            r.name = format!("{ctx} {}", r.name);
            self.residuals.push(r);
        }
        self.notes.extend(sub.notes.into_iter().map(|n| format!("{ctx} {n}")));
        self.errors.extend(sub.errors.into_iter().map(|e| format!("{ctx}: {e}")));
        if let Some(d) = sub.domain {
            let slot = self.domain.get_or_insert_with(|| Value::Object(Default::default()));
            if let Value::Object(m) = slot {
                m.insert(ctx, d);
            }
        }
        self.refresh();
    }

    pub fn has_paper_notes(&self) -> bool {
        self.notes.iter().any(|n| is_paper_note(n))
    }

    fn refresh(&mut self) {
        self.status = if !self.errors.is_empty() || self.residuals.iter().any(|r| !r.pass) {
            Status::Fail
        } else if self.has_paper_notes() {
            Status::PassWithNotes
        } else {
            Status::Pass
        };
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// True for a note that reports a printed statement not reproduced.
pub fn is_paper_note(n: &str) -> bool {
    n.split_whitespace().any(|w| w == "PAPER:" || w == "PAPER_LITERAL:")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_follows_residuals_and_notes() {
        let mut r = Report::new("x");
        assert_eq!(r.exit_code(), 0);
        r.note("DOMAIN", "skipped (1, 2)");
        assert_eq!(r.exit_code(), 0);
        r.note("PAPER_LITERAL", "cos/sin sign");
        assert_eq!(r.exit_code(), 2);
        r.residual("a", 1e-3, 1e-9);
        assert_eq!(r.exit_code(), 1);
        assert!(!r.residuals[0].pass);
    }

    #[test]
    fn merge_prefixes_and_keeps_status() {
        let mut sub = Report::new("phase");
        sub.note("PAPER", "w != 1");
        sub.domain = Some(Value::Bool(true));
        let mut all = Report::new("all");
        all.merge(sub);
        assert_eq!(all.notes, vec!["phase PAPER: w != 1"]);
        assert!(all.has_paper_notes());
        assert_eq!(all.status, Status::PassWithNotes);
        assert!(all.domain.unwrap().get("phase").is_some());
    }

    #[test]
    fn json_is_deterministic() {
        let mk = || {
            let mut r = Report::new("k");
            r.param("b", 2).param("a", 1.5);
            r.residual("z", 0.0, 1e-9);
            r.to_json()
        };
        assert_eq!(mk(), mk());
        assert!(mk().find("\"a\"").unwrap() < mk().find("\"b\"").unwrap());
    }
}
