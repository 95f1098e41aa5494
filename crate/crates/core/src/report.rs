use std::fmt;

use serde::{Deserialize, Serialize};

/// One violated property, with the tuple that witnesses it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub message: String,
    pub witness: String,
}

/// Result of an exhaustive verification pass: the list of violated checks
/// plus a record of every check that ran and its largest observed residual.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub subject: String,
    pub violations: Vec<Violation>,
    pub checks: Vec<CheckSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub cases: usize,
    pub max_residual: f64,
    pub passed: bool,
    pub note: Option<String>,
}

impl ValidationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        ValidationReport {
            subject: subject.into(),
            ..Default::default()
        }
    }

    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn fail(&mut self, check: &str, message: impl Into<String>, witness: impl Into<String>) {
        self.violations.push(Violation {
            check: check.to_string(),
            message: message.into(),
            witness: witness.into(),
        });
    }

    /// Records a finished check. `failed` violations were pushed during it.
    pub fn record(&mut self, name: &str, cases: usize, max_residual: f64) {
        let passed = !self.violations.iter().any(|v| v.check == name);
        self.checks.push(CheckSummary {
            name: name.to_string(),
            cases,
            max_residual,
            passed,
            note: None,
        });
    }

    pub fn note(&mut self, name: &str, note: impl Into<String>) {
        self.checks.push(CheckSummary {
            name: name.to_string(),
            cases: 0,
            max_residual: 0.0,
            passed: true,
            note: Some(note.into()),
        });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
        self.checks.extend(other.checks);
    }

    pub fn check_passed(&self, name: &str) -> bool {
        !self.violations.iter().any(|v| v.check == name)
    }

    pub fn violations_of<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Violation> + 'a {
        self.violations.iter().filter(move |v| v.check == name)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.max_residual).fold(0.0, f64::max)
    }

    /// Caps the number of stored violations per check so reports of badly
    /// broken inputs stay readable.
    pub(crate) fn push_capped(
        &mut self,
        check: &str,
        message: impl Into<String>,
        witness: impl Into<String>,
    ) {
        const CAP: usize = 16;
        if self.violations_of(check).count() < CAP {
            self.fail(check, message, witness);
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            write!(f, "{}: ok", self.subject)
        } else {
            write!(f, "{}: {} violation(s)", self.subject, self.violations.len())?;
            for v in self.violations.iter().take(4) {
                write!(f, "; [{}] {} at {}", v.check, v.message, v.witness)?;
            }
            Ok(())
        }
    }
}
