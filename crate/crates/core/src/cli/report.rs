use serde::{Deserialize, Serialize};

use crate::morita::{MoritaCertificate, Verdict};
use crate::report::ValidationReport;
use crate::star::StarStructureReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Indeterminate,
    Fail,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Indeterminate => "indeterminate",
            Status::Fail => "fail",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Indeterminate => 2,
        }
    }
}

impl From<Verdict> for Status {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Equivalent => Status::Pass,
            Verdict::NotCertified => Status::Fail,
            Verdict::Indeterminate => Status::Indeterminate,
        }
    }
}

/// One reported item: an object, a construction or a scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub kind: String,
    pub name: String,
    pub status: Status,
    pub details: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub validations: Vec<ValidationReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub structures: Vec<StarStructureReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<MoritaCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub millis: Option<f64>,
}

impl Entry {
    pub fn new(kind: &str, name: &str) -> Self {
        Entry {
            kind: kind.into(),
            name: name.into(),
            status: Status::Pass,
            details: Vec::new(),
            validations: Vec::new(),
            structures: Vec::new(),
            certificate: None,
            millis: None,
        }
    }

    pub fn detail(&mut self, s: impl Into<String>) {
        self.details.push(s.into());
    }

    pub fn mark(&mut self, s: Status) {
        self.status = self.status.max(s);
    }

    pub fn fail(&mut self, s: impl Into<String>) {
        self.detail(s);
        self.mark(Status::Fail);
    }

    /// Records a validation report; a violation fails the entry.
    pub fn check(&mut self, r: ValidationReport) {
        if r.is_ok() {
            self.detail(format!("{}: ok (max residual {:.2e})", r.subject, r.max_residual()));
        } else {
            self.fail(r.to_string());
        }
        self.validations.push(r);
    }

    pub fn structure(&mut self, label: &str, s: StarStructureReport) {
        for line in s.render().lines() {
            self.detail(format!("{label}: {line}"));
        }
        if s.indeterminate {
            self.mark(Status::Indeterminate);
        }
        self.structures.push(s);
    }

    pub fn certificate(&mut self, c: MoritaCertificate) {
        self.details.extend(c.render().lines().map(String::from));
        self.mark(c.verdict.into());
        self.certificate = Some(c);
    }
}

/// Output of one CLI invocation. Apart from the optional timings, equal
/// inputs and seeds give byte-identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub model: Option<String>,
    pub seed: u64,
    pub tol: f64,
    pub entries: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emitted: Option<String>,
    pub status: Status,
}

impl RunReport {
    pub fn new(command: String, model: Option<String>, seed: u64, tol: f64) -> Self {
        RunReport {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            model,
            seed,
            tol,
            entries: Vec::new(),
            emitted: None,
            status: Status::Pass,
        }
    }

    pub fn push(&mut self, e: Entry) {
        self.status = self.status.max(e.status);
        self.entries.push(e);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn render(&self) -> String {
        let mut s = format!("{} {}: {} (seed {}, tol {:e})\n", self.tool, self.version, self.command, self.seed, self.tol);
        if let Some(m) = &self.model {
            s.push_str(&format!("model: {m}\n"));
        }
        for e in &self.entries {
            s.push_str(&format!("[{}] {} {}", e.status.name(), e.kind, e.name));
            if let Some(ms) = e.millis {
                s.push_str(&format!(" ({ms:.1} ms)"));
            }
            s.push('\n');
            for d in &e.details {
                s.push_str("    ");
                s.push_str(d);
                s.push('\n');
            }
        }
        s.push_str(&format!("status: {}\n", self.status.name()));
        s
    }
}
