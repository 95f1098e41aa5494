// Driving the command-line interface in-process and reading its JSON.

use groupoidal::cli::{run, RunReport};

pub fn run_example() -> String {
    let (code, text) = run(&["check-equivalence", "symmetric_z2z2"]);
    assert_eq!(code, 0);
    let (code, json) = run(&["--json", "-", "morita", "symmetric_z2z2"]);
    assert_eq!(code, 0);
    let report: RunReport = serde_json::from_str(&json).unwrap();
    let cert = report.entries[0].certificate.as_ref().unwrap();
    format!("{text}morita verdict from JSON: {}\n", cert.verdict.name())
}

fn main() {
    print!("{}", run_example());
}
