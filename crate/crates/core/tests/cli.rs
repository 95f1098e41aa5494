use std::process::Command;

use groupoidal::cli::{run, RunReport, Status, CONSTRUCTIONS};

const ZOO: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/zoo.model");

fn json(args: &[&str]) -> (i32, RunReport) {
    let mut full = vec!["--json", "-"];
    full.extend_from_slice(args);
    let (code, out) = run(&full);
    let report: RunReport = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{args:?}: {e}\n{out}"));
    (code, report)
}

/// One passing invocation per construction, on the bundled model or the zoo.
const BUILDS: &[&[&str]] = &[
    &["pair-groupoid", "3"],
    &["transformation-groupoid", "omega", ZOO],
    &["semidirect-groupoid", "g"],
    &["quotient-groupoid", "h"],
    &["orbit-space-action", "g"],
    &["semidirect-space-action", "flip", "swap", "over", ZOO],
    &["principal-decomposition", "h"],
    &["groupoid-equivalence", "g", "h"],
    &["cbundle", "M2", "3", ZOO],
    &["pullback", "line2", "omega", ZOO],
    &["transformation-bundle", "line2", "omega", ZOO],
    &["semidirect-bundle", "hA"],
    &["quotient-bundle", "hA"],
    &["orbit-bundle-action", "gA"],
    &["semidirect-orbit-action", "gA", "hA"],
    &["principal-fell", "cbR", ZOO],
    &["section-algebra", "A"],
    &["crossed-product", "gA"],
    &["induced-algebra", "rflip", "D2", "swapD", ZOO],
    &["linking", "symmetric_z2z2"],
];

#[test]
fn every_construction_runs_and_emits() {
    assert_eq!(BUILDS.len(), CONSTRUCTIONS.len());
    for c in CONSTRUCTIONS {
        let args = BUILDS.iter().find(|b| b[0] == c.name).unwrap_or_else(|| panic!("no case for {}", c.name));
        let mut full = vec!["build"];
        full.extend_from_slice(args);
        let (code, r) = json(&full);
        assert_eq!(code, 0, "{args:?}: {:#?}", r.entries);
        assert_eq!(r.status, Status::Pass);
        let emitted = r.emitted.unwrap_or_else(|| panic!("{}: nothing emitted", c.name));
        groupoidal::io::parse_model(&emitted).unwrap_or_else(|e| panic!("{}: {e}", c.name));
    }
}

#[test]
fn every_scenario_is_certified() {
    for (scenario, model) in [("symmetric_z2z2", None), ("left_only", None), ("transform", Some(ZOO)), ("cstar", Some(ZOO)), ("co", Some(ZOO)), ("rae", Some(ZOO))] {
        for cmd in ["morita", "check-equivalence"] {
            let mut args = vec![cmd, scenario];
            args.extend(model);
            let (code, r) = json(&args);
            assert_eq!(code, 0, "{args:?}: {:#?}", r.entries);
        }
    }
}

#[test]
fn morita_on_the_bundled_model() {
    let (code, r) = json(&["morita", "symmetric_z2z2"]);
    assert_eq!(code, 0);
    let cert = r.entries[0].certificate.as_ref().unwrap();
    assert_eq!(cert.verdict.name(), "equivalent");
    assert_eq!(cert.left.structure.center_dim, cert.right.structure.center_dim);
}

#[test]
fn validate_lists_every_declaration() {
    let (code, r) = json(&["validate", ZOO]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(ZOO).unwrap();
    let m = groupoidal::io::parse_model(&text).unwrap();
    let names: Vec<&str> = r.entries.iter().map(|e| e.name.as_str()).collect();
    let declared: Vec<&str> = m.decls.iter().map(|d| d.name.as_str()).collect();
    assert_eq!(names, declared);
}

#[test]
fn demos() {
    let (code, r) = json(&["demo", "coaction", "--group", "Z3"]);
    assert_eq!(code, 0);
    let cert = r.entries[0].certificate.as_ref().unwrap();
    assert_eq!(cert.left.structure.blocks, vec![3, 3, 3]);
    assert_eq!(cert.right.structure.blocks, vec![1, 1, 1]);
    for case in ["translation", "two-sided", "swap"] {
        let (code, r) = json(&["demo", "raeburn", "--case", case]);
        assert_eq!(code, 0, "{case}: {:#?}", r.entries);
    }
    let (code, r) = json(&["demo", "coaction", "--group", "Z2", "--bundle", "matrix2"]);
    assert_eq!(code, 0, "{:#?}", r.entries);
    assert_eq!(run(&["demo", "coaction", "--group", "S3", "--bundle", "matrix2"]).0, 3);
}

#[test]
fn reports_are_reproducible() {
    for args in [&["morita", "symmetric_z2z2"][..], &["validate", ZOO], &["build", "linking", "rae", ZOO]] {
        let first = run(args);
        let second = run(args);
        assert_eq!(first, second, "{args:?}");
    }
}

#[test]
fn seed_and_tolerance_are_recorded() {
    let (_, r) = json(&["--seed", "17", "--tol", "1e-7", "morita", "symmetric_z2z2"]);
    assert_eq!((r.seed, r.tol), (17, 1e-7));
    assert_eq!(r.entries[0].certificate.as_ref().unwrap().seed, 17);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["build", "nope"]).0, 3);
    assert_eq!(run(&["build", "pair-groupoid"]).0, 3);
    assert_eq!(run(&["morita", "missing"]).0, 3);
    assert_eq!(run(&["validate", "/nonexistent/model"]).0, 3);
    assert_eq!(run(&["--tol", "-1", "validate"]).0, 3);
    assert_eq!(run(&["frobnicate"]).0, 3);
    assert_eq!(run(&["--help"]).0, 0);

    let dir = std::env::temp_dir().join(format!("groupoidal-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let model = dir.join("still.model");
    std::fs::write(
        &model,
        "model 1\ngroup Z2 cyclic 2\ngroupoid U units a b\naction still units Z2 U right\n  a b\n  a b\n",
    )
    .unwrap();
    let (code, out) = run(&["build", "quotient-groupoid", "still", model.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.contains("not free"), "{out}");
}

#[test]
fn out_and_json_files() {
    let dir = std::env::temp_dir().join(format!("groupoidal-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (out, js) = (dir.join("semidirect.model"), dir.join("report.json"));
    let (code, text) = run(&["build", "semidirect-bundle", "gA", "--out", out.to_str().unwrap(), "--json", js.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(!text.contains("--- emitted model ---"));
    let report: RunReport = serde_json::from_str(&std::fs::read_to_string(&js).unwrap()).unwrap();
    assert_eq!(report.emitted.as_deref(), Some(std::fs::read_to_string(&out).unwrap().as_str()));
    let (code, _) = run(&["validate", out.to_str().unwrap()]);
    assert_eq!(code, 0);
}

#[test]
fn binary_reads_the_tolerance_variable() {
    let out = Command::new(env!("CARGO_BIN_EXE_groupoidal"))
        .args(["--json", "-", "validate"])
        .env("GROUPOIDAL_TOL", "1e-6")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r: RunReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.tol, 1e-6);

    let out = Command::new(env!("CARGO_BIN_EXE_groupoidal")).arg("validate").env("GROUPOIDAL_TOL", "lots").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}
