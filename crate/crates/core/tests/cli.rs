use std::process::{Command, Output};

use serde_json::Value;

fn logbal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logbal")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn compute_prints_terms() {
    let o = logbal(&["compute", "--inline", "a[n] = 2*a[n-1]; a[0]=1", "--terms", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().collect::<Vec<_>>(), ["1", "2", "4", "8"]);
    let o = logbal(&["compute", "--catalog", "motzkin", "--terms", "6", "--format", "json"]);
    let v = json(&o);
    let s = v.to_string();
    for t in ["\"1\"", "\"2\"", "\"4\"", "\"9\"", "\"21\""] {
        assert!(s.contains(t), "{s}");
    }
}

#[test]
fn certified_entry_exits_zero_with_fields() {
    let o = logbal(&["certify", "--catalog", "motzkin", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["verdict"], "log_balanced");
    assert_eq!(v["holds_from"], 1);
    assert_eq!(v["bounds"]["m"], "2");
    assert_eq!(v["bounds"]["M"], "7/2");
    assert!(v["tool_version"].is_string());
    assert!(!v["certificates"].as_array().unwrap().is_empty());
}

#[test]
fn negative_entry_exits_one() {
    let o = logbal(&["certify", "--catalog", "factorial_shift_down", "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_ne!(v["verdict"], "log_balanced");
    assert!(!v["failures"].as_array().unwrap().is_empty());
    let text = stdout(&logbal(&["certify", "--catalog", "factorial_squared"]));
    assert!(text.contains("failure"), "{text}");
}

#[test]
fn usage_errors_exit_two() {
    let o = logbal(&["certify", "--catalog", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("motzkin"), "{err}");
    assert_eq!(logbal(&["compute", "--inline", "a[n] = 2*a[n-1"]).status.code(), Some(2));
    assert_eq!(logbal(&["certify"]).status.code(), Some(2));
    assert_eq!(
        logbal(&["certify", "--catalog", "motzkin", "--inline", "a[n] = a[n-1]; a[0]=1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        logbal(&["certify", "--catalog", "motzkin", "--bounds", "2,7/2", "--bounds-affine", "0,2,0,4"]).status.code(),
        Some(2)
    );
    assert_eq!(logbal(&["certify", "--catalog", "motzkin", "--bounds", "2"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = ["certify", "--catalog", "schroeder", "--format", "json"];
    assert_eq!(logbal(&args).stdout, logbal(&args).stdout);
}

#[test]
fn bounds_overrides() {
    let o = logbal(&["certify", "--catalog", "motzkin", "--bounds", "2,7/2", "--from", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["bounds"]["n0"], 2);

    let o = logbal(&["certify", "--catalog", "motzkin", "--bounds", "3,7/2", "--from", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let failures = json(&o)["failures"].to_string();
    assert!(failures.contains("base"), "{failures}");

    let o = logbal(&[
        "certify",
        "--catalog",
        "polyomino_dcc",
        "--bounds-affine",
        "1,1,1,2",
        "--from",
        "2",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["bounds"]["shape"], "affine");
    assert_eq!(v["bounds"]["upper"]["intercept"], "2");
}

#[test]
fn recurrence_file() {
    let path = std::env::temp_dir().join(format!("logbal-cli-{}.rec", std::process::id()));
    std::fs::write(&path, "# central binomials\na[n] = (4*n-2)/n*a[n-1]; a[0]=1\n").unwrap();
    let o = logbal(&["certify", "--rec", path.to_str().unwrap(), "--format", "json"]);
    std::fs::remove_file(&path).ok();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(json(&o)["verdict"], "log_balanced");
    let missing = logbal(&["compute", "--rec", "/nonexistent/x.rec"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn catalog_all_in_name_order() {
    let o = logbal(&["certify", "--catalog", "all", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let names: Vec<String> =
        v.as_array().unwrap().iter().map(|r| r["input"].as_str().unwrap().to_string()).collect();
    assert_eq!(names, logbal::catalog::all_names());
    for r in v.as_array().unwrap() {
        let name = r["input"].as_str().unwrap();
        let expected = logbal::catalog::catalog_get(name).unwrap().expected_property;
        assert_eq!(r["verdict"] == "log_balanced", expected.as_str() == "log_balanced", "{name}");
    }
}

#[test]
fn catalog_listing() {
    let o = logbal(&["catalog", "list", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o).as_array().unwrap().len(), logbal::catalog::all_names().len());
    let o = logbal(&["catalog", "show", "legendre:2", "--format", "json"]);
    let v = json(&o);
    assert_eq!(v["expected_bounds"]["M"], "4");
    assert_eq!(logbal(&["catalog", "show", "nosuch"]).status.code(), Some(2));
}
