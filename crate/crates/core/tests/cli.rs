use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn cxorder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cxorder"))
        .args(args)
        .env_remove("CXORDER_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_rasa_small_grid_passes() {
    let out = cxorder(&["verify-rasa", "--n", "1..3", "--m", "2", "--denom", "5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["failures"], 0);
    assert!(report["points"].as_u64().unwrap() > 0);
    let row = &report["rows"][0];
    for key in [
        "n",
        "m",
        "x",
        "verdict_a",
        "verdict_b",
        "verdict_c",
        "min_form",
        "bridge",
    ] {
        assert!(row.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn verify_rasa_three_variables_passes() {
    let out = cxorder(&["verify-rasa", "--n", "1", "--m", "3", "--denom", "4"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["failures"], 0);
}

#[test]
fn verify_rasa_csv_has_header() {
    let out = cxorder(&["verify-rasa", "--n", "1", "--denom", "2", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("n,m,x,"), "{header}");
    assert!(text.lines().count() > 1);
}

#[test]
fn verify_rasa_rejects_bad_arguments() {
    assert_eq!(code(&cxorder(&["verify-rasa", "--n", "0"])), 2);
    assert_eq!(code(&cxorder(&["verify-rasa", "--m", "1"])), 2);
    assert_eq!(code(&cxorder(&["verify-rasa", "--n", "3..1"])), 2);
    assert_eq!(code(&cxorder(&["verify-rasa", "--family", "cubes"])), 2);
}

#[test]
fn out_dir_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_cxorder"))
        .args(["counterexample"])
        .env("CXORDER_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let written = std::fs::read_to_string(dir.path().join("counterexample.json")).unwrap();
    assert!(written.contains("\"areas\""));
}

#[test]
fn cx_compare_counterexample_fails_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", "# lhs\n1 1/4\n3 1/4\n5 1/4\n7 1/4\n");
    let b = write(dir.path(), "b.txt", "0 1/8\n2 1/8\n4 1/2\n6 1/8\n8 1/8\n");
    let out = cxorder(&["cx-compare", s(&a), s(&b)]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["holds"], false);
    assert_eq!(v["witness"], "4");
    assert_eq!(v["means_equal"], true);

    let out = cxorder(&["cx-compare", s(&a), s(&b), "--method", "szostok"]);
    assert_eq!(code(&out), 1);
    assert_eq!(
        json(&out)["areas"],
        serde_json::json!(["1/8", "3/8", "3/8", "1/8"])
    );

    let out = cxorder(&["cx-compare", s(&a), s(&b), "--method", "levin-steckin"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["first_violation"], "4");
}

#[test]
fn cx_compare_identical_files_with_single_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", "0 1/4\n1 1/2\n2 1/4\n");
    let out = cxorder(&["cx-compare", s(&a), s(&a), "--method", "ohlin"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["identical"], true);
    assert_eq!(v["applies"], true);
}

#[test]
fn cx_compare_binomial_against_two_point_mixture() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", "0 1/4\n1 1/2\n2 1/4\n");
    let b = write(
        dir.path(),
        "b.json",
        r#"{"atoms": [["0", "1/2"], ["2", "1/2"]]}"#,
    );
    for method in ["oracle", "ohlin", "szostok", "levin-steckin"] {
        let out = cxorder(&["cx-compare", s(&a), s(&b), "--method", method]);
        assert_eq!(
            code(&out),
            0,
            "{method}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
    }
    let out = cxorder(&["cx-compare", s(&b), s(&a)]);
    assert_eq!(code(&out), 1);
    let out = cxorder(&["cx-compare", s(&a), s(&b), "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("field,value\n"));
    assert!(text.contains("holds,true"));
}

#[test]
fn cx_compare_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.txt", "0 1\n");
    let bad = write(dir.path(), "bad.txt", "0 0.5\n1 0.5\n");
    let short = write(dir.path(), "short.txt", "0 1/2\n1 1/4\n");
    assert_eq!(code(&cxorder(&["cx-compare", s(&good), s(&bad)])), 2);
    assert_eq!(code(&cxorder(&["cx-compare", s(&good), s(&short)])), 2);
    let missing = dir.path().join("missing.txt");
    assert_eq!(code(&cxorder(&["cx-compare", s(&good), s(&missing)])), 2);
}

#[test]
fn cx_compare_unequal_means_is_a_precondition_failure() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", "0 1/2\n1 1/2\n");
    let b = write(dir.path(), "b.txt", "0 1/2\n2 1/2\n");
    assert_eq!(
        code(&cxorder(&["cx-compare", s(&a), s(&b), "--method", "ohlin"])),
        3
    );
    assert_eq!(
        code(&cxorder(&[
            "cx-compare",
            s(&a),
            s(&b),
            "--method",
            "szostok"
        ])),
        3
    );
    let out = cxorder(&["cx-compare", s(&a), s(&b)]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["means_equal"], false);
}

#[test]
fn counterexample_json_and_csv() {
    let out = cxorder(&["counterexample"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["sign_change_points"], serde_json::json!(["1", "4", "7"]));
    assert_eq!(v["areas"], serde_json::json!(["1/8", "3/8", "3/8", "1/8"]));
    assert_eq!(v["szostok_decision"], false);
    assert_eq!(v["oracle_verdict"]["holds"], false);

    let out = cxorder(&["counterexample", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("areas,\"1/8,3/8,3/8,1/8\""), "{text}");
    assert!(text.contains("holds,false"));
    assert!(text.contains("witness,4"));
}

#[test]
fn hoeffding_explicit_and_random() {
    let out = cxorder(&["hoeffding", "1/4", "3/4"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["rows"][0]["holds"], true);
    assert_eq!(v["rows"][0]["identical"], false);

    let out = cxorder(&["hoeffding", "1/2", "1/2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["rows"][0]["identical"], true);

    let out = cxorder(&[
        "hoeffding",
        "--random",
        "500",
        "--seed",
        "7",
        "--n-max",
        "8",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["rows"].as_array().unwrap().len(), 500);
    assert_eq!(v["failures"], 0);
}

#[test]
fn hoeffding_rejects_invalid_probabilities() {
    assert_eq!(code(&cxorder(&["hoeffding", "3/2"])), 2);
    assert_eq!(code(&cxorder(&["hoeffding", "1/0"])), 2);
    assert_eq!(code(&cxorder(&["hoeffding"])), 2);
}

#[test]
fn psi_pattern_reports_two_sign_changes() {
    let out = cxorder(&["psi-pattern", "--n", "2", "1/4", "3/4"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["change_count"], 2);
    assert_eq!(v["pattern"][0], "+");
    assert_eq!(v["values"][0], "25/256");

    let out = cxorder(&["psi-pattern", "--n", "2", "1/4", "3/4", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("k,psi,sign,approx\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn psi_pattern_errors() {
    assert_eq!(
        code(&cxorder(&["psi-pattern", "--n", "2", "1/3", "1/3"])),
        3
    );
    assert_eq!(code(&cxorder(&["psi-pattern", "--n", "2", "1/3"])), 2);
    assert_eq!(
        code(&cxorder(&["psi-pattern", "--n", "2", "1/3", "5/4"])),
        2
    );
}
