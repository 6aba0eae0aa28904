use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn trolley() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/trolley.json")
}

fn moralplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moralplan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn judge_refrain_utilitarian() {
    let t = trolley();
    let o = moralplan(&["judge", t.to_str().unwrap(), "refrain", "--principle", "utilitarianism"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("impermissible"));
}

#[test]
fn plan_is_pull() {
    let t = trolley();
    let o = moralplan(&["plan", t.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "pull");
}

#[test]
fn restrict_do_no_harm_document() {
    let t = trolley();
    let o = moralplan(&["restrict", t.to_str().unwrap(), "--principle", "do-no-harm"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("produced_1willdie"));
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(doc["provenance"]["applied"].is_array());
}

#[test]
fn restrict_to_file_then_plan() {
    let t = trolley();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.json");
    let o = moralplan(&[
        "restrict",
        t.to_str().unwrap(),
        "--include",
        "pull",
        "--principle",
        "utilitarianism",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = moralplan(&["plan", out.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "pull");
}

#[test]
fn restrict_impermissible() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(
        &path,
        r#"{"variables":["v"],"actions":[{"label":"unset","eff":["¬v"]}],
            "init":["v"],"goal":["v"],"utilities":{"facts":{"¬v":1}}}"#,
    )
    .unwrap();
    let o = moralplan(&["restrict", path.to_str().unwrap(), "--principle", "utilitarianism"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "Impermissible");
}

#[test]
fn explain_prints_reasons() {
    let t = trolley();
    let o = moralplan(&["explain", t.to_str().unwrap(), "pull", "--principle", "do-no-harm"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("necessary: {Caused(1willdie)}"), "{text}");
}

#[test]
fn errors_are_json_on_stderr() {
    let t = trolley();
    let o = moralplan(&["judge", t.to_str().unwrap(), "fly", "--principle", "deontology"]);
    assert!(!o.status.success());
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "unknown_action");

    let o = moralplan(&["plan", "/nonexistent/model.json"]);
    assert!(!o.status.success());
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "io_error");
}

#[test]
fn malformed_document_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"variables\": [\"a\",\n  oops\n}").unwrap();
    let o = moralplan(&["plan", path.to_str().unwrap()]);
    assert!(!o.status.success());
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "parse_error");
    assert!(err["message"].as_str().unwrap().contains("line 3"));
}

#[test]
fn verify_passes_on_trolley() {
    let t = trolley();
    let o = moralplan(&["verify", t.to_str().unwrap(), "--max-len", "3", "--count", "5", "--seed", "9"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 violation(s)"));
}

#[test]
fn dialogue_over_stdin() {
    let t = trolley();
    let mut child = Command::new(env!("CARGO_BIN_EXE_moralplan"))
        .args(["dialogue", t.to_str().unwrap(), "--plan", "refrain", "--principle", "do-no-harm"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(
            b"ask include pull do-no-harm\nask include pull utilitarianism\nadopt pull\nhistory\nask include fly deontology\nquit\n",
        )
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("Doing so is impermissible under the do-no-harm principle because this way the death of the one person is caused by his action."));
    assert!(text.contains("because five saved lives is better than one saved life."));
    assert!(text.contains("no plan satisfying your suggestion is permissible"));
    assert!(text.contains("current plan: pull"));
    assert!(text.contains("2. include pull under utilitarianism: pull"));
    assert!(text.contains("error: unknown action `fly`"));
}
