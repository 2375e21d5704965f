use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(file)
}

fn socratic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_socratic")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn load_datasets_prints_summary() {
    let out = socratic(&["load-datasets", s(&data("manifest.toml"))]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("Relation (relation): items: 40, ground truth: 25"), "{text}");
    assert!(text.contains("Sarcasm (sarcasm): items: 40, ground truth: 0"), "{text}");
}

#[test]
fn load_then_conflict_on_reload() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("study.log");
    let manifest = data("manifest.toml");
    assert_eq!(socratic(&["load-datasets", s(&manifest), "--store", s(&log)]).status.code(), Some(0));
    let again = socratic(&["load-datasets", s(&manifest), "--store", s(&log)]);
    assert_eq!(again.status.code(), Some(1));
    assert!(stderr(&again).contains("already loaded"));
}

#[test]
fn bad_manifests_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(data("manifest.toml"))
        .unwrap()
        .replace("options = [\"Expressed\", \"Not Expressed\"]", "options = [\"Expressed\", \"Not Expressed\", \"Unclear\"]")
        .replace("file = \"", &format!("file = \"{}/", data("").display()));
    let path = dir.path().join("m.toml");
    std::fs::write(&path, text).unwrap();
    let out = socratic(&["load-datasets", s(&path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("expected 2 label options, found 3"), "{}", stderr(&out));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.jsonl");
    let out_dir = dir.path().join("out");
    assert_eq!(socratic(&["analyze", "--study", s(&missing), "--out", s(&out_dir)]).status.code(), Some(2));
    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(socratic(&["analyze", "--study", s(&empty), "--out", s(&out_dir)]).status.code(), Some(1));
    assert_eq!(socratic(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(socratic(&["--help"]).status.code(), Some(0));
    let no_data = socratic(&["simulate", "--participants", "1", "--out", s(&out_dir)]);
    assert_eq!(no_data.status.code(), Some(1));
}

#[test]
fn simulate_export_import_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("study.log");
    let sim = dir.path().join("sim");
    let out = socratic(&[
        "simulate", "--participants", "12", "--seed", "2", "--provider", "scripted",
        "--manifest", s(&data("manifest.toml")), "--annotator-script", s(&data("annotator.toml")),
        "--store", s(&log), "--out", s(&sim),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("records: 24"));
    assert!(stdout(&out).contains("coverage  datapoints"));

    let exported = dir.path().join("export.jsonl");
    let out = socratic(&["export", "--store", s(&log), "--out", s(&exported)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(std::fs::read(&exported).unwrap(), std::fs::read(sim.join("study.jsonl")).unwrap());

    let bench = dir.path().join("bench.jsonl");
    let out = socratic(&[
        "import-benchmark", "--csv", s(&data("benchmark_sarcasm.csv")),
        "--mapping", s(&data("benchmark_sarcasm.toml")), "--out", s(&bench),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let report = dir.path().join("report");
    let out = socratic(&[
        "analyze", "--study", s(&sim.join("study.jsonl")), "--benchmark", s(&bench),
        "--surveys", s(&sim.join("surveys.jsonl")), "--out", s(&report),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(report.join("report.json")).unwrap()).unwrap();
    let sarcasm = json["datasets"].as_array().unwrap().iter().find(|d| d["dataset_name"] == "Sarcasm").unwrap();
    assert!(sarcasm["comparison"]["flip_z"]["p_value"].is_number());
    assert!(json["tlx"].is_object());
    assert!(report.join("sankey_flips_relation.csv").exists());
}
