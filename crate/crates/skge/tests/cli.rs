//! End-to-end tests of the `skge` binary: exit codes, file artifacts, and
//! flag/config/environment precedence.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skge"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// gen-kg + train on the toy fixtures; returns the model path.
fn train_toy_model(dir: &Path, extra: &[&str]) -> PathBuf {
    let kg = dir.join("kg.tsv");
    let status = bin()
        .args(["gen-kg"])
        .arg(data("toy_scenes.json"))
        .arg(data("toy_ontology.json"))
        .args(["-o"])
        .arg(&kg)
        .current_dir(dir)
        .status()
        .unwrap();
    assert!(status.success());

    let model = dir.join("model.skge");
    let mut cmd = bin();
    cmd.arg("train")
        .arg(&kg)
        .args(["--algo", "transe", "--dim", "16", "--epochs", "20", "--seed", "7"])
        .args(["-o"])
        .arg(&model)
        .args(extra)
        .current_dir(dir);
    let output = cmd.output().unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    model
}

#[test]
fn stats_matches_hand_count() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .arg("stats")
        .arg(data("golden_kg.tsv"))
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("triples:   5"), "{text}");
    assert!(text.contains("entities:  4"), "{text}");
    assert!(text.contains("relations: 2"), "{text}");
    // manifest lands in the working directory for output-less runs
    assert!(dir.path().join("skge.manifest.json").exists());
}

#[test]
fn unknown_algo_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["train", "whatever.tsv", "--algo", "fancynet", "-o", "out.skge"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err = stderr(&output);
    assert!(err.contains("fancynet"), "{err}");
    assert!(err.to_lowercase().contains("usage") || err.contains("possible values"), "{err}");
}

#[test]
fn malformed_kg_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let kg = dir.path().join("bad.tsv");
    std::fs::write(&kg, "only-one-field\n").unwrap();
    let output = bin()
        .arg("stats")
        .arg(&kg)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "{}", stderr(&output));
}

#[test]
fn invalid_scene_dataset_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let scenes = dir.path().join("scenes.json");
    std::fs::write(
        &scenes,
        r#"{"scenes": [{"id": "s", "location": "x", "sub_scenes": [
            {"id": "s0", "timestamp": 5.0, "objects": []},
            {"id": "s1", "timestamp": 1.0, "objects": []}
        ]}]}"#,
    )
    .unwrap();
    let output = bin()
        .arg("gen-kg")
        .arg(&scenes)
        .arg(data("toy_ontology.json"))
        .args(["-o", "kg.tsv"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("timestamp"), "{}", stderr(&output));
}

#[test]
fn numeric_blowup_is_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let kg = dir.path().join("kg.tsv");
    std::fs::copy(data("golden_kg.tsv"), &kg).unwrap();
    let output = bin()
        .arg("train")
        .arg(&kg)
        .args([
            "--algo", "rescal", "--dim", "8", "--epochs", "50", "--lr", "1e9",
            "--l2-reg", "0", "-o", "model.skge",
        ])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3), "{}", stderr(&output));
    assert!(stderr(&output).contains("non-finite"), "{}", stderr(&output));
}

#[test]
fn full_pipeline_produces_report() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_toy_model(dir.path(), &[]);

    let report_path = dir.path().join("report.json");
    let output = bin()
        .arg("eval")
        .arg(&model)
        .arg(dir.path().join("kg.tsv"))
        .args(["--k", "3", "-o"])
        .arg(&report_path)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));

    let text = stdout(&output);
    assert!(text.contains("categorization"), "{text}");
    assert!(text.contains("coherence"), "{text}");
    assert!(text.contains("transitional"), "{text}");

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["algorithm"], "transe");
    assert_eq!(report["d"], 16);
    assert!(report["per_class_categorization"].is_object());
    assert!(report["per_class_coherence"].is_object());
    assert!(report["per_relation_transitional"].is_object());
    assert!(report["timestamp"].is_string());
    assert!(report_path
        .with_file_name("report.json.manifest.json")
        .exists());

    // model manifest recorded the resolved hyperparameters
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("model.skge.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["subcommand"], "train");
    assert_eq!(manifest["config"]["dim"], 16);
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["inputs"].as_object().unwrap().len(), 1);
}

#[test]
fn eval_rejects_mismatched_kg() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_toy_model(dir.path(), &[]);
    let other_kg = dir.path().join("other.tsv");
    std::fs::copy(data("golden_kg.tsv"), &other_kg).unwrap();
    let output = bin()
        .arg("eval")
        .arg(&model)
        .arg(&other_kg)
        .args(["--k", "2"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("vocabulary"), "{}", stderr(&output));
}

#[test]
fn neighbors_and_similar_answer_queries() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_toy_model(dir.path(), &[]);

    let output = bin()
        .arg("neighbors")
        .arg(&model)
        .args(["--entity", "o1", "--k", "3"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let text = stdout(&output);
    assert!(text.lines().count() >= 4, "{text}");

    let output = bin()
        .arg("similar")
        .arg(&model)
        .args(["--scenes", "s,s0", "--top-k", "5"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    assert!(stdout(&output).contains("cosine"));

    let output = bin()
        .arg("neighbors")
        .arg(&model)
        .args(["--entity", "does-not-exist", "--k", "3"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn project_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_toy_model(dir.path(), &[]);
    let csv = dir.path().join("points.csv");
    let svg = dir.path().join("points.svg");
    let output = bin()
        .arg("project")
        .arg(&model)
        .args(["--method", "pca", "--kg"])
        .arg(dir.path().join("kg.tsv"))
        .args(["-o"])
        .arg(&csv)
        .arg("--svg")
        .arg(&svg)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("label,x,y,class\n"), "{csv_text}");
    assert!(csv_text.contains("o1,"), "{csv_text}");
    // objects carry their category as class
    assert!(csv_text.contains("vehicle.car"), "{csv_text}");
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_text.starts_with("<svg"));
}

#[test]
fn config_file_supplies_values_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("skge.json");
    std::fs::write(
        &config_path,
        r#"{"train": {"dim": 8, "epochs": 5, "algo": "transe", "seed": 3}}"#,
    )
    .unwrap();
    let kg = dir.path().join("kg.tsv");
    std::fs::copy(data("golden_kg.tsv"), &kg).unwrap();

    // config only: dim 8
    let model_a = dir.path().join("a.skge");
    let output = bin()
        .arg("--config")
        .arg(&config_path)
        .arg("train")
        .arg(&kg)
        .args(["-o"])
        .arg(&model_a)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("a.skge.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["config"]["dim"], 8);
    assert_eq!(manifest["config"]["epochs"], 5);

    // flag overrides config: dim 4
    let model_b = dir.path().join("b.skge");
    let output = bin()
        .arg("--config")
        .arg(&config_path)
        .arg("train")
        .arg(&kg)
        .args(["--dim", "4", "-o"])
        .arg(&model_b)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("b.skge.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["config"]["dim"], 4);
}

#[test]
fn threads_default_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let kg = dir.path().join("kg.tsv");
    std::fs::copy(data("golden_kg.tsv"), &kg).unwrap();
    let model = dir.path().join("model.skge");
    let output = bin()
        .arg("train")
        .arg(&kg)
        .args(["--dim", "4", "--epochs", "2", "-o"])
        .arg(&model)
        .env("SCENE_KGE_THREADS", "2")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("model.skge.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["config"]["threads"], 2);
    // nondeterminism of hogwild mode is announced
    assert!(stderr(&output).contains("nondeterministic"));
}

#[test]
fn custom_manifest_path_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let manifest_path = dir.path().join("runs/this-run.json");
    std::fs::create_dir_all(manifest_path.parent().unwrap()).unwrap();
    let output = bin()
        .arg("--manifest")
        .arg(&manifest_path)
        .arg("stats")
        .arg(data("golden_kg.tsv"))
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    assert!(manifest_path.exists());
    assert!(!dir.path().join("skge.manifest.json").exists());
}
