//! End-to-end tests of the command-line binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::tempdir;

fn submax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_submax"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn gen_instance(dir: &Path, args: &[&str]) -> PathBuf {
    let path = dir.join("instance.json");
    let path_str = path.to_str().unwrap().to_string();
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out-file", &path_str]);
    let out = submax(&full);
    assert!(out.status.success(), "gen failed: {}", stderr(&out));
    path
}

#[test]
fn gen_run_verify_round_trip() {
    let dir = tempdir().unwrap();
    let path = gen_instance(
        dir.path(),
        &["--function", "cut", "--constraint", "cardinality", "-n", "8", "--seed", "11"],
    );
    let run = submax(&[
        "run",
        "--instance",
        path.to_str().unwrap(),
        "--ratio",
        "--out",
        "json",
    ]);
    assert!(run.status.success(), "run failed: {}", stderr(&run));
    let report: serde_json::Value = serde_json::from_str(&stdout(&run)).unwrap();
    assert_eq!(report["n"], 8);
    assert_eq!(report["algorithm"], "main");
    assert!(report["value"].as_f64().unwrap() > 0.0);
    assert_eq!(report["output"].as_array().unwrap().len(), 8);
    assert!(report["ratio"].as_f64().unwrap() > 0.38);

    let verify = submax(&["verify", "--instance", path.to_str().unwrap(), "--delta", "1e-3"]);
    assert!(verify.status.success(), "verify failed: {}", stderr(&verify));
    let text = stdout(&verify);
    assert!(text.contains("verdict: PASS"), "unexpected transcript:\n{text}");
}

#[test]
fn verify_json_reports_all_verdicts() {
    let dir = tempdir().unwrap();
    let path = gen_instance(
        dir.path(),
        &["--function", "coverage", "--constraint", "partition", "-n", "6", "--seed", "3"],
    );
    let out = submax(&[
        "verify",
        "--instance",
        path.to_str().unwrap(),
        "--delta",
        "1e-3",
        "--out",
        "json",
    ]);
    assert!(out.status.success(), "verify failed: {}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let verdicts = report["verdicts"].as_object().unwrap();
    assert_eq!(verdicts.len(), 8);
    for (name, pass) in verdicts {
        assert_eq!(pass, &serde_json::Value::Bool(true), "verdict {name} failed");
    }
}

#[test]
fn gen_stdout_matches_saved_file() {
    let dir = tempdir().unwrap();
    let args =
        ["--function", "coverage", "--constraint", "knapsack", "-n", "7", "--seed", "5"];
    let path = gen_instance(dir.path(), &args);
    let saved = std::fs::read_to_string(&path).unwrap();
    let mut stdout_args = vec!["gen"];
    stdout_args.extend_from_slice(&args);
    let out = submax(&stdout_args);
    assert!(out.status.success());
    assert_eq!(stdout(&out), saved);
}

#[test]
fn instance_parse_then_serialize_is_identity() {
    let dir = tempdir().unwrap();
    let path = gen_instance(
        dir.path(),
        &["--function", "facility", "--constraint", "partition", "-n", "9", "--seed", "17"],
    );
    let text = std::fs::read_to_string(&path).unwrap();
    let spec: submax::InstanceSpec = serde_json::from_str(&text).unwrap();
    let mut reserialized = serde_json::to_string_pretty(&spec).unwrap();
    reserialized.push('\n');
    assert_eq!(reserialized, text);
}

#[test]
fn verify_accepts_a_zero_switch_time() {
    let dir = tempdir().unwrap();
    let path = gen_instance(
        dir.path(),
        &["--function", "cut", "--constraint", "cardinality", "-n", "7", "--seed", "6"],
    );
    let out = submax(&[
        "verify",
        "--instance",
        path.to_str().unwrap(),
        "--t-s",
        "0",
        "--delta",
        "1e-3",
    ]);
    assert!(out.status.success(), "verify failed: {}", stderr(&out));
    // With no first phase the greedy floor collapses to f(OPT)/e.
    assert!(stdout(&out).contains("verdict: PASS"));
}

#[test]
fn run_is_seed_deterministic() {
    let dir = tempdir().unwrap();
    let path = gen_instance(
        dir.path(),
        &["--function", "cut", "--constraint", "knapsack", "-n", "7", "--seed", "2"],
    );
    let args = [
        "run",
        "--instance",
        path.to_str().unwrap(),
        "--mode",
        "sampled",
        "--samples",
        "200",
        "--seed",
        "9",
        "--delta",
        "0.05",
        "--out",
        "json",
    ];
    let a = submax(&args);
    let b = submax(&args);
    assert!(a.status.success(), "run failed: {}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn usage_errors_exit_with_one() {
    let out = submax(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));

    let out = submax(&["run"]);
    assert_eq!(out.status.code(), Some(1), "missing --instance is a usage error");

    let help = submax(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("submax"));
}

#[test]
fn invalid_options_exit_with_one() {
    let dir = tempdir().unwrap();
    let path = gen_instance(
        dir.path(),
        &["--function", "cut", "--constraint", "cardinality", "-n", "5", "--seed", "1"],
    );
    let path = path.to_str().unwrap();

    let out = submax(&["run", "--instance", path, "--z-rounds", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("z-rounds"));

    let out = submax(&["run", "--instance", path, "--mode", "sampled", "--samples", "1"]);
    assert_eq!(out.status.code(), Some(1));

    let traj = dir.path().join("t.csv");
    let out = submax(&[
        "run",
        "--instance",
        path,
        "--algorithm",
        "local-search",
        "--trajectory",
        traj.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("trajectory"));
}

#[test]
fn instance_version_mismatch_is_rejected() {
    let dir = tempdir().unwrap();
    let path = gen_instance(
        dir.path(),
        &["--function", "cut", "--constraint", "cardinality", "-n", "5", "--seed", "1"],
    );
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    doc["version"] = serde_json::json!(99);
    std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let out = submax(&["run", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("version"));
}

#[test]
fn trajectory_csv_has_one_row_per_step_and_element() {
    let dir = tempdir().unwrap();
    let path = gen_instance(
        dir.path(),
        &["--function", "cut", "--constraint", "cardinality", "-n", "6", "--seed", "4"],
    );
    let traj = dir.path().join("trajectory.csv");
    let out = submax(&[
        "run",
        "--instance",
        path.to_str().unwrap(),
        "--delta",
        "0.25",
        "--trajectory",
        traj.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "run failed: {}", stderr(&out));
    let text = std::fs::read_to_string(&traj).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,u,y_u,x_u,w_u");
    // Steps of 0.25 with a switch at 0.372: 1 phase-1 step and 3 phase-2
    // steps, times 6 elements.
    assert_eq!(lines.len(), 1 + 4 * 6);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[1], "0");
}

#[test]
fn gen_corpus_writes_instances_and_manifest() {
    let dir = tempdir().unwrap();
    let out = submax(&["gen", "--corpus", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "gen --corpus failed: {}", stderr(&out));
    assert!(stdout(&out).contains("wrote 54 instances"));
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("manifest.json")).unwrap(),
    )
    .unwrap();
    let entries = manifest.as_array().unwrap();
    assert_eq!(entries.len(), 54);
    let first = entries[0]["file"].as_str().unwrap();
    let run = submax(&[
        "run",
        "--instance",
        dir.path().join(first).to_str().unwrap(),
        "--delta",
        "0.05",
    ]);
    assert!(run.status.success(), "corpus instance run failed: {}", stderr(&run));
}

#[test]
fn bench_csv_is_identical_across_worker_counts() {
    let dir = tempdir().unwrap();
    let a = gen_instance(
        dir.path(),
        &["--function", "cut", "--constraint", "partition", "-n", "7", "--seed", "8"],
    );
    let b = dir.path().join("b.json");
    let out = submax(&[
        "gen",
        "--function",
        "coverage",
        "--constraint",
        "cardinality",
        "-n",
        "6",
        "--seed",
        "9",
        "--out-file",
        b.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let config = dir.path().join("bench.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "instances": [a, b],
            "algorithms": ["main", "local-search", "mcg", "aided-mcg"],
            "seeds": [0, 1],
            "delta": 0.01,
            "z_rounds": 2
        })
        .to_string(),
    )
    .unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "2", "4"] {
        let out = submax(&[
            "bench",
            "--config",
            config.to_str().unwrap(),
            "--workers",
            workers,
        ]);
        assert!(out.status.success(), "bench failed: {}", stderr(&out));
        outputs.push(out.stdout);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    assert!(text.starts_with("instance,algorithm,seed,n,value,f_opt,ratio,oracle_calls,status"));
    assert_eq!(text.lines().count(), 1 + 2 * 4 * 2);
    assert!(text.lines().skip(1).all(|l| l.contains(",ok")));
}

#[test]
fn bench_timing_column_is_optional() {
    let dir = tempdir().unwrap();
    let path = gen_instance(
        dir.path(),
        &["--function", "cut", "--constraint", "cardinality", "-n", "5", "--seed", "3"],
    );
    let config = dir.path().join("bench.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "instances": [path],
            "algorithms": ["local-search"],
            "seeds": [0]
        })
        .to_string(),
    )
    .unwrap();
    let out = submax(&["bench", "--config", config.to_str().unwrap(), "--timing"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().next().unwrap().ends_with(",wall_ms"));

    let out = submax(&["bench", "--config", config.to_str().unwrap(), "--out", "json"]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 1);
    assert_eq!(rows[0]["status"], "ok");
}

#[test]
fn bench_config_errors_exit_with_one() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("bench.json");
    std::fs::write(&config, r#"{"algorithms": [], "seeds": [0], "corpus": true}"#).unwrap();
    let out = submax(&["bench", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("algorithms"));

    std::fs::write(&config, r#"{"algorithms": ["main"], "seeds": [0], "unknown_key": 1}"#)
        .unwrap();
    let out = submax(&["bench", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn optimize_params_reports_the_program_solution() {
    let out = submax(&["optimize-params", "--resolution", "400", "--out", "json"]);
    assert!(out.status.success());
    let solution: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let objective = solution["objective"].as_f64().unwrap();
    assert!(objective >= 0.3856 - 1e-4, "objective {objective}");
    let p = solution["p"].as_f64().unwrap();
    let p1 = solution["p1"].as_f64().unwrap();
    let p2 = solution["p2"].as_f64().unwrap();
    assert!((p1 + p2 - p).abs() < 1e-9);
}

#[test]
fn run_overrides_switch_time_and_p() {
    let dir = tempdir().unwrap();
    let path = gen_instance(
        dir.path(),
        &["--function", "coverage", "--constraint", "cardinality", "-n", "6", "--seed", "7"],
    );
    let out = submax(&[
        "run",
        "--instance",
        path.to_str().unwrap(),
        "--t-s",
        "0.25",
        "--p",
        "0.4",
        "--delta",
        "0.05",
        "--best-of-two",
        "--z-rounds",
        "3",
        "--out",
        "json",
    ]);
    assert!(out.status.success(), "run failed: {}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["rounds"], 3);
    let value = report["value"].as_f64().unwrap();
    let local = report["value_local"].as_f64().unwrap();
    let greedy = report["value_greedy"].as_f64().unwrap();
    // Best-of-two rounds never report less than the per-round minimum.
    assert!(value >= local.min(greedy) - 1e-12);
}
