//! End-to-end coverage of the binary: exit codes, report shapes, and the
//! determinism contract, all through real process spawns.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tropkern"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary spawns")
}

fn run_with_env(args: &[&str], key: &str, value: &str) -> Output {
    bin().args(args).env(key, value).output().expect("binary spawns")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON report")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).expect("fixture writes");
    path
}

/// `instance build` into `dir`, returning the file path.
fn build_instance(dir: &Path, name: &str, file: &str, seed: &str) -> PathBuf {
    let path = dir.join(file);
    let out = run(&[
        "instance",
        "build",
        "--name",
        name,
        "--out",
        path.to_str().unwrap(),
        "--seed",
        seed,
    ]);
    assert_eq!(code(&out), 0, "instance build failed: {}", stderr(&out));
    path
}

#[test]
fn theorem_4_on_a_random_semimetric_holds() {
    let out = run(&[
        "check-theorem",
        "--id",
        "4",
        "--instance",
        "random-semimetric",
        "--seed",
        "7",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["theorem"], "4");
    assert_eq!(r["verdict"], "holds");
    assert_eq!(r["instance"], "random-semimetric(4)");
    assert_eq!(r["seed"], 7);
    assert!(r["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn example7_demo_reports_sinking_kernel_bounds() {
    let out = run(&["demo", "example7", "--window", "10"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["phi_integral"], false);
    let bounds: Vec<f64> = r["kernel_upper_bounds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b.as_f64().expect("finite bound"))
        .collect();
    assert_eq!(bounds, vec![0.0, -10.0, -20.0, -40.0, -80.0]);
    assert!(bounds.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn demo_concave_separates_hull_from_pointwise_sup() {
    let out = run(&["demo", "concave"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["delta_mid_linear"], false);
    assert_eq!(r["hull_sum"][1], 0);
    assert_eq!(r["pointwise_sup"][1], -5);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = [
        "check-theorem",
        "--id",
        "4",
        "--instance",
        "random-semimetric",
        "--seed",
        "7",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn env_seed_matches_flag_seed_and_flag_wins() {
    let flag = run(&["check-theorem", "--id", "4", "--instance", "random-semimetric", "--seed", "7"]);
    let env = run_with_env(
        &["check-theorem", "--id", "4", "--instance", "random-semimetric"],
        "TROPKERN_SEED",
        "7",
    );
    assert_eq!(flag.stdout, env.stdout);

    let both = run_with_env(
        &["check-theorem", "--id", "4", "--instance", "random-semimetric", "--seed", "7"],
        "TROPKERN_SEED",
        "99",
    );
    assert_eq!(flag.stdout, both.stdout);

    let bad = run_with_env(
        &["check-theorem", "--id", "4", "--instance", "random-semimetric"],
        "TROPKERN_SEED",
        "zebra",
    );
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("TROPKERN_SEED"));
}

#[test]
fn malformed_json_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_file(dir.path(), "bad.json", "{\"generators\": [[0, 1]], \"ground");
    let out = run(&["membership", "--module", bad.to_str().unwrap(), "--vector", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("bad.json"), "stderr: {err}");
    assert!(err.contains("line 1"), "stderr: {err}");
}

#[test]
fn unknown_theorem_id_exits_2() {
    let out = run(&["check-theorem", "--id", "9", "--instance", "full-KX"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("theorem id"));
}

#[test]
fn unknown_subcommand_exits_2() {
    let out = run(&["frobnicate"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn membership_splits_exit_codes_on_the_chain() {
    let dir = tempfile::tempdir().unwrap();
    let module = build_instance(dir.path(), "nonincreasing-chain", "chain.json", "1");

    let member = write_file(dir.path(), "mono.json", "{\"values\": [3, 2, 2, \"-inf\"]}");
    let out = run(&["membership", "--module", module.to_str().unwrap(), "--vector", member.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(report(&out)["member"], true);

    let outsider = write_file(dir.path(), "bump.json", "[0, 5, 0, 0]");
    let out = run(&["membership", "--module", module.to_str().unwrap(), "--vector", outsider.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["member"], false);
    assert!(r["projection"].as_array().is_some());
}

#[test]
fn built_instances_feed_the_other_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let metric = build_instance(dir.path(), "random-semimetric", "d.json", "7");
    let module = build_instance(dir.path(), "bounded-KX", "v.json", "7");

    let out = run(&["validate-semimetric", "--matrix", metric.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(report(&out)["valid"], true);

    let out = run(&["decompose", "--module", module.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["verified"], true);
    assert!(r["term_count"].as_u64().unwrap() >= 1);

    let out = run(&[
        "max-kernel",
        "--module",
        module.to_str().unwrap(),
        "--operator",
        metric.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(report(&out)["verified"], true);
}

#[test]
fn negated_metric_and_nonstrict_indicator_validate() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["metric-lipschitz", "order-indicator-nonstrict"] {
        let fixture = build_instance(dir.path(), name, &format!("{name}.json"), "1");
        let out = run(&["validate-semimetric", "--matrix", fixture.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{name} stderr: {}", stderr(&out));
        assert_eq!(report(&out)["valid"], true, "{name}");
    }
}

#[test]
fn strict_indicator_fails_validation_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let strict = build_instance(dir.path(), "order-indicator-strict", "strict.json", "1");
    let out = run(&["validate-semimetric", "--matrix", strict.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["valid"], false);
    assert_eq!(r["witness"]["x"], "2");
    assert_eq!(r["witness"]["y"], "1");
}

#[test]
fn edge_list_closure_takes_shortest_paths() {
    let dir = tempfile::tempdir().unwrap();
    let edges = write_file(dir.path(), "edges.txt", "# triangle\na b 1\nb c 1\na c 5\n");
    let closed = dir.path().join("closed.json");
    let out = run(&[
        "closure",
        "--matrix",
        edges.to_str().unwrap(),
        "--out",
        closed.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["reflexive"], true);
    assert_eq!(r["symmetric"], true);
    // the two-hop route a-b-c at total distance 2 beats the direct edge
    assert_eq!(r["closure"]["entries"][0][2], -2);

    let reread = run(&["validate-semimetric", "--matrix", closed.to_str().unwrap()]);
    assert_eq!(code(&reread), 0);
}

#[test]
fn malformed_edge_list_exits_2_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let edges = write_file(dir.path(), "edges.txt", "a b 1\nb c\n");
    let out = run(&["closure", "--matrix", edges.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "stderr: {}", stderr(&out));
}

#[test]
fn tolerance_relaxes_exact_validation_only_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let near = write_file(
        dir.path(),
        "near.json",
        "{\"semiring\": \"rmax-complete\", \"domain\": [\"a\", \"b\", \"c\"], \
         \"entries\": [[0, -1, -2.05], [-1, 0, -1], [-2.05, -1, 0]]}",
    );
    let exact = run(&["validate-semimetric", "--matrix", near.to_str().unwrap()]);
    assert_eq!(code(&exact), 1);
    assert_eq!(report(&exact)["witness"]["x"], "a");

    let slack = run(&[
        "validate-semimetric",
        "--matrix",
        near.to_str().unwrap(),
        "--tolerance",
        "0.1",
    ]);
    assert_eq!(code(&slack), 0, "stderr: {}", stderr(&slack));
    assert_eq!(report(&slack)["valid"], true);
}

#[test]
fn lip_project_lands_in_lip() {
    let dir = tempfile::tempdir().unwrap();
    let edges = write_file(dir.path(), "edges.txt", "a b 1\nb c 1\n");
    let closed = dir.path().join("closed.json");
    let out = run(&["closure", "--matrix", edges.to_str().unwrap(), "--out", closed.to_str().unwrap()]);
    assert_eq!(code(&out), 0);

    let spike = write_file(dir.path(), "spike.json", "{\"values\": [0, \"-inf\", -3]}");
    let out = run(&["lip-project", "--matrix", closed.to_str().unwrap(), "--vector", spike.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["projection"], serde_json::json!([0, -1, -2]));
    assert_eq!(r["already_lip"], false);
}

#[test]
fn output_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let piped = run(&["demo", "concave"]);
    let filed = run(&["demo", "concave", "--output", path.to_str().unwrap()]);
    assert_eq!(code(&filed), 0);
    assert!(filed.stdout.is_empty());
    let contents = std::fs::read(&path).unwrap();
    assert_eq!(contents, piped.stdout);
}

#[test]
fn every_theorem_id_runs_on_the_lipschitz_catalogue_entry() {
    for id in ["1", "2", "3", "3a", "4", "5"] {
        let out = run(&[
            "check-theorem",
            "--id",
            id,
            "--instance",
            "metric-lipschitz",
            "--seed",
            "11",
        ]);
        assert_eq!(code(&out), 0, "id {id} stderr: {}", stderr(&out));
        let r = report(&out);
        assert_eq!(r["verdict"], "holds", "id {id}");
        assert_eq!(r["theorem"], id);
    }
}

#[test]
fn window_instance_file_round_trips_through_check_theorem() {
    let dir = tempfile::tempdir().unwrap();
    let win = build_instance(dir.path(), "example7-window(6)", "win.json", "1");
    // the declared coordinate functional is not b-linear on a finite
    // window, so the hypothesis fails and the check reports witnesses
    let out = run(&["check-theorem", "--id", "2", "--instance", win.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["verdict"], "fails");
    assert_eq!(r["hypothesis_ok"], false);
    assert!(!r["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn timings_flag_fills_elapsed_ms() {
    let quiet = run(&["demo", "concave"]);
    assert!(report(&quiet)["elapsed_ms"].is_null());
    let timed = run(&["demo", "concave", "--timings"]);
    assert!(report(&timed)["elapsed_ms"].is_u64());
}
