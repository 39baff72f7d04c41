use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    root.join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stablefrac"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let out = run(&full);
    let value: Value = serde_json::from_slice(&out.stdout).expect("report is JSON");
    let schema: Value =
        serde_json::from_str(include_str!("../report.schema.json")).expect("schema parses");
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    if let Err(e) = validator.validate(&value) {
        panic!("report for {args:?} breaks the schema: {e}\n{value:#}");
    }
    (code(&out), value)
}

fn matching(v: &Value) -> Vec<(String, Vec<String>)> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|e| {
            let workers = e["workers"]
                .as_array()
                .unwrap()
                .iter()
                .map(|w| w.as_str().unwrap().to_string())
                .collect();
            (e["firm"].as_str().unwrap().to_string(), workers)
        })
        .collect()
}

fn owned(rows: &[(&str, &[&str])]) -> Vec<(String, Vec<String>)> {
    rows.iter()
        .map(|(f, ws)| (f.to_string(), ws.iter().map(|w| w.to_string()).collect()))
        .collect()
}

#[test]
fn solve_both_sides() {
    let market = fixture("bb.market");
    let (c, v) = json(&["solve", &market, "--side", "firms"]);
    assert_eq!(c, 0);
    assert_eq!(
        v["result"]["matrix"],
        serde_json::json!([["1", "1", "0", "0"], ["0", "0", "1", "1"]])
    );
    let (c, v) = json(&["solve", &market, "--side", "workers"]);
    assert_eq!(c, 0);
    assert_eq!(
        v["result"]["matrix"],
        serde_json::json!([["1", "0", "0", "1"], ["0", "1", "1", "0"]])
    );
    assert!(v["inputs"]["market"]
        .as_str()
        .unwrap()
        .starts_with("sha256:"));
}

#[test]
fn missing_file_is_a_usage_error() {
    let out = run(&["solve", "does-not-exist.market"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = std::env::temp_dir().join(format!("stablefrac-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.market");
    std::fs::write(&bad, "firms: f\nworkers: w\nfirm f: w\nworker w: f\n").unwrap();
    let out = run(&["solve", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("quota"));

    let frac = dir.join("short.frac");
    std::fs::write(&frac, "1 0 0 0\n").unwrap();
    let out = run(&["check", &fixture("bb.market"), frac.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&run(&["solve"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn check_x1_reports_witness_and_vertex() {
    let (c, v) = json(&["check", &fixture("bb.market"), &fixture("x1.frac")]);
    assert_eq!(c, 1);
    let r = &v["result"];
    assert_eq!(r["strongly_stable"], false);
    assert_eq!(r["witness"]["firm"], "f2");
    assert_eq!(r["witness"]["worker"], "w3");
    assert_eq!(r["witness"]["firm_factor"], "1/2");
    assert_eq!(r["witness"]["worker_factor"], "1/2");
    assert_eq!(r["witness"]["product"], "1/4");
    assert_eq!(r["vertex"]["is_vertex"], true);
    assert_eq!(r["vertex"]["rank"], 8);

    let text = stdout(&run(&["check", &fixture("bb.market"), &fixture("x1.frac")]));
    assert!(text.contains("witness: (f2,w3) 1/2 * 1/2 = 1/4"), "{text}");
}

#[test]
fn check_strongly_stable_points() {
    let (c, v) = json(&["check", &fixture("bb.market"), &fixture("mid.frac")]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["strongly_stable"], true);
    assert_eq!(v["result"]["vertex"]["is_vertex"], false);
    assert!(v["result"]["witness"].is_null());

    let (c, v) = json(&["check", &fixture("bb.market"), &fixture("muF.frac")]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["integral"], true);
    assert_eq!(v["result"]["vertex"]["is_vertex"], true);
}

#[test]
fn check_infeasible_names_first_violation() {
    let (c, v) = json(&["check", &fixture("bb.market"), &fixture("infeasible.frac")]);
    assert_eq!(c, 1);
    let first = &v["result"]["stability_polytope"]["violations"][0];
    assert_eq!(first["constraint"], "capacity(f1)");
    assert_eq!(first["lhs"], "5/2");
    assert_eq!(first["rhs"], "2");
}

#[test]
fn decompose_midpoint() {
    let (c, v) = json(&["decompose", &fixture("bb.market"), &fixture("mid.frac")]);
    assert_eq!(c, 0);
    let terms = v["result"]["decomposition"].as_array().unwrap();
    assert_eq!(terms.len(), 2);
    assert_eq!(
        matching(&terms[0]["matching"]),
        owned(&[("f1", &["w1", "w2"]), ("f2", &["w4", "w3"])])
    );
    assert_eq!(terms[0]["weight"], "1/2");
    assert_eq!(
        matching(&terms[1]["matching"]),
        owned(&[("f1", &["w1", "w4"]), ("f2", &["w3", "w2"])])
    );
    assert_eq!(terms[1]["weight"], "1/2");
    let cert = &v["result"]["certificate"];
    assert_eq!(matching(&cert["base"]), matching(&terms[0]["matching"]));
    assert_eq!(cert["terms"][0]["rotations"], serde_json::json!([]));
    assert_eq!(cert["terms"][1]["rotations"], serde_json::json!([0]));
}

#[test]
fn decompose_refuses_x1_and_accepts_integer_points() {
    let (c, v) = json(&["decompose", &fixture("bb.market"), &fixture("x1.frac")]);
    assert_eq!(c, 1);
    assert_eq!(v["result"]["refused"]["product"], "1/4");

    let (c, v) = json(&["decompose", &fixture("bb.market"), &fixture("muW.frac")]);
    assert_eq!(c, 0);
    let terms = v["result"]["decomposition"].as_array().unwrap();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0]["weight"], "1");
}

#[test]
fn rotations_at_both_ends() {
    let (c, v) = json(&["rotations", &fixture("bb.market")]);
    assert_eq!(c, 0);
    let rots = v["result"]["rotations"].as_array().unwrap();
    assert_eq!(rots.len(), 1);
    assert_eq!(rots[0]["firms"], serde_json::json!(["f1", "f2"]));
    assert_eq!(rots[0]["workers"], serde_json::json!(["w4", "w2"]));

    let (c, v) = json(&[
        "rotations",
        &fixture("bb.market"),
        "--mu",
        &fixture("muW.frac"),
    ]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["rotations"], serde_json::json!([]));

    let (c, _) = json(&[
        "rotations",
        &fixture("bb.market"),
        "--mu",
        &fixture("unstable.frac"),
    ]);
    assert_eq!(c, 1);
}

#[test]
fn stable_all_methods_agree() {
    let (_, brute) = json(&["stable-all", &fixture("bb.market"), "--method", "brute"]);
    let (_, rot) = json(&["stable-all", &fixture("bb.market"), "--method", "rotations"]);
    assert_eq!(brute["result"]["count"], 2);
    assert_eq!(brute["result"]["matchings"], rot["result"]["matchings"]);
}

#[test]
fn verify_random_market() {
    let (c, v) = json(&["verify", "--random", "7", "3", "5", "2", "--samples", "100"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["counterexamples"], serde_json::json!([]));
    assert_eq!(v["result"]["positives"], 100);
    assert_eq!(v["inputs"]["random"]["seed"], 7);
}

#[test]
fn verify_example_file() {
    let (c, v) = json(&["verify", &fixture("bb.market"), "--samples", "50"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["stable_matchings"], 2);
}

#[test]
fn gen_output_parses_back() {
    let out = run(&["gen", "3", "2", "3", "2"]);
    assert_eq!(code(&out), 0);
    let dir = std::env::temp_dir().join(format!("stablefrac-gen-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("g.market");
    std::fs::write(&path, &out.stdout).unwrap();
    let (c, _) = json(&["stable-all", path.to_str().unwrap()]);
    assert_eq!(c, 0);
    assert_eq!(out.stdout, run(&["gen", "3", "2", "3", "2"]).stdout);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for args in [
        vec![
            "--json",
            "verify",
            "--random",
            "4",
            "3",
            "4",
            "2",
            "--samples",
            "30",
        ],
        vec![
            "--json",
            "check",
            &fixture("bb.market"),
            &fixture("x1.frac"),
        ],
    ] {
        let args: Vec<&str> = args.iter().map(|s| s.as_ref()).collect();
        assert_eq!(run(&args).stdout, run(&args).stdout);
    }
}
