use std::path::PathBuf;
use std::process::{Command, Output};

fn mmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, text: &str) -> String {
    let path = scratch(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn instance(name: &str) -> String {
    let out = mmm(&["gen-ulc", "--vars", "3", "--colors", "2", "--seed", "1"]);
    assert_eq!(code(&out), 0);
    write(name, &stdout(&out))
}

#[test]
fn instance_export_round_trip() {
    let path = instance("rt-instance.json");
    let original = std::fs::read_to_string(&path).unwrap();
    let out = mmm(&["export", &path]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), original);
}

#[test]
fn gadget_json_and_dot() {
    let path = instance("gadget-instance.json");
    let json = mmm(&["build-gadget", "--instance", &path]);
    assert_eq!(code(&json), 0);
    assert!(stdout(&json).contains("\"mmm/gadget\""));
    let gadget = write("gadget.json", &stdout(&json));
    let exported = mmm(&["export", &gadget]);
    assert_eq!(stdout(&exported), stdout(&json));

    let dot = mmm(&["build-gadget", "--instance", &path, "--format", "dot"]);
    assert_eq!(code(&dot), 0);
    assert!(stdout(&dot).starts_with("graph \"gadget\" {"));
    let via_export = mmm(&["export", &gadget, "--format", "dot"]);
    assert_eq!(stdout(&via_export), stdout(&dot));
}

#[test]
fn fracmatch_is_exact() {
    let path = instance("fm-instance.json");
    let out = mmm(&["fracmatch", "--instance", &path]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exact"));
    let fm = write("fm.json", &stdout(&out));
    assert_eq!(stdout(&mmm(&["export", &fm])), stdout(&out));
}

#[test]
fn blowup_and_discretized_matching() {
    let path = instance("bu-instance.json");
    let out = mmm(&["blowup", "--instance", &path, "--rho", "1/2"]);
    assert_eq!(code(&out), 0);
    let bu = write("bu.json", &stdout(&out));
    assert_eq!(stdout(&mmm(&["export", &bu])), stdout(&out));

    let m = mmm(&["blowup", "--instance", &path, "--rho", "1/2", "--discretize"]);
    assert_eq!(code(&m), 0);
    assert!(stdout(&m).contains("\"mmm/matching\""));
}

#[test]
fn solve_bipartise_and_sseh() {
    let graph = write(
        "c4.json",
        r#"{"schema": "mmm/graph", "version": 1, "num_vertices": 4, "edges": [[0, 1], [1, 2], [2, 3], [0, 3]]}"#,
    );
    let out = mmm(&["solve", "mmm", &graph]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["objective"], "2/1");
    assert_eq!(v["status"], "optimal");

    let vc = mmm(&["solve", "vc", &graph]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&vc)).unwrap();
    assert_eq!(v["objective"], "2/1");

    let mbb = mmm(&["solve", "mbb", &graph, "--side", "2"]);
    assert_eq!(code(&mbb), 2, "0,1 | 2,3 is not bipartite here");
    let mbb = mmm(&["solve", "mbb", &write("c4-sided.json", r#"{"schema": "mmm/graph", "version": 1, "num_vertices": 4, "edges": [[0, 2], [0, 3], [1, 2], [1, 3]]}"#), "--side", "2"]);
    assert_eq!(code(&mbb), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&mbb)).unwrap();
    assert_eq!(v["objective"], "2/1");

    let bip = mmm(&["bipartise", &graph]);
    assert_eq!(code(&bip), 0);
    assert!(stdout(&bip).contains("\"num_vertices\": 8"));

    let sseh = mmm(&["sseh", "--side", "4", "--matching"]);
    assert_eq!(code(&sseh), 0);
    assert!(stdout(&sseh).contains("\"mmm/matching\""));
}

#[test]
fn verify_lemma_exit_codes() {
    let pass = mmm(&["verify-lemma", "wei-yes"]);
    assert_eq!(code(&pass), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&pass)).unwrap();
    assert_eq!(report["verdict"], "pass");
    assert_eq!(report["lemma"], "wei-yes");

    let unknown = mmm(&["verify-lemma", "no-such-lemma"]);
    assert_eq!(code(&unknown), 2);

    let starved = mmm(&["verify-lemma", "card-soundness", "--budget", "1"]);
    assert_eq!(code(&starved), 2);
    let report: serde_json::Value = serde_json::from_str(&stdout(&starved)).unwrap();
    assert_eq!(report["verdict"], "inconclusive");

    let params = write("params.json", r#"{"seed": 5, "num_vars": 4}"#);
    let from_file = mmm(&["verify-lemma", "kr07-yes", "--params", &params]);
    assert_eq!(code(&from_file), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&from_file)).unwrap();
    assert_eq!(report["params"]["seed"], 5);
    assert_eq!(report["params"]["num_vars"], 4);
}

#[test]
fn experiment_csv_and_exit_codes() {
    let config = write(
        "exp.json",
        r#"{"schema": "mmm/experiment", "version": 1, "lemmas": ["fra-mat"], "grid": {"num_colors": [2, 3, 4], "num_vars": [3, 6]}}"#,
    );
    let out = mmm(&["experiment", &config, "--format", "csv"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 7);

    let empty = write("empty.json", r#"{"schema": "mmm/experiment", "version": 1, "lemmas": []}"#);
    let out = mmm(&["experiment", &empty, "--format", "csv"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 1);

    let target = scratch("exp-out.csv");
    let out = mmm(&["experiment", &config, "--format", "csv", "-o", target.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read_to_string(&target).unwrap().lines().count(), 7);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&mmm(&["solve", "mmm", "/nonexistent/graph.json"])), 2);
    assert_eq!(code(&mmm(&["gen-ulc", "--format", "dot"])), 2);
    assert_eq!(code(&mmm(&["no-such-command"])), 2);
    let bad = write("bad.json", r#"{"schema": "mmm/graph", "version": 7, "num_vertices": 1, "edges": []}"#);
    let out = mmm(&["export", &bad]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("version"));
}
