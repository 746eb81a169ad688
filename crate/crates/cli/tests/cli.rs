use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn obstacle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obstacle")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn gen_fixture(dir: &Path) {
    let out = obstacle(&["gen", "--stage", "op", "--fixture", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

fn manifest(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn base_stage_of_small_shell() {
    let dir = tempfile::tempdir().unwrap();
    let out = obstacle(&["gen", "--stage", "base", "--p", "2", "--d", "3", "--k", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let m = manifest(&dir.path().join("stage-base/manifest.json"));
    assert_eq!(m["node_count"], 1944);
    assert_eq!(m["pair_count"], 648);
    assert!(!dir.path().join("stage-compress").exists());
}

#[test]
fn fixture_op_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    gen_fixture(dir.path());
    let m = manifest(&dir.path().join("stage-op/manifest.json"));
    assert_eq!(m["pair_count"], 16);
    let d = dir.path().to_str().unwrap();
    let out = obstacle(&["verify", "--in", d, "--family-limit", "0"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.path().join("verify-report.json").exists());
}

#[test]
fn degenerate_k_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = obstacle(&["gen", "--stage", "op", "--fixture", "--k", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("k >= 2"));
}

#[test]
fn bad_flags_exit_one() {
    assert_eq!(code(&obstacle(&["gen", "--bogus"])), 1);
    assert_eq!(code(&obstacle(&["--help"])), 0);
}

#[test]
fn tampered_artifacts_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    gen_fixture(dir.path());
    let stage = dir.path().join("stage-op");
    let cert = fs::read_to_string(stage.join("certificates.txt")).unwrap();
    let first = cert.lines().next().unwrap().split(':').nth(1).unwrap().split(';').next().unwrap().trim().to_string();
    let edges = fs::read_to_string(stage.join("graph.edges")).unwrap();
    let cut = edges.replace(&format!("\n{first}\n"), "\n");
    assert_ne!(cut, edges);
    fs::write(stage.join("graph.edges"), cut).unwrap();
    let out = obstacle(&["verify", "--in", stage.to_str().unwrap(), "--check", "op-claims"]);
    assert_eq!(code(&out), 2);

    fs::remove_file(dir.path().join("stage-base/labels.json")).unwrap();
    let out = obstacle(&["verify", "--in", dir.path().join("stage-base").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn stress_in_guaranteed_regime() {
    let dir = tempfile::tempdir().unwrap();
    gen_fixture(dir.path());
    let stage = dir.path().join("stage-op");
    let out_dir = dir.path().join("stress");
    let out = obstacle(&[
        "stress", "--in", stage.to_str().unwrap(), "--budget-clique-edges", "15", "--trials", "100", "--seed", "7",
        "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("stress.csv")).unwrap();
    assert_eq!(csv.lines().count(), 101);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn incompress_and_spanner_run() {
    let dir = tempfile::tempdir().unwrap();
    gen_fixture(dir.path());
    let stage = dir.path().join("stage-op");
    let s = stage.to_str().unwrap();
    let inc = dir.path().join("inc");
    let out = obstacle(&["incompress", "--in", s, "--bits", "8", "--compressor", "bitmap", "--out", inc.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(manifest(&inc.join("collision.json"))["gap_at_least_k_plus_1"], true);

    let sp = dir.path().join("sp");
    let out = obstacle(&["spanner", "--in", s, "--algo", "greedy", "--t", "2", "--out", sp.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&sp.join("spanner.json"));
    assert_eq!(m["pair_audit"]["counting_consistent"], true);
}

#[test]
fn runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    gen_fixture(a.path());
    gen_fixture(b.path());
    for stage in ["base", "compress", "op"] {
        for f in ["graph.edges", "labels.json", "pairs.txt", "certificates.txt", "manifest.json"] {
            let rel = format!("stage-{stage}/{f}");
            assert_eq!(fs::read(a.path().join(&rel)).unwrap(), fs::read(b.path().join(&rel)).unwrap(), "{rel}");
        }
    }
    assert_eq!(fs::read(a.path().join("run.json")).unwrap(), fs::read(b.path().join("run.json")).unwrap());
}
