//! End-to-end runs of the `hyperslice` binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperslice")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn curve_wnd_is_reproducible() {
    let args = ["curve-wnd", "--n", "40", "--L", "20", "--t-steps", "3", "--repeats", "2", "--seed", "7"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some("method,t,value"));
    // 4 methods x 3 t values
    assert_eq!(lines.count(), 12);

    let other = stdout(&["curve-wnd", "--n", "40", "--L", "20", "--t-steps", "3", "--repeats", "2", "--seed", "8"]);
    assert_ne!(a, other);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trees.csv");
    let p = path.to_str().unwrap();
    let args = ["curve-trees", "--r", "2", "--h", "2", "--tau", "0.1,0.5", "--L", "10", "--repeats", "2", "--out", p];
    assert!(run(&args).stdout.is_empty());
    let text = read(&path);
    assert!(text.starts_with("method,tau,value\n"));
    assert_eq!(text.lines().count(), 1 + 8);
    let dash = stdout(&[
        "curve-trees",
        "--r",
        "2",
        "--h",
        "2",
        "--tau",
        "0.1,0.5",
        "--L",
        "10",
        "--repeats",
        "2",
        "--out",
        "-",
    ]);
    assert_eq!(text, dash);
}

#[test]
fn tree_embed_output() {
    let text = stdout(&["tree-embed", "--r", "3", "--h", "2", "--tau", "0.4"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("node_id,parent_id,x,y"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 1 + 3 + 9);
    assert_eq!(&rows[0][..2], ["0", "-1"]);
    assert_eq!(&rows[4][..2], ["4", "1"]);
}

#[test]
fn flow_log_is_reproducible_apart_from_wallclock() {
    let args =
        ["flow", "--method", "HHSW", "--iters", "6", "--n", "30", "--L", "20", "--log-every", "2", "--seed", "3"];
    let strip = |s: String| -> Vec<String> { s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect() };
    let a = strip(stdout(&args));
    assert_eq!(a, strip(stdout(&args)));
    assert_eq!(a[0], "iter,w2_exact,loss_estimate");
    let iters: Vec<&str> = a[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(iters, ["0", "2", "4", "6"]);
}

#[test]
fn flow_snapshots_and_init() {
    let dir = tempfile::tempdir().unwrap();
    let init = dir.path().join("init.csv");
    std::fs::write(&init, "x,y\n0.1,0.0\n-0.2,0.1\n0.0,0.3\n0.05,-0.05\n").unwrap();
    let snaps = dir.path().join("snaps.csv");
    let args = [
        "flow",
        "--method",
        "SWp",
        "--iters",
        "2",
        "--L",
        "10",
        "--log-every",
        "1",
        "--init",
        init.to_str().unwrap(),
        "--snapshots",
        snaps.to_str().unwrap(),
    ];
    stdout(&args);
    let text = read(&snaps);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iter,index,c0,c1"));
    assert_eq!(lines.count(), 3 * 4);
}

#[test]
fn show_preset() {
    let text = stdout(&["flow", "--preset", "mixture-near", "--show-preset"]);
    assert!(text.starts_with("preset=mixture-near\n"));
    assert!(text.contains("lr=1.0000000000000000e0"));
    assert!(text.contains("iters=2000"));
}

#[test]
fn errors_are_reported_with_their_kind() {
    let out = run(&["flow", "--preset", "nowhere"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("usage_error: unknown preset"), "{err}");

    let out = run(&["tree-embed", "--tau", "1.5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("domain_error:"));

    let out = run(&["curve-wnd", "--method", "XYZ"]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
}

#[test]
fn step_cap_aborts_the_flow() {
    let out = run(&["flow", "--preset", "wnd-far", "--method", "SWl", "--iters", "50", "--n", "100", "--L", "50"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("step_cap:") || err.starts_with("non_finite:"), "{err}");
}

#[test]
fn bench_runtime_rows() {
    let text = stdout(&["bench-runtime", "--n", "50,100", "--L", "10", "--repeats", "1", "--method", "GHSW,W"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("method,n,seconds"));
    let methods: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(methods, ["GHSW", "GHSW", "W", "W"]);
}
