use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn monodiag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monodiag"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = monodiag(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

#[test]
fn valid_file_gives_empty_report() {
    assert_eq!(stdout(&["validate", &path("fgh.dgm")]), "");
}

#[test]
fn violations_are_listed() {
    let out = monodiag(&["validate", &path("cycle.dgm")]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text,
        "edges a and b point both ways\nnode x lies on a vertical cycle\nnode y lies on a vertical cycle\n"
    );
}

#[test]
fn segments_in_horizontal_order() {
    assert_eq!(
        stdout(&["segment", &path("fgh.dgm")]),
        "layer 1: x\nlayer 2: y z\n"
    );
    assert_eq!(
        stdout(&["segment", "--porcelain", &path("skip.dgm")]),
        "layer\t1\ta\tb\nlayer\t2\tc\nlayer\t3\tw\n"
    );
}

#[test]
fn resolve_prints_diagram_and_trace() {
    let out = stdout(&["resolve", &path("skip.dgm")]);
    assert!(out.starts_with("use fgh.sig\n"));
    assert!(out.contains("node b%w%1 id@A\n"));
    assert!(out.contains("edge bw.1 b b%w%1\n"));
    assert!(out.contains("# incise bw -> b%w%1 via bw.1 bw.2\n"));
    assert!(out.ends_with("# resistivity 1\n"));
}

#[test]
fn readout_modes() {
    assert_eq!(
        stdout(&["readout", &path("skip.dgm")]),
        "dom: A A\nlayer 1: p ⊗ p\nlayer 2: p ⊗ id[A]\nlayer 3: m\ncod: A\n"
    );
    assert_eq!(
        stdout(&["readout", "--porcelain", &path("fgh.dgm")]),
        "dom\tA\nlayer\t1\tf\nlayer\t2\tg\th\ncod\tB\tB\n"
    );
}

#[test]
fn eval_matches_hand_product() {
    // m (p ⊗ id) (p ⊗ p) with the matrices of fgh.model
    assert_eq!(
        stdout(&["eval", "--model", &path("fgh.model"), &path("skip.dgm")]),
        "0,-1,-1,4;\n2,-6,-7/2,10;\n"
    );
}

#[test]
fn compose_then_read_out() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(data("fgh.sig"), dir.path().join("fgh.sig")).unwrap();
    let composed = stdout(&["compose", &path("fgh.dgm"), &path("merge.dgm")]);
    let file = dir.path().join("composed.dgm");
    fs::write(&file, composed).unwrap();
    assert_eq!(
        stdout(&["readout", file.to_str().unwrap()]),
        "dom: A\nlayer 1: f\nlayer 2: g ⊗ h\nlayer 3: k\nlayer 4: p\ncod: A\n"
    );
}

#[test]
fn raw_flag_keeps_written_order() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(data("fgh.sig"), dir.path().join("fgh.sig")).unwrap();
    // the pairs forced across the diamond are not written out
    let file = dir.path().join("open.dgm");
    fs::write(
        &file,
        "use fgh.sig\nnode x f\nnode y g\nnode z h\nnode w k\nedge e1 x y\nedge e2 x z\nedge e3 y w\nedge e4 z w\nord e1 < e2\nord e3 < e4\n",
    )
    .unwrap();
    let file = file.to_str().unwrap();
    assert_eq!(monodiag(&["validate", file]).status.code(), Some(0));
    assert_eq!(
        monodiag(&["--raw", "validate", file]).status.code(),
        Some(1)
    );
}

#[test]
fn coherence_and_interchange_report_counts() {
    let out = stdout(&["check-coherence", "--max-alpha", "2"]);
    assert!(out.ends_with(" equations, 0 counterexamples\n"));
    assert_eq!(
        stdout(&["check-interchange", "--trials", "5", "--seed", "1"]),
        "5 trials, 0 failures\n"
    );
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(monodiag(&[]).status.code(), Some(2));
    assert_eq!(monodiag(&["validate", "--bogus"]).status.code(), Some(2));
    let out = monodiag(&["readout", "no-such-file.dgm"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8(out.stderr).unwrap().lines().count(), 1);
}
