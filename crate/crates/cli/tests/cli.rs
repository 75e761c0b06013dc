use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn logbm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logbm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn setup() -> TempDir {
    let d = TempDir::new().unwrap();
    write(&d, "cube.json5", "{kind: 'named', name: 'cube', n: 3}");
    write(&d, "cross.json5", "// unit cross-polytope\n{kind: 'named', name: 'cross-polytope', n: 3}");
    write(&d, "ball.json5", "{kind: 'named', name: 'ball', n: 3}");
    write(&d, "square.json5", "{kind: 'vrep', vertices: [[1, 1], [-1, 1], [1, -1], [-1, -1]]}");
    write(&d, "hexagon.json5", "{kind: 'named', name: 'hexagon'}");
    write(
        &d,
        "pair.json5",
        "{k: {kind: 'named', name: 'cube', n: 3}, l: {kind: 'named', name: 'cube', n: 3, scale: 2}}",
    );
    write(
        &d,
        "family.json5",
        "{components: [{kind: 'named', name: 'square'}, {kind: 'named', name: 'segment'}], factors: [2, 0.5]}",
    );
    d
}

#[test]
fn passing_run_writes_csv() {
    let d = setup();
    let o = logbm(d.path(), &["verify-logbm", "cube.json5", "cross.json5", "--out", "r.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(d.path().join("r.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("check,lhs,rhs,margin,sound,tolerance,seed,grid"));
    let first = lines.next().unwrap();
    assert!(first.starts_with("logbm[lambda=0.25],"), "{first}");
    assert!(first.ends_with(",24301,icosahedral-5"), "{first}");
}

#[test]
fn refuted_strictness_exits_one() {
    let d = setup();
    let o = logbm(d.path(), &["--lambda", "0.5", "equality-suite", "pair.json5"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("strict[lambda=0.5]"));
}

#[test]
fn coarse_grid_exits_two() {
    let d = setup();
    let o = logbm(
        d.path(),
        &["--grid-level", "icosahedral-1", "--max-refinements", "0", "verify-logbm", "cube.json5", "ball.json5"],
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid too coarse"));
}

#[test]
fn bad_inputs_exit_three() {
    let d = setup();
    write(&d, "broken.json5", "{kind: 'vrep', vertices: [[1, 0], [0, 1]]");
    write(&d, "flat.json5", "{kind: 'vrep', vertices: [[1, 0], [-1, 0], [0, 0]]}");
    for args in [
        vec!["verify-logm", "broken.json5", "cube.json5"],
        vec!["verify-logm", "flat.json5", "square.json5"],
        vec!["verify-logm", "missing.json5", "cube.json5"],
        vec!["verify-logm", "cube.json5", "square.json5"],
        vec!["--lambda", "1.5", "verify-logbm", "cube.json5", "cross.json5"],
        vec!["--format", "xml", "verify-logm", "cube.json5", "cross.json5"],
        vec!["--seed", "banana", "verify-logm", "cube.json5", "cross.json5"],
        vec!["no-such-command"],
    ] {
        let o = logbm(d.path(), &args);
        assert_eq!(code(&o), 3, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty(), "{args:?}");
    }
    let o = logbm(d.path(), &["verify-logm", "broken.json5", "cube.json5"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}

#[test]
fn reruns_are_byte_identical() {
    let d = setup();
    let args = ["--mc-samples", "40000", "--seed", "0x2a", "gaussian-suite", "cube.json5", "cross.json5"];
    let a = logbm(d.path(), &args);
    let b = logbm(d.path(), &args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let c = logbm(d.path(), &["--mc-samples", "40000", "--seed", "42", "gaussian-suite", "cube.json5", "cross.json5"]);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn text_format_and_other_commands() {
    let d = setup();
    let o = logbm(d.path(), &["--format", "text", "symmetrize", "hexagon.json5", "--reflections", "dihedral-6"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.starts_with("command: symmetrize\n"));
    assert!(text.contains("group-order"));
    assert!(text.trim_end().ends_with("status: pass"));

    let o = logbm(d.path(), &["equality-suite", "family.json5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));

    write(&d, "refl.json", "[{normal: [1, 0]}, {normal: [0, 1]}]");
    let o = logbm(d.path(), &["--format", "text", "detect-sum", "square.json5", "--reflections", "refl.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("{1}{2}"));

    let o = logbm(d.path(), &["uniqueness", "cube.json5", "cross.json5"]);
    assert_eq!(code(&o), 0);
}
