use std::path::Path;
use std::process::{Command, Output};

fn membrane(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_membrane"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

const SMALL_CYLINDER: &str = r#"
scenario = "solve-cylinder-load"
[mesh]
axial = 2
circumferential = 6
"#;

#[test]
fn hooke_at_half_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "h.toml",
        "scenario = \"solve-cylinder-load\"\n[material]\nmodel = \"hooke\"\nnu = 0.5\n",
    );
    let out = membrane(&["solve", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nu < 0.5"), "{err}");
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = membrane(&["solve", "--config", "nope.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_mesh_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "m.toml",
        "scenario = \"solve-custom\"\n[mesh]\npath = \"absent.off\"\n[material]\nE = 1e6\nnu = 0.5\nthickness = 0.01\n",
    );
    let out = membrane(&["solve", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k.toml", "scenario = \"solve-cylinder-load\"\n[solver]\nrel_tol = 1e-9\ntypo = 3\n");
    let out = membrane(&["solve", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("typo"));
}

#[test]
fn unknown_scenario_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = membrane(&["solve", "--scenario", "inflate-balloon"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn zero_load_solve_stays_at_rest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "z.toml",
        r#"
scenario = "solve-custom"
[mesh]
kind = "cylinder"
radius = 0.5
height = 1.0
axial = 2
circumferential = 8
[material]
E = 1e6
nu = 0.5
thickness = 0.01
"#,
    );
    let out = membrane(&["solve", "--config", &cfg, "--out", "res"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["displacement.vtk", "report.csv", "summary.txt"] {
        assert!(dir.path().join("res").join(f).exists(), "{f}");
    }
    let vtk = std::fs::read_to_string(dir.path().join("res/displacement.vtk")).unwrap();
    let vectors = vtk.split("VECTORS").nth(1).unwrap();
    for v in vectors.lines().skip(1).flat_map(|l| l.split_whitespace()) {
        assert_eq!(v.parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn single_thread_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL_CYLINDER);
    for run in ["a", "b"] {
        let out = membrane(&["solve", "--config", &cfg, "--threads", "1", "--out", run], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["report.csv", "displacement.vtk"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn formfind_writes_history() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "f.toml",
        "scenario = \"formfind-catenoid\"\n[mesh]\naxial = 2\ncircumferential = 8\n",
    );
    let out = membrane(&["formfind", "--config", &cfg, "--out", "ff"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("ff/formfind.csv")).unwrap();
    assert!(csv.starts_with("iteration,area_m2"));
    assert!(dir.path().join("ff/final.off").exists());
}

#[test]
fn non_convergence_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "n.toml", &format!("{SMALL_CYLINDER}[solver]\nmax_newton = 1\n"));
    let out = membrane(&["solve", "--config", &cfg, "--out", "nc"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join("nc/report.csv").exists());
}

#[test]
fn shipped_scenarios_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut count = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            membrane_core::config::ScenarioConfig::from_file(&path)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 4);
}
