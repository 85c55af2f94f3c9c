//! Compiles a C client against the generated header, as C and as C++.
//! Skipped when the compiler is not on PATH.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "membrane.h"

int main(void) {
    MembraneMesh *mesh = NULL;
    if (membrane_mesh_cylinder(0.5, 0.6, 4, 16, 2, &mesh) != MEMBRANE_STATUS_OK) return 10;
    double area = 0.0;
    if (membrane_mesh_area(mesh, &area) != MEMBRANE_STATUS_OK) return 11;
    membrane_mesh_free(mesh);
    MembraneConfig *cfg = NULL;
    if (membrane_config_named("no-such-scenario", &cfg) != MEMBRANE_STATUS_CONFIG) return 12;
    if (membrane_last_error()[0] == '\0') return 13;
    printf("%.6f\n", area);
    return 0;
}
"#;

fn compile(compiler: &str, std: &str, ext: &str) {
    if Command::new(compiler).arg("--version").output().is_err() {
        eprintln!("{compiler} not found, skipping");
        return;
    }
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join(format!("main.{ext}"));
    std::fs::write(&src, PROGRAM).unwrap();
    let out = Command::new(compiler)
        .args([std, "-Wall", "-Wextra", "-Werror", "-pedantic", "-c", "-I"])
        .arg(include)
        .arg(&src)
        .arg("-o")
        .arg(dir.path().join("main.o"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn header_compiles_as_c99() {
    compile("cc", "-std=c99", "c");
}

#[test]
fn header_compiles_as_cpp() {
    compile("c++", "-std=c++17", "cpp");
}
