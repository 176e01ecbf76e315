use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "collisionless.h"

int main(void) {
    CollisionlessModel *model = NULL;
    CollisionlessSolution *sol = NULL;
    double tau = 0.0, tau_prime = 0.0;
    if (collisionless_model_armed_biped(1.0, &model) != COLLISIONLESS_STATUS_OK) return 1;
    if (collisionless_solve(model, 12.566, 6.283, 0.05, &sol) != COLLISIONLESS_STATUS_OK) {
        fprintf(stderr, "%s\n", collisionless_last_error());
        return 2;
    }
    collisionless_solution_times(sol, &tau, &tau_prime);
    printf("%.6f %.6f\n", tau, tau_prime);
    if (collisionless_solve(NULL, 1.0, 1.0, 0.1, &sol) != COLLISIONLESS_STATUS_NULL_POINTER) return 3;
    collisionless_solution_free(sol);
    collisionless_model_free(model);
    return fabs(tau - 3.0795) < 5e-4 ? 0 : 4;
}
"#;

fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = profile_dir().join("libcollisionless_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let work = Path::new(env!("CARGO_TARGET_TMPDIR")).join("c_client");
    std::fs::create_dir_all(&work).unwrap();
    let src = work.join("main.c");
    let exe = work.join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let compiler = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(compiler)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("3.079"));
}
