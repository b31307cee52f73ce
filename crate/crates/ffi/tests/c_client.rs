//! Compiles a small C program against the generated header and the static
//! library, then runs it.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "cooploc.h"

int main(void) {
    CooplocConfig *cfg = NULL;
    if (cooploc_config_from_toml("vehicles = 6\nticks = 20\ntrials = 1\n", NULL, &cfg) != COOPLOC_STATUS_OK) return 10;
    CooplocOutcome *out = NULL;
    if (cooploc_experiment_run(cfg, &out) != COOPLOC_STATUS_OK) return 11;
    double msle = -1.0;
    if (cooploc_outcome_msle(out, COOPLOC_METHOD_GR_CL, &msle) != COOPLOC_STATUS_OK || msle < 0.0) return 12;
    if (cooploc_config_from_toml("nope = 1\n", NULL, &cfg) != COOPLOC_STATUS_INVALID) return 13;
    if (strstr(cooploc_last_error(), "nope") == NULL) return 14;
    printf("%s %.6f\n", cooploc_version(), msle);
    cooploc_outcome_free(out);
    cooploc_config_free(cfg);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libcooploc_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    let bin = dir.path().join("client");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg(format!("-I{}", manifest.join("include").display()))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success());

    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "client exited with {:?}", out.status.code());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with(env!("CARGO_PKG_VERSION")));
}
