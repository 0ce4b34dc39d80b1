//! Compiles a C client with the system compiler against the generated
//! header and the staticlib, then runs it. Guards the whole toolchain path:
//! header syntax, symbol names, linkage, and ABI behavior.

use std::path::{Path, PathBuf};
use std::process::Command;

const CLIENT: &str = r#"
#include "diffee.h"
#include <stdint.h>
#include <stdio.h>
#include <string.h>

/* deterministic full-rank filler so the covariances invert */
static uint64_t state = 0x9e3779b97f4a7c15ULL;
static double next_unit(void) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return (double)(int64_t)state / 9223372036854775808.0;
}

#define N 40
#define P 6

int main(void) {
    double xc[N * P];
    double xd[N * P];
    int i, j;
    for (i = 0; i < N * P; i++) xc[i] = next_unit();
    for (i = 0; i < N * P; i++) xd[i] = next_unit();

    DiffeeSampleMatrix *c = NULL;
    DiffeeSampleMatrix *d = NULL;
    if (diffee_sample_matrix_new(xc, N, P, 'c', &c) != DIFFEE_OK) return 1;
    if (diffee_sample_matrix_new(xd, N, P, 'd', &d) != DIFFEE_OK) return 2;

    double v = -1.0;
    if (diffee_select_v(c, d, &v) != DIFFEE_OK) return 3;
    if (!(v > 0.0 && v <= 1.0)) return 4;

    double grid[DIFFEE_LAMBDA_GRID_LEN];
    if (diffee_lambda_grid(P, N, N, grid) != DIFFEE_OK) return 5;
    if (!(grid[0] > 0.0 && grid[DIFFEE_LAMBDA_GRID_LEN - 1] > grid[0])) return 6;

    DiffeeEstimate *est = NULL;
    if (diffee_fit(c, d, v, grid[9], &est) != DIFFEE_OK) {
        fprintf(stderr, "fit: %s\n", diffee_last_error_message());
        return 7;
    }
    if (diffee_estimate_dim(est) != (size_t)P) return 8;

    double delta[P * P];
    if (diffee_estimate_copy_delta(est, delta, (size_t)(P * P)) != DIFFEE_OK) return 9;
    for (i = 0; i < P; i++)
        for (j = 0; j < i; j++)
            if (delta[i * P + j] != delta[j * P + i]) return 10;

    size_t support = 0;
    for (i = 0; i < P * P; i++)
        if (i / P != i % P && delta[i] != 0.0) support++;
    if (support != diffee_estimate_support_size(est)) return 11;

    DiffeeEstimateList *path = NULL;
    double lams[3];
    lams[0] = grid[0];
    lams[1] = grid[9];
    lams[2] = grid[29];
    if (diffee_path(c, d, v, lams, 3, &path) != DIFFEE_OK) return 12;
    if (diffee_estimate_list_len(path) != (size_t)3) return 13;
    const DiffeeEstimate *mid = diffee_estimate_list_get(path, 1);
    if (mid == NULL || diffee_estimate_lambda(mid) != grid[9]) return 14;
    if (diffee_estimate_list_get(path, 3) != NULL) return 15;

    /* a rejected call must leave a readable explanation */
    DiffeeEstimate *bad = NULL;
    if (diffee_fit(c, d, -0.5, grid[0], &bad) == DIFFEE_OK) return 16;
    if (strlen(diffee_last_error_message()) == 0) return 17;
    if (bad != NULL) return 18;

    diffee_estimate_list_free(path);
    diffee_estimate_free(est);
    diffee_sample_matrix_free(c);
    diffee_sample_matrix_free(d);
    puts("c-smoke-ok");
    return 0;
}
"#;

/// Locates the staticlib next to the test binary: the uplifted copy in
/// `target/<profile>` when present, otherwise the newest hashed artifact in
/// `deps`.
fn static_lib() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let uplifted = profile_dir.join("libdiffee_ffi.a");
    if uplifted.exists() {
        return uplifted;
    }
    let mut best: Option<(std::time::SystemTime, PathBuf)> = None;
    for entry in std::fs::read_dir(profile_dir.join("deps")).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name.starts_with("libdiffee_ffi") && name.ends_with(".a") {
            let mtime = path.metadata().unwrap().modified().unwrap();
            if best.as_ref().is_none_or(|(t, _)| mtime > *t) {
                best = Some((mtime, path));
            }
        }
    }
    best.expect("libdiffee_ffi.a not found; build the diffee-ffi lib first").1
}

#[test]
fn c_client_compiles_links_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    std::fs::write(&src, CLIENT).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let exe = dir.path().join("client");

    let compile = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(static_lib())
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .expect("cc not runnable");
    assert!(
        compile.status.success(),
        "compilation failed:\n{}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&exe).output().unwrap();
    assert!(
        run.status.success(),
        "client exited with {:?}:\nstdout: {}\nstderr: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stdout),
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "c-smoke-ok");
}
