use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn header() -> String {
    fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/nomdd.h")).unwrap()
}

#[test]
fn header_declares_the_interface() {
    let h = header();
    assert!(h.contains("#ifndef NOMDD_H"));
    assert!(h.contains("typedef struct NomddInstance NomddInstance;"));
    for name in [
        "nomdd_instance_parse",
        "nomdd_instance_generate",
        "nomdd_instance_free",
        "nomdd_instance_num_jobs",
        "nomdd_instance_to_text",
        "nomdd_string_free",
        "nomdd_filter_bounds",
        "nomdd_solve",
        "nomdd_last_error",
    ] {
        assert!(h.contains(&format!("{name}(")), "{name}");
    }
    for (name, value) in [
        ("NOMDD_STATUS_OK", 0),
        ("NOMDD_STATUS_PARSE_ERROR", 3),
        ("NOMDD_STATUS_PANIC", 8),
        ("NOMDD_VARIANT_EXACT_BC", 3),
    ] {
        assert!(h.contains(&format!("{name} = {value},")), "{name}");
    }
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include "nomdd.h"

int main(void) {
    NomddInstance *inst = NULL;
    if (nomdd_instance_parse("4\n4 2 6\n0 3 10\n0 2 9\n7 6 19\n", &inst) != NOMDD_STATUS_OK) return 1;
    int64_t est[4], lct[4];
    if (nomdd_filter_bounds(inst, NOMDD_VARIANT_EXACT_BC, 0, est, lct, 4) != NOMDD_STATUS_OK) return 2;
    if (est[3] != 8 || lct[0] != 6) return 3;
    NomddSolveResult r;
    int64_t starts[4];
    if (nomdd_solve(inst, NOMDD_VARIANT_RELAXED_BC, 3, 0, &r, starts, 4) != NOMDD_STATUS_OK) return 4;
    if (!r.has_solution || !r.complete) return 5;
    if (nomdd_instance_parse("oops", &inst) != NOMDD_STATUS_PARSE_ERROR || nomdd_last_error() == NULL) return 6;
    nomdd_instance_free(inst);
    printf("%lld\n", (long long)r.best_cost);
    return 0;
}
"#;

/// Directory holding the library artifacts of the current profile.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = artifact_dir().join("libnomdd_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    fs::write(&src, PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("running cc");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let cost: i64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!(cost >= 0);
}
