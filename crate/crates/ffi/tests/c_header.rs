//! Compiles and runs a C program against the generated header and the
//! shared library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "stepsql.h"

int main(int argc, char **argv) {
    StepsqlSchema *schema = NULL;
    if (stepsql_schema_load(argv[1], &schema) != STEPSQL_STATUS_OK) {
        fprintf(stderr, "%s\n", stepsql_last_error());
        return 1;
    }
    StepsqlPipeline *pipeline = NULL;
    if (stepsql_pipeline_new(schema, NULL, &pipeline) != STEPSQL_STATUS_OK) return 2;
    char *sql = NULL;
    if (stepsql_pipeline_ask(pipeline, "total amount for Alice", &sql) != STEPSQL_STATUS_OK) return 3;
    printf("%s\n", sql);
    stepsql_string_free(sql);
    if (stepsql_pipeline_ask(pipeline, "zebra quartz", &sql) != STEPSQL_STATUS_STAGE_FAILED) return 4;
    printf("%s\n", stepsql_last_error());
    stepsql_pipeline_free(pipeline);
    stepsql_schema_free(schema);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // integration test binaries live in target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap().to_path_buf();
    assert!(lib_dir.join("libstepsql_ffi.so").exists(), "shared library not built in {}", lib_dir.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&src)
        .arg("-L")
        .arg(&lib_dir)
        .arg("-lstepsql_ffi")
        .arg("-o")
        .arg(&bin)
        .status()
        .expect("running cc");
    assert!(status.success());
    let out = Command::new(&bin)
        .arg(manifest.join("../core/tests/fixtures/schema.json"))
        .env("LD_LIBRARY_PATH", &lib_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "select sum(amount) from power_bill where user_name = 'Alice'");
    assert!(lines[1].starts_with("table-selection failed"));
}

