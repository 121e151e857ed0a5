use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn sample(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/samples")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn bbj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bbj"))
        .args(args)
        .stdin(Stdio::null())
        .output()
        .unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bbj-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn asm_then_run_equals_run() {
    let obj = tmp("hello.obj");
    let out = bbj(&["asm", &sample("hello.asm"), "-o", obj.to_str().unwrap(), "--symbols"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let syms = std::fs::read_to_string(obj.with_extension("sym")).unwrap();
    assert!(syms.lines().any(|l| l == "Z0 0"));
    let direct = bbj(&["run", &sample("hello.asm")]);
    let via_obj = bbj(&["run", obj.to_str().unwrap()]);
    assert_eq!(direct.stdout, b"Hello, World!\n");
    assert_eq!(direct.stdout, via_obj.stdout);
    assert_eq!(via_obj.status.code(), Some(0));
}

#[test]
fn exit_codes_follow_run_status() {
    assert_eq!(bbj(&["run", "--max-steps", "10", &sample("factorial.asm")]).status.code(), Some(2));
    assert_eq!(bbj(&["run", &sample("echo.asm")]).status.code(), Some(4));
    assert_eq!(bbj(&["run", "--max-mem-bits", "64", &sample("hi.asm")]).status.code(), Some(1));
}

#[test]
fn assembly_errors_exit_one() {
    let src = tmp("dup.asm");
    std::fs::write(&src, "X:0\nX:1\n").unwrap();
    let out = bbj(&["asm", src.to_str().unwrap(), "-o", "-"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("duplicate label `X`") && err.contains(":1") && err.contains(":2"), "{err}");

    std::fs::write(&src, "Z0:0 Z1:0\n.include missing\n").unwrap();
    let out = bbj(&["asm", src.to_str().unwrap(), "-o", "-"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("searched"));
}

#[test]
fn bad_word_size_is_rejected() {
    assert!(!bbj(&["genlib", "--word-size", "12"]).status.success());
    assert!(!bbj(&["run", "--word-size", "4", &sample("hi.asm")]).status.success());
}

#[test]
fn genlib_and_expand() {
    let lib = String::from_utf8(bbj(&["genlib", "8"]).stdout).unwrap();
    let body: Vec<&str> = lib
        .lines()
        .skip_while(|l| *l != ".def copy X Y")
        .skip(1)
        .take_while(|l| *l != ".end")
        .collect();
    assert_eq!(body.len(), 8);

    let src = tmp("plain.asm");
    std::fs::write(&src, "A:1 B:2 C\nC:3 4 5\n").unwrap();
    let out = bbj(&["expand", src.to_str().unwrap()]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "A:1 B:2 C\nC:3 4 5\n");
}

#[test]
fn trace_prints_a_line_per_step() {
    let out = bbj(&["run", "--trace", &sample("hi.asm")]);
    assert_eq!(out.stdout, b"Hi");
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().count(), 18);
}

#[test]
fn selftest_prints_suite_lines() {
    let out = bbj(&["selftest", "--macro", "inc", "--word-size", "16", "--cases", "3"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "suite=inc ws=16 seed=1 cases=7 failures=0\n");
}
