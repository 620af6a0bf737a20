//! End-to-end checks of the command-line surface against the shipped data
//! files: exit codes, output shapes, and determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_limitlab"));
    c.current_dir(env!("CARGO_MANIFEST_DIR"));
    c
}

fn data(name: &str) -> String {
    PathBuf::from("../../data").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn limitlab")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn run_prints_tape_and_change_counts() {
    let out = run(&[
        "run",
        "--kind=limit",
        &format!("--program={}", data("E.prog")),
        "--input=const:0",
        "--budget=1000",
        "--prefix=8",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("11111111\n"), "got {text}");
    assert!(text.contains("changes: 0 0 0 0 0 0 0 0"));

    // a nonzero cell flips the verdict, with one change on the early cells
    let out = run(&[
        "run",
        "--kind=limit",
        &format!("--program={}", data("E.prog")),
        "--input=word:0,0,3",
        "--budget=2000",
        "--prefix=4",
    ]);
    let text = stdout(&out);
    assert!(text.starts_with("0000\n"), "got {text}");
    assert!(text.contains("changes: 1 1 0 0"), "got {text}");
}

#[test]
fn run_is_deterministic() {
    let args = [
        "run",
        "--kind=limit",
        &format!("--program={}", data("E.prog")),
        "--input=word:0,1",
        "--budget=5000",
        "--prefix=6",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn budget_env_var_is_honored() {
    let mut c = bin();
    c.env("LIMITLAB_BUDGET", "1000");
    let out = c
        .args([
            "run",
            "--kind=monotone",
            &format!("--program={}", data("copier.prog")),
            "--input=word:7,8,9",
            "--prefix=3",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("steps: 1000"));
}

#[test]
fn convert_emits_a_monotone_program() {
    let out = run(&["convert", "--from=limit", "--to=monotone", &format!("--program={}", data("E.prog"))]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("APPEND"), "converted program should append: {text}");
    assert!(!text.contains("WRITE"), "monotone programs never write: {text}");
}

#[test]
fn translate_lists_and_applies() {
    let out = run(&["translate", "--list"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("id<=delta"));

    let out = run(&["translate", "--name=id<=delta", "--input=word:2,0,5", "--prefix=6"]);
    assert!(out.status.success());
    // the constant-family name interleaves the point with itself
    assert_eq!(stdout(&out).trim(), "220205");
}

#[test]
fn eval_prints_exact_rational_balls() {
    let out = run(&[
        "eval",
        "--space=unit",
        "--function=f_unit",
        &format!("--universe={}", data("fin.json")),
        "--point=3/4",
        "--precision=6",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "0 ± 1/64");

    let out = run(&[
        "eval",
        "--space=unit",
        "--function=f_unit",
        &format!("--universe={}", data("fin.json")),
        "--point=5/16",
        "--precision=6",
    ]);
    assert_eq!(stdout(&out).trim(), "1/2 ± 1/64");
}

#[test]
fn invert_limit_reports_bits_and_witnesses() {
    let out = run(&[
        "invert-limit",
        &format!("--oracle=whitelist:{}", data("friedberg.json")),
        "--input=word:3,1,4,1,5",
        "--stages=4",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("bits: [1, 0, 1, 1]"), "got {text}");
    assert!(text.contains("witness cell (5,7) = 9"), "got {text}");
}

#[test]
fn demo_runs_and_passes() {
    let out = run(&["demo", "--id=jockusch"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("jockusch: pass"));
}

#[test]
fn trace_round_trips_a_saved_run() {
    let dir = std::env::temp_dir().join(format!("limitlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let save = dir.join("run.json");
    let out = run(&[
        "run",
        "--kind=limit",
        &format!("--program={}", data("E.prog")),
        "--input=word:0,0,3",
        "--budget=2000",
        "--prefix=4",
        &format!("--save={}", save.display()),
    ]);
    assert!(out.status.success());
    let out = run(&["trace", &format!("--run={}", save.display())]);
    assert!(out.status.success());
    let text = stdout(&out);
    // every line is a record of the documented shape; early cells flip 1 -> 0
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("step").is_some() && v.get("cell").is_some());
        assert!(v.get("old").is_some() && v.get("new").is_some());
    }
    assert!(text.contains("\"old\":1,\"new\":0"), "got {text}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn oracle_flag_feeds_the_jump() {
    // monitor 0 of the whitelist always halts, so the jump of the zero
    // stream starts with 1 and the zero test immediately rejects it
    let out = run(&[
        "run",
        "--kind=limit",
        &format!("--program={}", data("E.prog")),
        "--input=const:0",
        &format!("--oracle=whitelist:{}", data("friedberg.json")),
        "--budget=10000",
        "--prefix=4",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("0000\n"), "got {}", stdout(&out));
}

#[test]
fn exit_codes_separate_usage_from_contract_errors() {
    // unknown flag combinations are usage errors
    let out = run(&["eval", "--space=unit", "--function=nope", "--universe=x", "--point=1/2"]);
    assert_eq!(out.status.code(), Some(2), "missing universe file is a contract error");

    let out = run(&["translate", "--name=nope", "--input=const:0"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["run", "--kind=limit"]);
    assert_eq!(out.status.code(), Some(1), "missing required flags");

    let out = run(&["trace", "--run=/nonexistent/run.json"]);
    assert_eq!(out.status.code(), Some(2));
}
