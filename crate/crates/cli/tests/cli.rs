use std::process::{Command, Output};

use rcfqe::MPoly;
use serde_json::Value;

const DISCRIMINANT: &str = "exists x3. x3^2 + x1*x3 + x2 = 0";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcfqe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn decide_examples() {
    let t = run(&["decide", "forall x1. x1^2 + 1 > 0"]);
    assert_eq!((code(&t), stdout(&t).trim()), (0, "true"));
    let f = run(&["decide", "exists x1. x1^2 + 1 = 0"]);
    assert_eq!((code(&f), stdout(&f).trim()), (1, "false"));
    let n = run(&["decide", "exists x1. forall x2. x2^2 + x1 > 0"]);
    assert_eq!((code(&n), stdout(&n).trim()), (0, "true"));
}

#[test]
fn eliminate_square_root_condition() {
    let o = run(&["eliminate", "exists x2. x2^2 + x1 = 0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    let psi = out.lines().next().unwrap();
    // the result is a formula in x1 alone, true exactly for x1 <= 0
    let back = format!("forall x1. ({psi}) /\\ x1 <= 0 \\/ ~({psi}) /\\ x1 > 0");
    let d = run(&["decide", &back]);
    assert_eq!((code(&d), stdout(&d).trim()), (0, "true"), "{psi}");
    assert!(out.contains("level 1:") && out.contains("bound"));
}

#[test]
fn json_output_round_trips() {
    let o = run(&["eliminate", "--format", "json", DISCRIMINANT]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["qf_formula"].is_string());
    let levels = v["elim_levels"].as_array().unwrap();
    assert_eq!(levels.len(), 4);
    let mut seen = 0;
    for l in levels {
        for e in l["entries"].as_array().unwrap() {
            let text = e["poly"].as_str().unwrap();
            let p: MPoly = text.parse().unwrap();
            assert_eq!(p.to_string(), text);
            let again: MPoly = p.to_string().parse().unwrap();
            assert_eq!(again, p);
            seen += 1;
        }
    }
    assert!(seen > 3);
}

#[test]
fn verify_modes() {
    let ok = run(&["verify", "--samples", "100", "--seed", "7", DISCRIMINANT]);
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));
    let out = stdout(&ok);
    assert!(out.contains("0 mismatches") && out.trim_end().ends_with("ok"));

    let bad = run(&["verify", "--samples", "100", "--seed", "7", "--corrupt", DISCRIMINANT]);
    assert_eq!(code(&bad), 1);
    assert!(stdout(&bad).contains("MISMATCH"));

    let zero = run(&["verify", "--samples", "0", DISCRIMINANT]);
    assert_eq!(code(&zero), 2);
    assert!(stderr(&zero).contains("samples"));
}

#[test]
fn errors_exit_with_two() {
    let cap = run(&["eliminate", "--max-family", "2", "exists x2. x2^2 + x1 = 0"]);
    assert_eq!(code(&cap), 2);
    assert!(stderr(&cap).contains("cap"), "{}", stderr(&cap));

    let parse = run(&["eliminate", "exists x2. x2^^2 = 0"]);
    assert_eq!(code(&parse), 2);

    let not_sentence = run(&["decide", "exists x2. x2 + x1 = 0"]);
    assert_eq!(code(&not_sentence), 2);

    let no_free = run(&["eliminate", "exists x1. x1 = 0"]);
    assert_eq!(code(&no_free), 2);
}

#[test]
fn formula_from_file() {
    let path = std::env::temp_dir().join(format!("rcfqe-cli-{}.txt", std::process::id()));
    std::fs::write(&path, "forall x1. x1^2 + 1 > 0\n").unwrap();
    let o = run(&["decide", "--file", path.to_str().unwrap()]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!((code(&o), stdout(&o).trim()), (0, "true"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        vec!["eliminate", "--dump-tree", "--dump-elim", DISCRIMINANT],
        vec!["eliminate", "--format", "json", "--dump-tree", DISCRIMINANT],
        vec!["verify", "--samples", "50", "--seed", "3", DISCRIMINANT],
        vec!["stats", "--format", "json", DISCRIMINANT],
    ] {
        let a = run(&args);
        let b = run(&args);
        let mut one = args.clone();
        one.extend(["--threads", "1"]);
        let c = run(&one);
        assert_eq!(code(&a), 0, "{}", stderr(&a));
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(a.stdout, c.stdout);
    }
}
