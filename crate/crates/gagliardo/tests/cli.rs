use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gagliardo"))
        .args(args)
        .output()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gagliardo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &[u8]) -> serde_json::Value {
    serde_json::from_slice(out).unwrap()
}

#[test]
fn energy_happy_path() {
    let o = run(&[
        "energy",
        "--T",
        "1",
        "--s",
        "0.25",
        "--p",
        "2",
        "--equispaced",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o.stdout);
    assert!(v["value"].as_f64().unwrap() > 0.0);
    assert!(v["abs_err_est"].is_number() && v["tail_lower"].is_number());
}

#[test]
fn divergent_energy_exit_code() {
    let o = run(&[
        "energy",
        "--T",
        "2",
        "--s",
        "0.5",
        "--p",
        "2",
        "--equispaced",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&o.stderr)["kind"], "DivergentEnergy");
}

#[test]
fn usage_errors() {
    let o = run(&["energy", "--T", "2", "--s", "0.3", "--p", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "energy",
        "--T",
        "2",
        "--s",
        "0.3",
        "--p",
        "2",
        "--equispaced",
        "--random",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["energy", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn optimize_writes_trace_and_summary() {
    let path = scratch("trace.jsonl");
    let p = path.to_str().unwrap();
    let o = run(&[
        "optimize", "--T", "5", "--s", "0.3", "--p", "2", "--random", "--seed", "7", "--out", p,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = json(&o.stdout);
    assert_eq!(s["equispaced"], true);
    assert_eq!(s["termination"], "converged");
    let first = std::fs::read(&path).unwrap();
    let lines: Vec<_> = std::str::from_utf8(&first)
        .unwrap()
        .lines()
        .map(|l| json(l.as_bytes()))
        .collect();
    assert_eq!(lines.len() as u64, s["iters"].as_u64().unwrap() + 1);
    assert_eq!(lines[0]["iter"], 0);

    let o = run(&[
        "optimize", "--T", "5", "--s", "0.3", "--p", "2", "--random", "--seed", "7", "--out", p,
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), first);
}

#[test]
fn sweep_csv_schema() {
    let o = run(&["sweep-s0", "--p", "2", "--T", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("param,raw,scaled,extrapolant,target\n"));
    let last = text.lines().last().unwrap();
    let extrapolant: f64 = last.split(',').nth(3).unwrap().parse().unwrap();
    assert!((extrapolant - 1.0).abs() <= 0.01);
}

#[test]
fn energy_csv_and_points() {
    let o = run(&[
        "energy",
        "--s",
        "0.3",
        "--p",
        "1.5",
        "--points",
        "0,0.8,2.1",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("value,tail_lower,tail_upper,abs_err_est\n"));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn spec_file_with_flag_override() {
    let path = scratch("spec.json");
    std::fs::write(
        &path,
        r#"{"s": 0.25, "p": 2.0, "T": 3, "equispaced": true}"#,
    )
    .unwrap();
    let a = json(&run(&["energy", "--spec", path.to_str().unwrap()]).stdout);
    let b = json(&run(&["energy", "--spec", path.to_str().unwrap(), "--s", "0.3"]).stdout);
    let c = json(
        &run(&[
            "energy",
            "--T",
            "3",
            "--s",
            "0.3",
            "--p",
            "2",
            "--equispaced",
        ])
        .stdout,
    );
    assert_ne!(a["value"], b["value"]);
    assert_eq!(b["value"], c["value"]);
    let o = run(&["energy", "--spec", "/nonexistent/spec.json"]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(json(&o.stderr)["kind"], "IOError");
}

#[test]
fn gradient_and_cusp_commands() {
    let o = run(&[
        "gradient",
        "--T",
        "3",
        "--s",
        "0.3",
        "--p",
        "2",
        "--equispaced",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let g = json(&o.stdout)["gradient"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap().abs())
        .fold(0.0, f64::max);
    assert!(g < 1e-8);
    let o = run(&["gradient", "--s", "0.3", "--p", "2", "--points", "0,0,2"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&o.stderr)["kind"], "CuspPoint");
    let o = run(&[
        "cusp-scan",
        "--s",
        "0.25",
        "--p",
        "2",
        "--points",
        "0,0,1,2",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .starts_with("h,delta,predicted\n"));
}

#[test]
fn estimates_command() {
    let o = run(&[
        "estimates",
        "--s",
        "0.3",
        "--p",
        "2",
        "--T",
        "2",
        "--equispaced",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o.stdout);
    assert!(v.is_object());
}
