//! End-to-end binary tests: JSON shapes, exit codes, and byte-identical
//! reports for identical (argv, seed).

use std::process::Command;

fn thetatool() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thetatool"))
}

#[test]
fn symbolic_ranks_genus3_and_exit_zero() {
    let out = thetatool()
        .args([
            "symbolic",
            "ranks",
            "--genus",
            "3",
            "--set",
            "hyperelliptic",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["generators"], 8);
    assert_eq!(v["rank"], 8);
}

#[test]
fn identical_seed_gives_byte_identical_reports() {
    let run = || {
        thetatool()
            .args([
                "identities",
                "check",
                "--which",
                "rf",
                "--genus",
                "2",
                "--samples",
                "6",
                "--seed",
                "11",
            ])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn invalid_input_exits_2() {
    let out = thetatool()
        .args(["periods", "--branch-points", "3,2,1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out2 = thetatool()
        .args(["theta", "--tau", "/nonexistent.json", "--char", "0|0"])
        .output()
        .unwrap();
    assert_eq!(out2.status.code(), Some(2));
}

#[test]
fn failing_check_exits_1() {
    // rf at genus 3 on random tau is not an identity: the residual check
    // must fail with exit code 1.
    let out = thetatool()
        .args([
            "identities",
            "check",
            "--which",
            "rf",
            "--genus",
            "3",
            "--samples",
            "4",
            "--seed",
            "3",
            "--tol",
            "1e-8",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn periods_classify_roundtrip() {
    let dir = std::env::temp_dir().join("thetatool-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let run_json = dir.join("run.json");
    let out = thetatool()
        .args([
            "periods",
            "--branch-points",
            "0,1,2,3,4,5",
            "--nodes",
            "96",
            "--out",
            run_json.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&run_json).unwrap()).unwrap();
    let tau_json = dir.join("tau.json");
    std::fs::write(&tau_json, serde_json::to_string(&v["tau"]).unwrap()).unwrap();
    let cls = thetatool()
        .args(["classify", "--tau", tau_json.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(cls.status.success());
    let report: serde_json::Value = serde_json::from_slice(&cls.stdout).unwrap();
    assert_eq!(report["verdict"], "consistent-hyperelliptic");
    assert_eq!(report["vanishing"].as_array().unwrap().len(), 0);
}
