//! End-to-end runs of the `landscape` binary: artifact round trips, exit
//! codes, and bit-stability of seeded outputs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn landscape(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_landscape"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_exit(out: &Output, code: i32) {
    let stdout = String::from_utf8_lossy(&out.stdout);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(
        out.status.code(),
        Some(code),
        "expected exit {code}\nstdout:\n{stdout}\nstderr:\n{stderr}"
    );
}

#[test]
fn solve_ids_boxcount_compare_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let gen = [
        "--d",
        "1",
        "--k",
        "60",
        "--dist",
        "uniform:0,8",
        "--seed",
        "3",
    ];

    let out = landscape(
        dir.path(),
        &[&["solve"], &gen[..], &["--out", "u.txt"]].concat(),
    );
    assert_exit(&out, 0);
    let field = fs::read_to_string(dir.path().join("u.txt")).unwrap();
    assert!(field.starts_with("# landscape-law v"));
    assert!(field.contains("\n1 60\n"));

    let out = landscape(
        dir.path(),
        &[&["ids"], &gen[..], &["--points", "50", "--out", "n.csv"]].concat(),
    );
    assert_exit(&out, 0);

    let out = landscape(
        dir.path(),
        &[
            "boxcount",
            "--landscape",
            "u.txt",
            "--points",
            "50",
            "--out",
            "nu.csv",
        ],
    );
    assert_exit(&out, 0);
    let nu = fs::read_to_string(dir.path().join("nu.csv")).unwrap();
    assert!(nu.contains("mu,value,kind"));
    assert!(nu.contains(",N_u"));

    let out = landscape(
        dir.path(),
        &[
            "compare",
            "--ids",
            "n.csv",
            "--landscape",
            "u.txt",
            "--out",
            "report.csv",
        ],
    );
    assert_exit(&out, 0);
    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(report.contains("mu,lhs,rhs,margin"));
    assert!(report.contains("violations=0"));
}

#[test]
fn compare_flags_forged_curves() {
    let dir = tempfile::tempdir().unwrap();
    let gen = [
        "--d",
        "1",
        "--k",
        "40",
        "--dist",
        "uniform:0,6",
        "--seed",
        "9",
    ];
    let out = landscape(
        dir.path(),
        &[&["solve"], &gen[..], &["--out", "u.txt"]].concat(),
    );
    assert_exit(&out, 0);

    // a curve claiming full spectral mass at tiny mu violates the upper law
    let forged = "mu,value,kind\n1e-2,1.0,N\n2e-2,1.0,N\n5e-2,1.0,N\n";
    fs::write(dir.path().join("forged.csv"), forged).unwrap();
    let out = landscape(
        dir.path(),
        &[
            "compare",
            "--ids",
            "forged.csv",
            "--landscape",
            "u.txt",
            "--out",
            "report.csv",
        ],
    );
    assert_exit(&out, 1);
    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(!report.contains("violations=0"));
}

#[test]
fn dual_identity_holds_for_even_k_and_rejects_odd() {
    let dir = tempfile::tempdir().unwrap();
    let out = landscape(
        dir.path(),
        &[
            "dual",
            "--d",
            "1",
            "--k",
            "40",
            "--dist",
            "uniform:0,5",
            "--seed",
            "2",
            "--points",
            "60",
        ],
    );
    assert_exit(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("identity max deviation 0"), "{stdout}");
    let csv = fs::read_to_string(dir.path().join("dual.csv")).unwrap();
    assert!(csv.contains("mu,N,Nu,Nu_dual"));

    let out = landscape(
        dir.path(),
        &["dual", "--d", "1", "--k", "41", "--dist", "uniform:0,5"],
    );
    assert_exit(&out, 2);
}

#[test]
fn figure4_is_bit_stable_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = landscape(dir.path(), &["figure4", "--seed", "7", "--out", "a.csv"]);
    assert_exit(&out, 0);
    let out = landscape(dir.path(), &["figure4", "--seed", "7", "--out", "b.csv"]);
    assert_exit(&out, 0);
    let a = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b, "same seed must reproduce identical artifacts");

    let out = landscape(
        dir.path(),
        &[
            "figure4",
            "--seed",
            "8",
            "--out",
            "c.csv",
            "--plot-script",
            "c.gnuplot",
        ],
    );
    assert_exit(&out, 0);
    let c = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_ne!(a, c);
    assert!(dir.path().join("c.gnuplot").exists());
}

#[test]
fn ensemble_runs_and_is_thread_count_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
        "d": 1, "k": 16,
        "distribution": {"kind": "uniform", "lo": 0.0, "hi": 8.0},
        "realizations": 4,
        "master_seed": 11,
        "grid": {"points": 24},
        "dual": true
    }"#;
    fs::write(dir.path().join("cfg.json"), config).unwrap();
    let out = landscape(
        dir.path(),
        &[
            "--threads",
            "1",
            "ensemble",
            "--config",
            "cfg.json",
            "--out-prefix",
            "one",
        ],
    );
    assert_exit(&out, 0);
    let out = landscape(
        dir.path(),
        &[
            "--threads",
            "4",
            "ensemble",
            "--config",
            "cfg.json",
            "--out-prefix",
            "four",
        ],
    );
    assert_exit(&out, 0);
    let a = fs::read_to_string(dir.path().join("one.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("four.csv")).unwrap();
    assert_eq!(a, b, "worker count must not change the output");
    assert!(a.contains("mu,mean_N,se_N,mean_Nu,se_Nu,mean_Nu_dual,se_Nu_dual"));
    assert!(dir.path().join("one.meta.json").exists());
}

#[test]
fn ensemble_rejects_unknown_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"d":1,"k":16,"distribution":{"kind":"uniform","lo":0,"hi":8},
        "realizations":2,"master_seed":1,"bogus_knob":true}"#;
    fs::write(dir.path().join("cfg.json"), config).unwrap();
    let out = landscape(dir.path(), &["ensemble", "--config", "cfg.json"]);
    assert_exit(&out, 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bogus_knob"), "{stderr}");
}

#[test]
fn verify_suite_passes_quickly() {
    let dir = tempfile::tempdir().unwrap();
    let out = landscape(
        dir.path(),
        &[
            "verify",
            "--seed",
            "1",
            "--trials",
            "12",
            "--csv",
            "oracles.csv",
        ],
    );
    assert_exit(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("all hard oracles passed"), "{stdout}");
    assert!(stdout.contains("max_principle"));
    assert!(stdout.contains("chernoff_tail"));
    let csv = fs::read_to_string(dir.path().join("oracles.csv")).unwrap();
    assert!(csv.contains("oracle,hard,trials,failures,value,detail"));
}

#[test]
fn out_dir_and_quiet_flags() {
    let dir = tempfile::tempdir().unwrap();
    let sub = dir.path().join("artifacts");
    let out = landscape(
        dir.path(),
        &[
            "--out-dir",
            sub.to_str().unwrap(),
            "--quiet",
            "solve",
            "--d",
            "1",
            "--k",
            "30",
            "--dist",
            "uniform:0,4",
            "--out",
            "u.txt",
        ],
    );
    assert_exit(&out, 0);
    assert!(out.stdout.is_empty(), "quiet run should print nothing");
    assert!(sub.join("u.txt").exists());
}

#[test]
fn solve_refuses_constant_potential_without_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("const.txt"),
        "1 5\n2.0\n2.0\n2.0\n2.0\n2.0\n",
    )
    .unwrap();
    let out = landscape(dir.path(), &["solve", "--potential", "const.txt"]);
    assert_exit(&out, 2);
    let out = landscape(
        dir.path(),
        &[
            "solve",
            "--potential",
            "const.txt",
            "--allow-constant",
            "--out",
            "u.txt",
        ],
    );
    assert_exit(&out, 0);
    // u = 1/c = 0.5 exactly
    let u = fs::read_to_string(dir.path().join("u.txt")).unwrap();
    assert!(u.contains("0.5"));
}

#[test]
fn ids_matches_circulant_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("zero.txt"), "1 4\n0\n0\n0\n0\n").unwrap();
    let out = landscape(
        dir.path(),
        &[
            "ids",
            "--potential",
            "zero.txt",
            "--points",
            "3",
            "--mu-min",
            "1.9",
            "--mu-max",
            "4.5",
            "--out",
            "n.csv",
        ],
    );
    assert_exit(&out, 0);
    let csv = fs::read_to_string(dir.path().join("n.csv")).unwrap();
    // spectrum {0, 2, 2, 4}: N(1.9) = 1/4, N(4.5) = 1
    assert!(csv.lines().filter(|l| l.ends_with(",N")).count() == 3);
    assert!(csv.contains("2.5000000000000000e-1"));
    assert!(csv.contains("1.0000000000000000e0"));
}
