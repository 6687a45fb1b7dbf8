use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fdsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdsim"))
        .args(args)
        .env_remove("FDSIM_SEED")
        .output()
        .unwrap()
}

fn fdsim_into(dir: &Path, args: &[&str]) -> Output {
    let mut full: Vec<&str> = args.to_vec();
    let dir = dir.to_str().unwrap();
    full.extend(["--out", dir]);
    fdsim(&full)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn tiny_seeded_run_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["si", "--M", "4", "--N", "2", "--K", "2", "--mu", "0.5", "--nu", "1", "--trials", "6"];
    let out = fdsim_into(dir.path(), &[&args[..], &["--seed", "7", "--mode", "both"]].concat());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "empirical_summary.csv",
        "empirical_samples.csv",
        "theoretical_summary.csv",
        "theoretical_samples.csv",
    ] {
        assert_eq!(read(dir.path(), name), read(&golden_dir(), name), "{name}");
    }
    let summary = read(dir.path(), "empirical_summary.csv");
    assert_eq!(
        summary.lines().next().unwrap(),
        "M,N,K,mu,nu,trials,seed,emp_m1,emp_m2,emp_var,cf_m1,cf_m2,cf_var,kappa,theta,ks"
    );
}

#[test]
fn same_seed_gives_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["si", "--M", "16", "--N", "8", "--K", "1", "--trials", "3000", "--seed", "5", "--bins", "40"];
    assert!(fdsim_into(a.path(), &args).status.success());
    assert!(fdsim_into(b.path(), &args).status.success());
    for name in ["empirical_hist.csv", "theoretical_hist.csv", "empirical_summary.csv"] {
        assert_eq!(read(a.path(), name), read(b.path(), name));
    }

    // Paired histograms share bin edges and count every trial.
    let edges = |name: &str| -> Vec<String> {
        read(a.path(), name)
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap().to_string())
            .collect()
    };
    assert_eq!(edges("empirical_hist.csv"), edges("theoretical_hist.csv"));
    let total: u64 = read(a.path(), "empirical_hist.csv")
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 3000);
}

#[test]
fn seed_falls_back_to_environment() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["si", "--M", "4", "--N", "4", "--K", "1", "--trials", "50", "--mode", "empirical"];
    let flagged = fdsim_into(a.path(), &[&args[..], &["--seed", "123"]].concat());
    assert!(flagged.status.success());
    let env = Command::new(env!("CARGO_BIN_EXE_fdsim"))
        .args(args)
        .args(["--out", b.path().to_str().unwrap()])
        .env("FDSIM_SEED", "123")
        .output()
        .unwrap();
    assert!(env.status.success());
    assert_eq!(read(a.path(), "empirical_samples.csv"), read(b.path(), "empirical_samples.csv"));
}

#[test]
fn moments_records() {
    let out = fdsim(&["moments", "--M", "1", "--N", "1", "--K", "1", "--mu", "0", "--nu", "1"]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        "M,N,K,mu,nu,m1,m2,var,kappa,theta\n1,1,1,0.0,1.0,1.0,2.0,1.0,1.0,1.0\n"
    );

    let out = fdsim(&["moments", "--M", "16", "--N", "8", "--K", "1", "--mu", "0.5", "--nu", "1", "--format", "jsonl"]);
    let record: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(record["m1"].as_f64(), Some(1.25));
    let keys: Vec<&str> = record.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["M", "N", "K", "mu", "nu", "m1", "m2", "var", "kappa", "theta"]);

    let out = fdsim(&["moments", "--M", "16", "--N", "8", "--K", "3", "--mu", "0", "--nu", "1", "--format", "jsonl"]);
    let record: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    let kappa = record["kappa"].as_f64().unwrap();
    let theta = record["theta"].as_f64().unwrap();
    assert!((kappa - 45.0 / 17.0).abs() < 1e-14);
    assert!((theta - 17.0 / 15.0).abs() < 1e-14);

    // Rician factor form of (μ, ν) = (0.5, 1).
    let out = fdsim(&["moments", "--varpi", "0.25", "--omega", "1.25", "--format", "jsonl"]);
    let record: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!((record["m1"].as_f64().unwrap() - 1.25).abs() < 1e-15);
}

#[test]
fn exit_codes() {
    let out = fdsim(&["moments", "--M", "2", "--N", "8", "--K", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("K <= min(N, M)"));

    assert_eq!(fdsim(&["moments", "--mu", "0.5", "--varpi", "1"]).status.code(), Some(2));
    assert_eq!(fdsim(&["moments", "--bogus"]).status.code(), Some(2));
    assert_eq!(fdsim(&["moments", "--nu", "0"]).status.code(), Some(2));
    assert_eq!(fdsim(&["si", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(fdsim(&["si", "--trials", "10", "--bins", "0"]).status.code(), Some(2));
}

#[test]
fn failed_run_leaves_no_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = fdsim_into(dir.path(), &["si", "--M", "2", "--N", "2", "--K", "3", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(&config, r#"{"M": 16, "N": 8, "K": 3, "mu": 0.5, "nu": 1.0, "format": "jsonl"}"#).unwrap();
    let out = fdsim(&["moments", "--config", config.to_str().unwrap(), "--K", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let record: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(record["K"].as_u64(), Some(1));
    assert_eq!(record["M"].as_u64(), Some(16));
    assert_eq!(record["m1"].as_f64(), Some(1.25));

    // Flags naming the Rician pair replace the file's pair entirely.
    let out = fdsim(&["moments", "--config", config.to_str().unwrap(), "--varpi", "0", "--omega", "2"]);
    let record: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!((record["m1"].as_f64().unwrap() - 6.0).abs() < 1e-12);
    assert_eq!(record["mu"].as_f64(), Some(0.0));

    std::fs::write(&config, r#"{"M": 16, "unknown": 1}"#).unwrap();
    assert_eq!(fdsim(&["moments", "--config", config.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&config, r#"{"mu": 0.5, "varpi": 1}"#).unwrap();
    assert_eq!(fdsim(&["moments", "--config", config.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn sinr_rows_and_single_cell_terms() {
    let dir = tempfile::tempdir().unwrap();
    let out = fdsim_into(dir.path(), &["sinr", "--M", "4", "--N", "4", "--K", "1", "--L", "1", "--trials", "200"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(dir.path(), "downlink_sinr.csv");
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "trial,k,useful,mui,ici,cmi,si,noise,sinr");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 200);
    assert!(rows.iter().all(|r| r[4] == 0.0 && r[3] == 0.0 && r[5] == 0.0));

    let out = fdsim_into(
        dir.path(),
        &["sinr", "--M", "8", "--N", "6", "--K", "3", "--L", "2", "--trials", "100", "--direction", "uplink"],
    );
    assert!(out.status.success());
    let rows = read(dir.path(), "uplink_sinr.csv").lines().count() - 1;
    assert_eq!(rows, 300);
}
