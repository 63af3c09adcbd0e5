use std::process::{Command, Output};

use qkd_core::analyzers::RateReport;
use qkd_core::bounds::BoundReport;
use qkd_core::cli::EntropyReport;
use qkd_core::engine::Transcript;

fn qkdsec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkdsec")).args(args).env_remove("QKDSEC_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json<T: serde::de::DeserializeOwned>(args: &[&str]) -> T {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let o = qkdsec(&all);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn rate_examples() {
    let r: Vec<RateReport> = json(&["rate", "--protocol", "bb84", "--qber", "0.05", "--conditioned"]);
    assert!((r[0].rate - 0.4272).abs() < 1e-4);
    let r: Vec<RateReport> = json(&["rate", "--protocol", "six-state", "--qber", "0"]);
    assert_eq!(r[0].rate, 1.0);
    let r: Vec<RateReport> = json(&["rate", "--protocol", "b92", "--depol", "0.036", "--alpha", "0.38"]);
    assert!(r[0].rate.abs() < 1e-3, "{}", r[0].rate);
}

#[test]
fn rate_sweep_csv_is_monotone_below_threshold() {
    let o = qkdsec(&["rate", "--protocol", "bb84", "--qber", "0:0.15:0.005", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let (qi, ri) = (header.iter().position(|h| *h == "noise").unwrap(), header.iter().position(|h| *h == "rate").unwrap());
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[qi].parse().unwrap(), f[ri].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 31);
    let below: Vec<f64> = rows.iter().filter(|(q, _)| *q < 0.0614).map(|r| r.1).collect();
    assert!(below.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn bad_flags_exit_two() {
    assert_eq!(qkdsec(&["rate", "--protocol", "bb84", "--qber", "0.7"]).status.code(), Some(2));
    assert_eq!(qkdsec(&["rate", "--protocol", "bogus", "--qber", "0.1"]).status.code(), Some(2));
    assert_eq!(qkdsec(&["rate", "--protocol", "bb84"]).status.code(), Some(2));
    assert_eq!(qkdsec(&["rate", "--protocol", "bb84", "--qber", "0.1", "--unknown"]).status.code(), Some(2));
    assert_eq!(qkdsec(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(qkdsec(&["entropy", "--dist", "0.5,0.6"]).status.code(), Some(2));
    assert_eq!(qkdsec(&["simulate", "--protocol", "bb84", "--n", "2", "--lambdas", "1,0,0,0"]).status.code(), Some(2));
    assert_eq!(qkdsec(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(qkdsec(&["--seed", "0xZZ", "verify", "--suite", "hashing"]).status.code(), Some(2));
}

#[test]
fn thresholds() {
    let t: serde_json::Value = json(&["threshold", "--protocol", "bb84"]);
    assert!((t["threshold"].as_f64().unwrap() - 0.061).abs() < 1e-3);
    let t: serde_json::Value = json(&["threshold", "--protocol", "bb84", "--conditioned"]);
    assert!((t["threshold"].as_f64().unwrap() - 0.1100).abs() < 5e-4);
    let t: serde_json::Value = json(&["threshold", "--protocol", "six-state", "--conditioned"]);
    assert!((t["threshold"].as_f64().unwrap() - 0.1262).abs() < 5e-4);
}

#[test]
fn simulate_noiseless_and_noisy() {
    let t: Transcript = json(&["simulate", "--protocol", "bb84", "--lambdas", "1,0,0,0", "--n", "256", "--seed", "7"]);
    assert!(!t.aborted);
    assert!(t.s_prime() > 0);
    assert_eq!(t.key_alice, t.key_bob);
    let t: Transcript =
        json(&["simulate", "--protocol", "bb84", "--lambdas", "0.7,0.1,0.1,0.1", "--n", "1024", "--seed", "7"]);
    assert!(t.aborted);
    assert_eq!(t.abort_reason.unwrap().to_string(), "no extractable key");
}

#[test]
fn simulate_output_round_trips_and_repeats() {
    let args = ["--format", "json", "simulate", "--protocol", "six-state", "--depol", "0.03", "--n", "2000", "--seed", "0x2a"];
    let a = qkdsec(&args);
    let b = qkdsec(&args);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let t = Transcript::from_json(&text).unwrap();
    assert_eq!(t.config.seed, 42);
    assert_eq!(format!("{}\n", t.to_json().unwrap()), text);
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_qkdsec"));
        cmd.env_remove("QKDSEC_SEED");
        if let Some(v) = env {
            cmd.env("QKDSEC_SEED", v);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        cmd.args(["--format", "json", "simulate", "--protocol", "bb84", "--lambdas", "1,0,0,0", "--n", "64"]);
        let t = Transcript::from_json(&String::from_utf8(cmd.output().unwrap().stdout).unwrap()).unwrap();
        t.config.seed
    };
    assert_eq!(run(None, None), 0);
    assert_eq!(run(Some("0x10"), None), 16);
    assert_eq!(run(Some("5"), Some("9")), 9);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rate.json");
    let o = qkdsec(&["--out", path.to_str().unwrap(), "--format", "json", "rate", "--protocol", "bb84", "--qber", "0.02"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let back: Vec<RateReport> = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back.len(), 1);
}

#[test]
fn simulate_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(
        &path,
        r#"{"protocol": "bb84", "n": 512, "attack": {"kind": "bell_diagonal", "lambdas": [1, 0, 0, 0]}, "seed": 0}"#,
    )
    .unwrap();
    let t: Transcript = json(&["--seed", "3", "simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(t.config.seed, 3);
    assert_eq!(t.config.n, 512);
}

#[test]
fn verify_suites() {
    let o = qkdsec(&["--format", "json", "verify", "--suite", "hashing", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let reports: Vec<BoundReport> = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(reports.iter().all(|r| r.satisfied));
    let o = qkdsec(&["--format", "json", "--seed", "3", "verify", "--suite", "pa"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let reports: Vec<BoundReport> = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(reports.iter().any(|r| r.lemma == "privacy-amplification"));
}

#[test]
fn verify_lemmas_at_ten_thousand_trials() {
    let o = qkdsec(&["--format", "json", "--seed", "1", "verify", "--suite", "lemmas", "--trials", "10000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let reports: Vec<BoundReport> = serde_json::from_str(&stdout(&o)).unwrap();
    for r in &reports {
        assert!(r.satisfied, "{r:?}");
        if let Some(e) = r.empirical {
            assert!(e <= r.reported || r.direction == qkd_core::bounds::Direction::Lower);
        }
    }
}

#[test]
fn entropy_examples() {
    let r: EntropyReport = json(&["entropy", "--dist", "0.5,0.5", "--alpha", "3"]);
    assert!((r.entropy - 1.0).abs() < 1e-12);
    let r: EntropyReport = json(&["entropy", "--dist", "0.7,0.3", "--alpha", "inf", "--eps", "0.1"]);
    assert!((r.entropy - 0.7370).abs() < 1e-4);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bell.json");
    std::fs::write(&path, r#"{"bell_diagonal": [0.85, 0.05, 0.05, 0.05]}"#).unwrap();
    let r: EntropyReport = json(&["entropy", "--input", path.to_str().unwrap(), "--alpha", "1"]);
    assert!((r.entropy - 0.8476).abs() < 1e-4);
    std::fs::write(&path, "{not json").unwrap();
    assert_eq!(qkdsec(&["entropy", "--input", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn table_output_uses_six_significant_digits() {
    let o = qkdsec(&["rate", "--protocol", "bb84", "--qber", "0.05", "--conditioned"]);
    let text = stdout(&o);
    assert!(text.contains("0.427206"), "{text}");
    assert!(!text.contains("0.4272064"));
}

#[test]
fn every_command_is_deterministic() {
    let commands: Vec<Vec<&str>> = vec![
        vec!["rate", "--protocol", "bb84", "--qber", "0:0.1:0.01"],
        vec!["threshold", "--protocol", "six-state"],
        vec!["simulate", "--protocol", "bb84", "--lambdas", "0.9,0.04,0.03,0.03", "--n", "1500"],
        vec!["verify", "--suite", "smooth", "--trials", "10"],
        vec!["entropy", "--bell", "0.85,0.05,0.05,0.05", "--alpha", "inf", "--eps", "0.05"],
    ];
    for cmd in commands {
        for format in ["json", "csv", "table"] {
            let mut args = vec!["--seed", "11", "--format", format];
            args.extend(&cmd);
            let (a, b) = (qkdsec(&args), qkdsec(&args));
            assert_eq!(a.status.code(), Some(0), "{cmd:?}");
            assert_eq!(a.stdout, b.stdout, "{cmd:?} {format}");
        }
    }
}
