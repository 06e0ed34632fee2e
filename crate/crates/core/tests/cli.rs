use std::f64::consts::{E, PI};
use std::path::Path;
use std::process::{Command, Output};

use linopt::exact::OutputDistribution;
use linopt::numerics::{compose_interferometer, ElementaryOp};

fn linopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linopt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = linopt(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn distribution_is_byte_identical_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let summary = ok(&[
            "distribution",
            "--family",
            "spacs",
            "--alpha",
            "0.4-0.2i",
            "--n",
            "2",
            "--m",
            "3",
            "--haar-seed",
            "7",
            "--out",
            path_str(p),
        ]);
        assert!(
            summary.starts_with("distribution family=spacs"),
            "{summary}"
        );
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.as_bytes(), std::fs::read(&b).unwrap().as_slice());
    let parsed = OutputDistribution::from_json(&text).unwrap();
    assert_eq!(parsed.to_json(), text);
    assert!((parsed.total_mass() - 1.0).abs() < 1e-12);
}

#[test]
fn sample_batches_repeat_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let p = dir.path().join(name);
        ok(&[
            "sample",
            "--family",
            "fock",
            "--n",
            "2",
            "--m",
            "4",
            "--haar-seed",
            "1",
            "--samples",
            "5000",
            "--seed",
            seed,
            "--format",
            "csv",
            "--out",
            path_str(&p),
        ]);
        std::fs::read(p).unwrap()
    };
    let (first, again, other) = (run("a.csv", "9"), run("b.csv", "9"), run("c.csv", "10"));
    assert_eq!(first, again);
    assert_ne!(first, other);
    assert_eq!(String::from_utf8(first).unwrap().lines().count(), 5001);
}

#[test]
fn oracle_check_on_balanced_beamsplitter() {
    let dir = tempfile::tempdir().unwrap();
    let u = compose_interferometer(&[ElementaryOp::balanced_beamsplitter(0, 1)], 2).unwrap();
    let file = dir.path().join("bs.json");
    std::fs::write(&file, u.to_json()).unwrap();
    for family in ["dspfs", "spacs"] {
        let summary = ok(&[
            "oracle-check",
            "--family",
            family,
            "--alpha",
            "0.5",
            "--n",
            "2",
            "--m",
            "2",
            "--unitary-file",
            path_str(&file),
            "--out",
            path_str(&dir.path().join("o.json")),
        ]);
        let tvd: f64 = summary
            .split_whitespace()
            .find_map(|t| t.strip_prefix("tvd="))
            .unwrap()
            .parse()
            .unwrap();
        assert!(tvd < 1e-6, "{summary}");
    }
}

#[test]
fn tight_cutoff_is_a_tolerance_failure() {
    let out = linopt(&[
        "oracle-check",
        "--family",
        "dspfs",
        "--alpha",
        "0.9",
        "--n",
        "2",
        "--m",
        "2",
        "--haar-seed",
        "3",
        "--cutoff",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("leakage"));
}

#[test]
fn validation_failures_exit_with_usage_code() {
    let out = linopt(&[
        "distribution",
        "--family",
        "fock",
        "--n",
        "2",
        "--haar-seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--m"));
    assert_eq!(linopt(&["nonsense"]).status.code(), Some(2));
    let out = linopt(&[
        "distribution",
        "--family",
        "fock",
        "--n",
        "3",
        "--m",
        "2",
        "--haar-seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn transition_sweep_reaches_the_limit() {
    let csv = ok(&[
        "transition",
        "--rule",
        "inv-n",
        "--n-values",
        "10,100,1000,10000",
    ]);
    let last = csv.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    let (n, p_n): (f64, f64) = (fields[0].parse().unwrap(), fields[2].parse().unwrap());
    assert!((p_n - 1.0 / E).abs() < 2.0 / n, "{last}");
}

#[test]
fn wigner_slice_through_the_negative_lobe() {
    let csv = ok(&[
        "wigner",
        "--alpha",
        "2",
        "--mode",
        "slice",
        "--resolution",
        "400",
    ]);
    let points: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let (x, w) = l.split_once(',').unwrap();
            (x.parse().unwrap(), w.parse().unwrap())
        })
        .collect();
    let at_half = -2.0 * (-2.0f64).exp() / (5.0 * PI);
    let (_, w) = points
        .iter()
        .copied()
        .find(|(x, _)| (x - 1.0).abs() < 1e-9)
        .expect("grid contains x = α/2");
    assert!((w - at_half).abs() < 1e-9, "{w}");
    let min = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    assert!(min <= at_half);
}

#[test]
fn config_file_runs_and_conflicts_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"family": "fock", "n": 2, "m": 3, "haar_seed": 4, "format": "csv"}"#,
    )
    .unwrap();
    let csv = ok(&["distribution", "--config", path_str(&cfg)]);
    assert!(csv.starts_with("s0,s1,s2,prob,amp_re,amp_im"));
    let out = linopt(&["distribution", "--config", path_str(&cfg), "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
}
