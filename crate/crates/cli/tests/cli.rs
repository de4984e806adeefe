use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::tempdir;

fn brillouin(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brillouin"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn build_small_window() {
    let dir = tempdir().unwrap();
    let out = brillouin(&["build", "--m", "1", "--stats"], dir.path());
    assert!(out.status.success());
    let stats: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stats["n_lines"], 8);
    let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("arrangement.json")).unwrap()).unwrap();
    assert_eq!(json["stats"], stats);
    assert_eq!(
        json["faces"].as_array().unwrap().len() as u64,
        stats["n_faces"].as_u64().unwrap()
    );
}

#[test]
fn perturbed_build_is_deterministic() {
    let a = tempdir().unwrap();
    let b = tempdir().unwrap();
    let args = ["build", "--m", "3", "--q", "5000", "--seed", "7"];
    assert!(brillouin(&args, a.path()).status.success());
    assert!(brillouin(&args, b.path()).status.success());
    let ja = fs::read(a.path().join("arrangement.json")).unwrap();
    let jb = fs::read(b.path().join("arrangement.json")).unwrap();
    assert_eq!(ja, jb);

    let c = tempdir().unwrap();
    let other = ["build", "--m", "3", "--q", "5000", "--seed", "8"];
    assert!(brillouin(&other, c.path()).status.success());
    assert_ne!(ja, fs::read(c.path().join("arrangement.json")).unwrap());
}

#[test]
fn metrics_integer_lattice() {
    let dir = tempdir().unwrap();
    assert!(brillouin(&["metrics"], dir.path()).status.success());
    let csv = fs::read_to_string(dir.path().join("zones.csv")).unwrap();
    let rows = rows(&csv);
    assert_eq!(rows.len(), 57);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], (i + 1).to_string());
        assert_eq!((r[4].as_str(), r[5].as_str()), ("1", "1"));
        assert_eq!(r[13], "true");
    }
}

#[test]
fn metrics_kmax_zero_is_header_only() {
    let dir = tempdir().unwrap();
    assert!(brillouin(&["metrics", "--m", "2", "--kmax", "0"], dir.path())
        .status
        .success());
    let csv = fs::read_to_string(dir.path().join("zones.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("k,r,R,W,"));
}

#[test]
fn metrics_past_reliable_needs_unsafe() {
    let dir = tempdir().unwrap();
    let refused = brillouin(&["metrics", "--m", "3", "--kmax", "12"], dir.path());
    assert!(!refused.status.success());
    assert!(String::from_utf8_lossy(&refused.stderr).contains("--unsafe"));

    let ok = brillouin(&["metrics", "--m", "3", "--kmax", "12", "--unsafe"], dir.path());
    assert!(ok.status.success());
    let csv = fs::read_to_string(dir.path().join("zones.csv")).unwrap();
    let rows = rows(&csv);
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[0][13], "true");
    assert_eq!(rows[11][13], "false");
}

#[test]
fn verify_passes_on_lattice() {
    let dir = tempdir().unwrap();
    let out = brillouin(&["verify", "--m", "5"], dir.path());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{stdout}");
    assert!(!stdout.contains("FAIL"));
    let json = fs::read_to_string(dir.path().join("verify.json")).unwrap();
    assert!(json.contains("\"adversarial_chamber\""));
}

#[test]
fn verify_accepts_fraction_tau() {
    let dir = tempdir().unwrap();
    let out = brillouin(&["verify", "--m", "5", "--k", "3", "--tau", "1/4"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn rays_unperturbed_gaps_vanish() {
    let dir = tempdir().unwrap();
    let out = brillouin(&["rays", "--m", "4", "--k", "1", "--directions", "8"], dir.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("rays.csv")).unwrap();
    let rows = rows(&csv);
    assert_eq!(rows.len(), 8);
    assert_eq!(&rows[0][..4], ["1", "0", "1", "1/2"]);
    assert!(rows.iter().all(|r| r[5] == "0/1"));
}

#[test]
fn build_default_window_line_count() {
    let dir = tempdir().unwrap();
    let out = brillouin(&["build", "--stats"], dir.path());
    assert!(out.status.success());
    let stats: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stats["n_lines"], 360);
}

#[test]
fn strong_perturbation_flags_rows_past_cutoff() {
    let dir = tempdir().unwrap();
    let args = ["metrics", "--q", "5000", "--seed", "1", "--kmax", "36", "--unsafe"];
    assert!(brillouin(&args, dir.path()).status.success());
    let csv = fs::read_to_string(dir.path().join("zones.csv")).unwrap();
    let flags: Vec<String> = rows(&csv).into_iter().map(|r| r[13].clone()).collect();
    assert_eq!(flags.len(), 36);
    assert!(flags[..34].iter().all(|f| f == "true"));
    assert!(flags[34..].iter().all(|f| f == "false"));
}
