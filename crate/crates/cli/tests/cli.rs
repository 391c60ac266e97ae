use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn pressurelab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pressurelab"))
        .args(args)
        .current_dir(dir)
        .env_remove("PRESSURELAB_CACHE")
        .output()
        .expect("binary runs")
}

fn config(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn summary(record: &str, key: &str) -> f64 {
    let prefix = format!("summary.{key}=");
    record.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap().parse().unwrap()
}

fn read(dir: &TempDir, out: &str, file: &str) -> String {
    fs::read_to_string(dir.path().join(out).join(file)).unwrap()
}

#[test]
fn dimension_of_middle_thirds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, "d.cfg", "mode=dimension\nmap=cookie_cutter r1=3 r2=3\n");
    let out = pressurelab(&["run", "--config", &cfg, "--out", "d"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = summary(&read(&dir, "d", "record.txt"), "t_root");
    assert!((t - 2f64.ln() / 3f64.ln()).abs() < 2e-3);
    let csv = read(&dir, "d", "run.csv");
    assert!(csv.starts_with("map_id,t_lower,t_upper,t_root,depth,tol\n"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn identical_configs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, "s.cfg", "mode=stability\nschedule=0.1,0.05\nseeds=4\n");
    for out in ["a", "b"] {
        let o = pressurelab(&["run", "--config", &cfg, "--out", out, "--workers", "3"], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["run.csv", "certificates.txt", "gaps.svg"] {
        assert_eq!(read(&dir, "a", file), read(&dir, "b", file), "{file}");
    }
    let hash = |out| read(&dir, out, "record.txt").lines().next().unwrap().to_string();
    assert_eq!(hash("a"), hash("b"));
}

#[test]
fn entropy_of_doubling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, "e.cfg", "mode=entropy\nmap=doubling\nschedule=0\n");
    let out = pressurelab(&["run", "--config", &cfg, "--out", "e"], dir.path());
    assert!(out.status.success());
    let h = summary(&read(&dir, "e", "record.txt"), "entropy");
    assert!((h - 2f64.ln()).abs() < 1e-9);
}

#[test]
fn stability_table_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, "s.cfg", "mode=stability\nmap=cookie_cutter r1=3 r2=3\n");
    let out = pressurelab(&["run", "--config", &cfg, "--out", "s", "--eps-schedule", "0.2,0.1,0.05,0.025"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir, "s", "run.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("epsilon,t_root,s_root,t0,gap_t,gap_s,std_err,n,seeds"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    let gaps: Vec<f64> = rows.iter().map(|r| r[4].max(r[5])).collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0]), "{gaps:?}");
    let svg = read(&dir, "s", "gaps.svg");
    assert_eq!(svg.matches("<polyline").count(), 1);
    assert_eq!(svg.matches("<circle").count(), 4);
    assert!(read(&dir, "s", "certificates.txt").contains("eps0.025.distortion_worst="));
    assert!(read(&dir, "s", "record.txt").contains("files=run.csv,certificates.txt,gaps.svg,record.txt"));
}

#[test]
fn verify_default_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = pressurelab(&["verify", "--out", "v"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir, "v", "run.csv");
    assert!(csv.lines().count() > 50);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",pass")));
}

#[test]
fn corrupted_map_is_reported_with_module() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, "bad.cfg", "map=cookie_cutter r1=0.9 r2=3\n");
    let out = pressurelab(&["verify", "--config", &cfg, "--out", "bad"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[dynamics-core]") && err.contains("not expanding"), "{err}");
    assert!(read(&dir, "bad", "record.txt").contains("status=failed"));
}

#[test]
fn oversized_perturbation_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, "big.cfg", "map=cookie_cutter r1=3 r2=3\n");
    let out = pressurelab(&["verify", "--config", &cfg, "--out", "big", "--eps-schedule", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[random-bundle] perturbation too large"), "{err}");
}

#[test]
fn config_errors_exit_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, "x.cfg", "mode=dimension\ndepth=0\n");
    let out = pressurelab(&["run", "--config", &cfg, "--out", "x"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));
    assert!(!dir.path().join("x").exists());
}

#[test]
fn cache_reproduces_uncached_run() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cfg = config(&dir, "d.cfg", "mode=dimension\nmap=cookie_cutter r1=2 r2=4\ndepth=10\n");
    let run = |out: &str, cached: bool| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_pressurelab"));
        cmd.args(["run", "--config", &cfg, "--out", out]).current_dir(dir.path());
        if cached {
            cmd.env("PRESSURELAB_CACHE", &cache);
        } else {
            cmd.env_remove("PRESSURELAB_CACHE");
        }
        assert!(cmd.output().unwrap().status.success());
    };
    run("plain", false);
    run("cold", true);
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 2);
    run("warm", true);
    assert_eq!(read(&dir, "plain", "run.csv"), read(&dir, "cold", "run.csv"));
    assert_eq!(read(&dir, "cold", "run.csv"), read(&dir, "warm", "run.csv"));
}
