//! Output files, the run record, the gap plot and the cylinder cache.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use pressurelab_core::bowen::{profile_pairs, LogNormProfile, ProfilePair, DIMENSION_CAP};
use pressurelab_core::dynamics::{sweep, SweepSpec};
use pressurelab_core::ExpandingMap;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

/// What a pipeline produced. Failed stages are listed in `failures`; the
/// files written so far are kept.
#[derive(Debug, Default)]
pub struct Outcome {
    pub csv: String,
    pub certificates: String,
    pub svg: Option<String>,
    pub summary: Vec<(String, String)>,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn summary(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn fail(&mut self, stage: &str, err: &pressurelab_core::LabError) {
        self.failures.push(format!("{stage}: [{}] {err}", err.module()));
    }
}

/// Writes every artifact and the record; returns the record text.
pub fn write_run(cfg: &ExperimentConfig, outcome: &Outcome) -> Result<String> {
    let dir = &cfg.out;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files = vec!["run.csv", "certificates.txt"];
    fs::write(dir.join("run.csv"), &outcome.csv)?;
    fs::write(dir.join("certificates.txt"), &outcome.certificates)?;
    if let Some(svg) = &outcome.svg {
        fs::write(dir.join("gaps.svg"), svg)?;
        files.push("gaps.svg");
    }
    files.push("record.txt");
    let record = record(cfg, &files, outcome);
    fs::write(dir.join("record.txt"), &record)?;
    Ok(record)
}

fn record(cfg: &ExperimentConfig, files: &[&str], outcome: &Outcome) -> String {
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "config_hash={}", cfg.hash());
    let _ = writeln!(out, "timestamp={timestamp}");
    let _ = writeln!(out, "pressurelab_cli={}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "pressurelab_core={}", pressurelab_core::VERSION);
    let _ = writeln!(out, "mode={}", cfg.mode);
    let _ = writeln!(out, "files={}", files.join(","));
    for (k, v) in &outcome.summary {
        let _ = writeln!(out, "summary.{k}={v}");
    }
    for f in &outcome.failures {
        let _ = writeln!(out, "failure={f}");
    }
    let _ = writeln!(out, "status={}", if outcome.failures.is_empty() { "ok" } else { "failed" });
    out
}

/// Line plot of `(x, y)` with markers, axes and min/max tick labels.
pub fn line_plot(points: &[(f64, f64)], x_label: &str, y_label: &str) -> String {
    let (w, h, m) = (480.0, 320.0, 60.0);
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let lo = points.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, lo + 0.5)
        }
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let path: Vec<String> = sorted.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<path d="M{m},{m} V{b} H{r}" fill="none" stroke="black"/>"#, b = h - m, r = w - m);
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, path.join(" "));
    for &(x, y) in &sorted {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(x), sy(y));
    }
    let text = |s: &mut String, x: f64, y: f64, anchor: &str, label: &str| {
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{y:.2}" font-size="11" text-anchor="{anchor}">{label}</text>"#);
    };
    text(&mut s, m, h - m + 16.0, "middle", &format!("{x0:.3e}"));
    text(&mut s, w - m, h - m + 16.0, "middle", &format!("{x1:.3e}"));
    text(&mut s, m - 4.0, h - m, "end", &format!("{y0:.2e}"));
    text(&mut s, m - 4.0, m + 4.0, "end", &format!("{y1:.2e}"));
    text(&mut s, w / 2.0, h - 16.0, "middle", x_label);
    text(&mut s, 16.0, h / 2.0, "middle", y_label);
    s.push_str("</svg>\n");
    s
}

fn cache_file(dir: &Path, map: &ExpandingMap, n: usize) -> PathBuf {
    let key = hex::encode(Sha256::digest(map.id().as_bytes()));
    dir.join(format!("{}-n{n}.txt", &key[..16]))
}

/// `(log‖·‖, log m(·))` per `n`-cylinder, stored as raw bit patterns so a
/// cached run reproduces the uncached one exactly.
fn cylinder_norms(map: &ExpandingMap, n: usize, cache: Option<&Path>) -> Result<Vec<(f64, f64)>> {
    let file = cache.map(|d| cache_file(d, map, n));
    if let Some(f) = &file {
        if let Ok(text) = fs::read_to_string(f) {
            let parsed: Option<Vec<(f64, f64)>> = text
                .lines()
                .map(|l| {
                    let (a, b) = l.split_once(' ')?;
                    let a = u64::from_str_radix(a, 16).ok()?;
                    let b = u64::from_str_radix(b, 16).ok()?;
                    Some((f64::from_bits(a), f64::from_bits(b)))
                })
                .collect();
            if let Some(rows) = parsed {
                return Ok(rows);
            }
        }
    }
    let rows: Vec<(f64, f64)> = sweep(&SweepSpec::deterministic(map, n, DIMENSION_CAP))?
        .into_iter()
        .map(|r| (r.log_norm, r.log_conorm))
        .collect();
    if let Some(f) = &file {
        let mut text = String::with_capacity(rows.len() * 34);
        for (a, b) in &rows {
            let _ = writeln!(text, "{:016x} {:016x}", a.to_bits(), b.to_bits());
        }
        fs::create_dir_all(f.parent().unwrap())?;
        fs::write(f, text).with_context(|| format!("writing cache {}", f.display()))?;
    }
    Ok(rows)
}

/// The profiles of [`profile_pairs`], read from or written to `cache` when given.
pub fn cached_profiles(map: &ExpandingMap, n: usize, cache: Option<&Path>) -> Result<(ProfilePair, ProfilePair)> {
    let Some(dir) = cache else {
        return Ok(profile_pairs(map, n, DIMENSION_CAP)?);
    };
    let full = cylinder_norms(map, n, Some(dir))?;
    let half = if n >= 2 { Some(cylinder_norms(map, n / 2, Some(dir))?) } else { None };
    let profile = |depth: usize, rows: &[(f64, f64)], norm: bool| LogNormProfile {
        depth,
        values: rows.iter().map(|r| if norm { r.0 } else { r.1 }).collect(),
    };
    let pair = |norm: bool| ProfilePair {
        full: profile(n, &full, norm),
        half: half.as_ref().map(|h| profile(n / 2, h, norm)),
    };
    Ok((pair(true), pair(false)))
}
