//! Dimension of random perturbations along a decreasing `ε` schedule.

use rayon::prelude::*;

use crate::bowen::dimension_report;
use crate::dynamics::MapSpec;
use crate::error::{LabError, Result};

use super::distortion::fiber_distortion;
use super::fiber_pressure::{mean_and_std_error, omega};
use super::{build_conjugacy, expansivity_min_growth, random_bowen_roots, RandomFamily};

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityConfig {
    pub seeds: Vec<u64>,
    /// Fixed iterate depth `N` of the fiber cocycles.
    pub n: usize,
    /// Required final gap.
    pub tol: f64,
    /// Bisection tolerance for every root.
    pub root_tol: f64,
    /// Conjugacy truncation target; the depth is `⌈log tol / log γ⌉`.
    pub conj_tol: f64,
    /// Word length for the deterministic reference root.
    pub t0_depth: usize,
    pub alphabet: usize,
    pub distortion_pairs: usize,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            seeds: (0..16).collect(),
            n: 8,
            tol: 0.02,
            root_tol: 1e-9,
            conj_tol: 1e-10,
            t0_depth: 12,
            alphabet: 2,
            distortion_pairs: 10_000,
        }
    }
}

/// `ε` halved `steps − 1` times from `start`.
pub fn geometric_schedule(start: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|i| start / f64::powi(2.0, i as i32)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow {
    pub eps: f64,
    pub t_root: f64,
    pub s_root: f64,
    pub t0: f64,
    pub gap_t: f64,
    pub gap_s: f64,
    pub std_err: f64,
    pub n: usize,
    pub seeds: usize,
    /// Mean over seeds of `sup d(h_ε(ω)x, x)`.
    pub h_sup: f64,
    pub h_std_err: f64,
    /// Largest equivariance residual over seeds and its bound `2γ^m·diam`.
    pub equivariance: f64,
    pub equivariance_bound: f64,
    pub conj_depth: usize,
    /// Smallest `(1/N)·log Λ_N` over seeds.
    pub min_growth: f64,
    pub min_expansion: f64,
    pub required_expansion: f64,
    pub k0: f64,
    pub k: f64,
    pub r0: f64,
    pub worst_violation: f64,
    pub distortion_pairs: usize,
}

#[derive(Debug, Clone)]
pub struct StabilityTable {
    pub base: String,
    pub t0: f64,
    pub rows: Vec<StabilityRow>,
    /// Schedule entries that failed; their rows are missing.
    pub failures: Vec<(f64, LabError)>,
}

impl StabilityTable {
    pub const CSV_HEADER: &'static str = "epsilon,t_root,s_root,t0,gap_t,gap_s,std_err,n,seeds";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.eps, r.t_root, r.s_root, r.t0, r.gap_t, r.gap_s, r.std_err, r.n, r.seeds
            ));
        }
        out
    }

    /// Flat `key=value` lines with the per-`ε` certificates.
    pub fn certificates(&self) -> String {
        let mut out = format!("base={}\nt0={}\n", self.base, self.t0);
        for r in &self.rows {
            let e = r.eps;
            for (key, value) in [
                ("min_expansion", r.min_expansion.to_string()),
                ("required_expansion", r.required_expansion.to_string()),
                ("conj_depth", r.conj_depth.to_string()),
                ("horizon", super::fiber_pressure::BASE_HORIZON.to_string()),
                ("equivariance", r.equivariance.to_string()),
                ("equivariance_bound", r.equivariance_bound.to_string()),
                ("h_sup", r.h_sup.to_string()),
                ("h_std_err", r.h_std_err.to_string()),
                ("min_growth", r.min_growth.to_string()),
                ("r0", r.r0.to_string()),
                ("k0", r.k0.to_string()),
                ("k", r.k.to_string()),
                ("distortion_worst", r.worst_violation.to_string()),
                ("distortion_pairs", r.distortion_pairs.to_string()),
            ] {
                out.push_str(&format!("eps{e}.{key}={value}\n"));
            }
        }
        for (e, err) in &self.failures {
            out.push_str(&format!("eps{e}.error={err} [{}]\n", err.module()));
        }
        out
    }

    /// Whether `values` is non-increasing up to the combined standard errors.
    fn non_increasing(values: &[(f64, f64)]) -> bool {
        values.windows(2).all(|w| w[1].0 <= w[0].0 + w[0].1 + w[1].1)
    }

    pub fn gaps_non_increasing(&self) -> bool {
        let t: Vec<_> = self.rows.iter().map(|r| (r.gap_t, r.std_err)).collect();
        let s: Vec<_> = self.rows.iter().map(|r| (r.gap_s, r.std_err)).collect();
        Self::non_increasing(&t) && Self::non_increasing(&s)
    }

    pub fn h_non_increasing(&self) -> bool {
        let h: Vec<_> = self.rows.iter().map(|r| (r.h_sup, r.h_std_err)).collect();
        Self::non_increasing(&h)
    }

    pub fn final_gap(&self) -> Option<f64> {
        self.rows.last().map(|r| r.gap_t.max(r.gap_s))
    }
}

fn row(base: &MapSpec, eps: f64, t0: f64, cfg: &StabilityConfig) -> Result<StabilityRow> {
    let fam = RandomFamily::new(base.clone(), eps, cfg.alphabet)?;
    let roots = random_bowen_roots(&fam, &cfg.seeds, cfg.n, cfg.root_tol)?;
    let depth = fam.default_depth(cfg.conj_tol);
    let per_seed = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let w = omega(&fam, seed);
            let conj = build_conjugacy(&fam, &w, depth)?;
            Ok((
                conj.distance_to_identity(cfg.n)?,
                conj.equivariance_residual(cfg.n)?,
                expansivity_min_growth(&fam, &w, cfg.n)?,
                conj.error_bound,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let h: Vec<f64> = per_seed.iter().map(|p| p.0).collect();
    let (h_sup, h_std_err) = mean_and_std_error(&h);
    let certs: Vec<_> = (0..cfg.alphabet)
        .into_par_iter()
        .map(|s| fiber_distortion(fam.fiber(s as u8), s as u8, cfg.distortion_pairs, cfg.seeds[0]))
        .collect();
    let (min_expansion, required_expansion) = fam.expansion_margin();
    Ok(StabilityRow {
        eps,
        t_root: roots.t,
        s_root: roots.s,
        t0,
        gap_t: (roots.t - t0).abs(),
        gap_s: (roots.s - t0).abs(),
        std_err: roots.std_error,
        n: cfg.n,
        seeds: cfg.seeds.len(),
        h_sup,
        h_std_err,
        equivariance: per_seed.iter().map(|p| p.1).fold(0.0, f64::max),
        equivariance_bound: 2.0 * per_seed[0].3,
        conj_depth: depth,
        min_growth: per_seed.iter().map(|p| p.2).fold(f64::INFINITY, f64::min),
        min_expansion,
        required_expansion,
        k0: certs.iter().map(|c| c.k0).fold(0.0, f64::max),
        k: certs.iter().map(|c| c.k).fold(0.0, f64::max),
        r0: certs.iter().map(|c| c.r0).fold(f64::INFINITY, f64::min),
        worst_violation: certs.iter().map(|c| c.worst_violation).fold(f64::INFINITY, f64::min),
        distortion_pairs: cfg.distortion_pairs,
    })
}

/// Random Bowen roots `(t_N^ε, s_N^ε)` against the deterministic root `t₀`
/// for every `ε`, with conjugacy, expansion and distortion certificates.
/// Rows stay in schedule order; failing entries are collected instead.
pub fn stability_experiment(base: &MapSpec, schedule: &[f64], cfg: &StabilityConfig) -> Result<StabilityTable> {
    assert!(!cfg.seeds.is_empty());
    let f = base.build()?;
    let report = dimension_report(&f, cfg.t0_depth, cfg.root_tol)?;
    let t0 = report.t_root.unwrap_or(0.5 * (report.t_lower + report.t_upper));
    let results: Vec<Result<StabilityRow>> = schedule.par_iter().map(|&eps| row(base, eps, t0, cfg)).collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (&eps, r) in schedule.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push((eps, e)),
        }
    }
    Ok(StabilityTable { base: base.to_string(), t0, rows, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> StabilityConfig {
        StabilityConfig { seeds: (0..4).collect(), distortion_pairs: 1000, ..Default::default() }
    }

    #[test]
    fn zero_schedule_reproduces_t0() {
        let base = MapSpec::parse("cookie_cutter r1=3 r2=3").unwrap();
        let table = stability_experiment(&base, &[0.0], &quick()).unwrap();
        let r = &table.rows[0];
        assert!(r.gap_t < 1e-6 && r.gap_s < 1e-6);
        assert!((table.t0 - 2f64.ln() / 3f64.ln()).abs() < 1e-6);
        assert_eq!(r.h_sup, 0.0);
    }

    #[test]
    fn doubling_roots_saturate() {
        let base = MapSpec::parse("doubling").unwrap();
        let table = stability_experiment(&base, &[0.05, 0.025], &quick()).unwrap();
        for r in &table.rows {
            assert!((r.t_root - 1.0).abs() < 1e-3 && (r.s_root - 1.0).abs() < 1e-3, "{r:?}");
        }
    }

    #[test]
    fn failures_keep_the_partial_table() {
        let base = MapSpec::parse("doubling").unwrap();
        let table = stability_experiment(&base, &[0.6, 0.05], &quick()).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert!(matches!(table.failures[0].1, LabError::PerturbationTooLarge { .. }));
        assert!(table.certificates().contains("eps0.6.error="));
    }

    #[test]
    fn csv_is_deterministic() {
        let base = MapSpec::parse("cookie_cutter r1=3 r2=3").unwrap();
        let a = stability_experiment(&base, &[0.1, 0.05], &quick()).unwrap();
        let b = stability_experiment(&base, &[0.1, 0.05], &quick()).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.certificates(), b.certificates());
        assert_eq!(a.to_csv().lines().count(), 3);
        assert!(a.rows.iter().all(|r| r.t_root <= r.s_root));
    }

    #[test]
    fn schedule_is_geometric() {
        assert_eq!(geometric_schedule(0.2, 4), vec![0.2, 0.1, 0.05, 0.025]);
    }
}
