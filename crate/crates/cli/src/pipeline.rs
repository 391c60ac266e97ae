//! One pipeline per mode.

use std::path::Path;

use pressurelab_core::bowen::{dimension_from_profiles, DimensionReport};
use pressurelab_core::lyapunov::ConformalityConfig;
use pressurelab_core::pressure::{pressure_limit, PressureConfig};
use pressurelab_core::random::{random_entropy, stability_experiment, StabilityConfig, StabilityTable};
use pressurelab_core::{average_conformal_check, LabError, MapSpec, Potential, PressureEstimate, RandomFamily};

use crate::artifacts::{cached_profiles, line_plot, Outcome};
use crate::checks;
use crate::config::{ExperimentConfig, Mode, DEFAULT_SCHEDULE};

/// Distortion inequalities must hold up to this slack.
pub const DISTORTION_SLACK: f64 = -1e-10;

pub fn run(cfg: &ExperimentConfig, cache: Option<&Path>) -> Outcome {
    let mut out = Outcome::default();
    match cfg.mode {
        Mode::Dimension => dimension(cfg, cache, &mut out),
        Mode::Pressure => pressure(cfg, &mut out),
        Mode::Lyapunov => lyapunov(cfg, &mut out),
        Mode::Stability => stability(cfg, &mut out),
        Mode::Entropy => entropy(cfg, &mut out),
        Mode::Checks => checks::suite(cfg, &mut out),
    }
    out
}

fn build(cfg: &ExperimentConfig, out: &mut Outcome) -> Option<pressurelab_core::ExpandingMap> {
    let built = MapSpec::parse(cfg.map_or_default()).and_then(|s| s.build());
    built.map_err(|e| out.fail("map", &e)).ok()
}

fn dimension(cfg: &ExperimentConfig, cache: Option<&Path>, out: &mut Outcome) {
    out.csv = format!("{}\n", DimensionReport::CSV_HEADER);
    let Some(map) = build(cfg, out) else { return };
    let depth = cfg.depth.unwrap_or(12);
    let tol = cfg.tol.unwrap_or(1e-6);
    let report = match cached_profiles(&map, depth, cache) {
        Ok((norm, conorm)) => dimension_from_profiles(map.dim(), &norm, &conorm, tol),
        Err(e) => match e.downcast::<LabError>() {
            Ok(lab) => Err(lab),
            Err(io) => {
                out.failures.push(format!("dimension: [cache] {io:#}"));
                return;
            }
        },
    };
    match report {
        Ok(r) => {
            out.csv += &r.to_csv_row(map.id());
            out.csv.push('\n');
            out.certificates = format!(
                "map={}\ndepth={}\ntol={}\nbracket_width={}\n",
                map.id(),
                r.depth,
                r.tolerance,
                r.bracket_width
            );
            out.summary("t_lower", r.t_lower);
            out.summary("t_upper", r.t_upper);
            out.summary("t_root", r.t_root.map(|t| t.to_string()).unwrap_or_default());
        }
        Err(e) => out.fail("dimension", &e),
    }
}

fn pressure(cfg: &ExperimentConfig, out: &mut Outcome) {
    out.csv = format!("{}\n", PressureEstimate::CSV_HEADER);
    let Some(map) = build(cfg, out) else { return };
    let pot = match Potential::parse(&cfg.potential) {
        Ok(p) => p,
        Err(e) => return out.fail("potential", &e),
    };
    let pcfg = PressureConfig {
        tol: cfg.tol.unwrap_or(1e-6),
        max_depth: cfg.depth.unwrap_or(PressureConfig::default().max_depth),
        ..Default::default()
    };
    let estimate = match pressure_limit(&map, &pot, pcfg.tol, &pcfg) {
        Ok(e) => e,
        Err(LabError::NoConvergence { partial }) => {
            out.fail("pressure", &LabError::NoConvergence { partial: partial.clone() });
            *partial
        }
        Err(e) => return out.fail("pressure", &e),
    };
    out.csv += &estimate.to_csv_row(map.id(), &pot.description());
    out.csv.push('\n');
    out.certificates = String::from("n,raw_value\n");
    for (n, v) in &estimate.per_depth_values {
        out.certificates += &format!("{n},{v}\n");
    }
    out.summary("pressure", estimate.value);
    out.summary("residual", estimate.residual);
}

fn lyapunov(cfg: &ExperimentConfig, out: &mut Outcome) {
    let Some(map) = build(cfg, out) else {
        out.csv = format!("{}\n", pressurelab_core::ConformalityReport::CSV_HEADER);
        return;
    };
    let ccfg = ConformalityConfig { threshold: cfg.tol.unwrap_or(1e-6), seed: cfg.seed, ..Default::default() };
    match average_conformal_check(&map, cfg.depth.unwrap_or(6).max(3), cfg.seeds, &ccfg) {
        Ok(r) => {
            out.csv = r.to_csv();
            out.certificates = format!(
                "map={}\nthreshold={}\nsamples={}\nmin_exponent={}\nmax_spread={}\nverdict={}\n",
                map.id(),
                ccfg.threshold,
                r.samples.len(),
                r.min_exponent,
                r.max_spread,
                r.verdict.as_str()
            );
            out.summary("verdict", r.verdict.as_str());
            out.summary("max_spread", r.max_spread);
            out.summary("min_exponent", r.min_exponent);
            if !(r.min_exponent > 0.0) {
                out.failures.push(format!("lyapunov: min exponent {} is not positive", r.min_exponent));
            }
        }
        Err(e) => {
            out.csv = format!("{}\n", pressurelab_core::ConformalityReport::CSV_HEADER);
            out.fail("lyapunov", &e);
        }
    }
}

fn stability(cfg: &ExperimentConfig, out: &mut Outcome) {
    out.csv = format!("{}\n", StabilityTable::CSV_HEADER);
    let spec = match MapSpec::parse(cfg.map_or_default()) {
        Ok(s) => s,
        Err(e) => return out.fail("map", &e),
    };
    let schedule = cfg.schedule.clone().unwrap_or(DEFAULT_SCHEDULE.to_vec());
    let scfg = StabilityConfig {
        seeds: cfg.seed_list(),
        n: cfg.depth.unwrap_or(8),
        tol: cfg.tol.unwrap_or(0.02),
        ..Default::default()
    };
    let table = match stability_experiment(&spec, &schedule, &scfg) {
        Ok(t) => t,
        Err(e) => return out.fail("stability", &e),
    };
    out.csv = table.to_csv();
    out.certificates = table.certificates();
    for (eps, e) in &table.failures {
        out.fail(&format!("stability eps={eps}"), e);
    }
    let mut check = |ok: bool, what: String| {
        if !ok {
            out.failures.push(format!("stability: {what}"));
        }
    };
    for r in &table.rows {
        check(r.equivariance <= r.equivariance_bound, format!("eps={} equivariance above bound", r.eps));
        check(r.worst_violation >= DISTORTION_SLACK, format!("eps={} distortion slack {}", r.eps, r.worst_violation));
        check(r.min_growth > 0.0, format!("eps={} growth {} not positive", r.eps, r.min_growth));
    }
    check(table.gaps_non_increasing(), "gaps increase along the schedule".into());
    check(table.h_non_increasing(), "conjugacy distance increases along the schedule".into());
    if let Some(g) = table.final_gap() {
        check(g < scfg.tol, format!("final gap {g} not below {}", scfg.tol));
    }
    let points: Vec<(f64, f64)> = table.rows.iter().map(|r| (r.eps, r.gap_t.max(r.gap_s))).collect();
    if !points.is_empty() {
        out.svg = Some(line_plot(&points, "epsilon", "|root - t0|"));
    }
    out.summary("t0", table.t0);
    if let Some(r) = table.rows.last() {
        out.summary("final_eps", r.eps);
        out.summary("final_t_root", r.t_root);
        out.summary("final_s_root", r.s_root);
    }
    if let Some(g) = table.final_gap() {
        out.summary("final_gap", g);
    }
}

fn entropy(cfg: &ExperimentConfig, out: &mut Outcome) {
    out.csv = "epsilon,entropy,std_err,n,seeds\n".into();
    let spec = match MapSpec::parse(cfg.map_or_default()) {
        Ok(s) => s,
        Err(e) => return out.fail("map", &e),
    };
    let schedule = cfg.schedule.clone().unwrap_or(vec![0.0]);
    let n = cfg.depth.unwrap_or(8);
    let seeds = cfg.seed_list();
    let mut last = None;
    for &eps in &schedule {
        let row = if eps == 0.0 {
            let pcfg = PressureConfig { tol: cfg.tol.unwrap_or(1e-9), ..Default::default() };
            spec.build()
                .and_then(|m| pressure_limit(&m, &Potential::zero(), pcfg.tol, &pcfg))
                .map(|e| (e.value, 0.0, e.depth, 0))
        } else {
            RandomFamily::new(spec.clone(), eps, 2)
                .and_then(|fam| random_entropy(&fam, &seeds, n))
                .map(|e| (e.value, e.std_error, e.n, e.omega_samples))
        };
        match row {
            Ok((h, se, n, k)) => {
                out.csv += &format!("{eps},{h},{se},{n},{k}\n");
                last = Some(h);
            }
            Err(e) => out.fail(&format!("entropy eps={eps}"), &e),
        }
    }
    out.certificates = format!("map={}\nschedule={:?}\n", spec, schedule);
    if let Some(h) = last {
        out.summary("entropy", h);
    }
}
