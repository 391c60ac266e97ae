//! The invariant suite behind `verify` and `mode=checks`.

use std::sync::Arc;

use pressurelab_core::dynamics::{periodic_words, Family, Homeo};
use pressurelab_core::pressure::{
    conjugate_pressure_check, csv_field, orbit_average, pressure_value, raw_pressure, PointMap, PressureConfig,
};
use pressurelab_core::random::{
    build_conjugacy, expansivity_min_growth, fiber_distortion, omega, random_conjugacy_pressure_check,
};
use pressurelab_core::{ExpandingMap, MapSpec, Point, Potential, RandomFamily};

use crate::artifacts::Outcome;
use crate::config::ExperimentConfig;
use crate::pipeline::DISTORTION_SLACK;

pub const BUILTINS: &[&str] = &[
    "doubling",
    "circle n=2 a=0.1",
    "circle n=3 a=0.05",
    "cookie_cutter r1=3 r2=3",
    "cookie_cutter r1=2 r2=4",
    "golden",
    "conjugated n=2 a=0.05 h=0.1",
    "toral scale=2 turns=1",
    "toral scale=3 turns=1",
    "toral m11=2 m12=0 m21=0 m22=4",
];

/// Without an explicit schedule, the two largest certified values of `0.05·2^{−k}`.
fn default_schedule(spec: &MapSpec) -> Vec<f64> {
    (0..8)
        .map(|k| 0.05 / f64::powi(2.0, k))
        .filter(|&eps| RandomFamily::new(spec.clone(), eps, 2).is_ok())
        .take(2)
        .collect()
}

/// One row of the check table.
struct Check {
    map: String,
    name: &'static str,
    value: f64,
    bound: f64,
    pass: bool,
}

const HEADER: &str = "map,check,value,bound,status\n";

pub fn suite(cfg: &ExperimentConfig, out: &mut Outcome) {
    let maps: Vec<String> = match &cfg.map {
        Some(m) => vec![m.clone()],
        None => BUILTINS.iter().map(|s| s.to_string()).collect(),
    };
    let mut rows = Vec::new();
    for text in &maps {
        let spec = match MapSpec::parse(text) {
            Ok(s) => s,
            Err(e) => {
                out.fail(text, &e);
                continue;
            }
        };
        let name = spec.to_string();
        let result = spec.build().and_then(|m| map_checks(&name, &m, cfg, &mut rows));
        if let Err(e) = result {
            out.fail(&name, &e);
            continue;
        }
        if matches!(spec.family, Family::Circle { .. } | Family::CookieCutter { .. }) {
            let schedule = cfg.schedule.clone().unwrap_or_else(|| default_schedule(&spec));
            for eps in schedule {
                if let Err(e) = random_checks(&name, &spec, eps, cfg, &mut rows) {
                    out.fail(&format!("{name} eps={eps}"), &e);
                }
            }
        }
    }
    out.csv = HEADER.to_string();
    for c in &rows {
        let status = if c.pass { "pass" } else { "fail" };
        out.csv += &format!("{},{},{},{},{status}\n", csv_field(&c.map), c.name, c.value, c.bound);
        out.certificates += &format!("{}.{}={} bound={} {status}\n", c.map, c.name, c.value, c.bound);
        if !c.pass {
            out.failures.push(format!("{}: {} = {} violates bound {}", c.map, c.name, c.value, c.bound));
        }
    }
    out.summary("checks", rows.len());
    out.summary("failures", out.failures.len());
}

fn push(rows: &mut Vec<Check>, map: &str, name: &'static str, value: f64, bound: f64, pass: bool) {
    rows.push(Check { map: map.to_string(), name, value, bound, pass });
}

fn map_checks(
    name: &str,
    m: &ExpandingMap,
    cfg: &ExperimentConfig,
    rows: &mut Vec<Check>,
) -> pressurelab_core::Result<()> {
    let pcfg = PressureConfig { tol: cfg.tol.unwrap_or(1e-7), ..Default::default() };
    let n = cfg.depth.unwrap_or(if m.branch_count() > 4 { 5 } else { 8 });

    // identity conjugacy
    let id: PointMap = Arc::new(|p| p);
    let c = conjugate_pressure_check(m, m, id, &Potential::zero(), &pcfg)?;
    push(rows, name, "conjugacy_identity", c.difference.abs(), 0.0, c.difference == 0.0);

    // smooth conjugacy of circle maps
    if m.dim() == 1 && m.domain() == pressurelab_core::dynamics::Domain::Circle && m.branches().len() >= 2 {
        let h = Homeo::SineShift { amp: 0.1 };
        if let Ok(g) = m.conjugate_by(h) {
            let hmap: PointMap = Arc::new(move |p| Point::Line(h.eval(p.x())));
            let c = conjugate_pressure_check(m, &g, hmap, &Potential::sine(0.3, 1.0), &pcfg)?;
            push(rows, name, "conjugacy_sine", c.difference.abs(), c.bound, c.difference.abs() <= c.bound + 1e-12);
        }
    }

    // variational inequality against periodic-orbit measures
    let pots = if m.dim() == 1 {
        vec![Potential::zero(), Potential::sine(0.3, 1.0), Potential::neg_log_jacobian(0.5)]
    } else {
        vec![Potential::zero(), Potential::SingularUpper { t: 1.0 }, Potential::SingularLower { t: 1.0 }]
    };
    let period = if m.branch_count() > 4 { 4 } else { 6 };
    let words = periodic_words(m, period);
    let mut min_gap = f64::INFINITY;
    for pot in &pots {
        let p = pressure_value(m, pot, &pcfg)?.value;
        for w in &words {
            min_gap = min_gap.min(p - orbit_average(m, pot, w, &m.periodic_orbit(w))?);
        }
    }
    push(rows, name, "variational_gap", min_gap, -1e-6, min_gap >= -1e-6);

    // Lipschitz continuity in the sup norm
    let phi = Potential::sine(0.2, 1.0);
    let psi = phi.plus(1.0, &Potential::sine(0.15, 2.0))?;
    let moved =
        (raw_pressure(m, &phi, n, n, pcfg.max_cylinders)? - raw_pressure(m, &psi, n, n, pcfg.max_cylinders)?).abs();
    push(rows, name, "lipschitz", moved, 0.15, moved <= 0.15 + 1e-12);

    // monotone decrease of t ↦ P(−tΨ) with slope at most −log min expansion
    let family = |t: f64| if m.dim() == 1 { Potential::neg_log_jacobian(t) } else { Potential::SingularLower { t } };
    let grid: Vec<f64> = (0..10).map(|i| 0.25 * i as f64).collect();
    let bound = -m.min_expansion().ln() + 1e-6;
    let mut worst_slope = f64::NEG_INFINITY;
    let mut prev: Option<(f64, f64)> = None;
    for &t in &grid {
        let p = raw_pressure(m, &family(t), n, n, pcfg.max_cylinders)?;
        if let Some((t0, p0)) = prev {
            worst_slope = worst_slope.max((p - p0) / (t - t0));
        }
        prev = Some((t, p));
    }
    push(rows, name, "monotone_slope", worst_slope, bound, worst_slope <= bound);
    Ok(())
}

fn random_checks(
    name: &str,
    spec: &MapSpec,
    eps: f64,
    cfg: &ExperimentConfig,
    rows: &mut Vec<Check>,
) -> pressurelab_core::Result<()> {
    let fam = RandomFamily::new(spec.clone(), eps, 2)?;
    let label = format!("{name} eps={eps}");
    let mut worst = f64::INFINITY;
    for s in 0..fam.alphabet as u8 {
        worst = worst.min(fiber_distortion(fam.fiber(s), s, 10_000, cfg.seed).worst_violation);
    }
    push(rows, &label, "distortion_slack", worst, DISTORTION_SLACK, worst >= DISTORTION_SLACK);

    let (mut eq_excess, mut pressure_excess, mut growth) = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    let pot = Potential::sine(0.3, 1.0);
    let lip = pot.lipschitz_on(&fam.base_map).unwrap_or(0.0);
    for seed in cfg.seed_list().into_iter().take(4) {
        let w = omega(&fam, seed);
        let conj = build_conjugacy(&fam, &w, 20)?;
        eq_excess = eq_excess.max(conj.equivariance_residual(6)? - 2.0 * conj.error_bound);
        let d = random_conjugacy_pressure_check(&conj, &pot, 6)?;
        pressure_excess = pressure_excess.max(d - lip * conj.error_bound);
        growth = growth.min(expansivity_min_growth(&fam, &w, 8)?);
    }
    push(rows, &label, "equivariance_excess", eq_excess, 0.0, eq_excess <= 0.0);
    push(rows, &label, "random_conjugacy_excess", pressure_excess, 0.0, pressure_excess <= 1e-12);
    push(rows, &label, "min_growth", growth, 0.0, growth > 0.0);
    Ok(())
}
