//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line.

use std::sync::Arc;
use std::time::Instant;

use pressurelab_core::bowen::dimension_report;
use pressurelab_core::dynamics::{build_markov_map, periodic_words, ExpandingMap, Homeo, MapSpec, Point};
use pressurelab_core::pressure::{
    conjugate_pressure_check, orbit_average, pressure_at_depth, pressure_limit, pressure_subadditive, pressure_value,
    raw_pressure, transfer_pressure, PointMap, Potential, PressureConfig,
};
use pressurelab_core::random::{
    build_conjugacy, expansivity_min_growth, fiber_distortion, omega, random_conjugacy_pressure_check,
    stability_experiment, RandomFamily, StabilityConfig,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

const ONE_D: &[&str] = &[
    "doubling",
    "circle n=2 a=0.1",
    "circle n=3 a=0.05",
    "cookie_cutter r1=3 r2=3",
    "cookie_cutter r1=2 r2=4",
    "golden",
    "conjugated n=2 a=0.05 h=0.1",
];

const TWO_D: &[&str] = &["toral scale=2 turns=1", "toral scale=3 turns=1", "toral m11=2 m12=0 m21=0 m22=4"];

fn all_builtins() -> impl Iterator<Item = &'static str> {
    ONE_D.iter().chain(TWO_D).copied()
}

fn map(spec: &str) -> ExpandingMap {
    build_markov_map(spec).unwrap()
}

fn report(criterion: u32, name: &str, ok: bool, detail: String) {
    println!("{} criterion {criterion} ({name}): {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion} failed: {detail}");
}

/// Independent scalar bisection for `Σ r_i^{−t} = 1`.
fn moran_root(slopes: &[f64]) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slopes.iter().map(|r| r.powf(-mid)).sum::<f64>() > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn criterion_1_moran_dimensions() {
    let cases = [
        ("cookie_cutter r1=3 r2=3", 2f64.ln() / 3f64.ln(), moran_root(&[3.0, 3.0])),
        ("cookie_cutter r1=2 r2=4", (0.5 * (1.0 + 5f64.sqrt())).ln() / 2f64.ln(), moran_root(&[2.0, 4.0])),
    ];
    let mut ok = true;
    let mut detail = String::new();
    for (spec, closed_form, oracle) in cases {
        assert!((closed_form - oracle).abs() < 1e-12);
        let start = Instant::now();
        let r = dimension_report(&map(spec), 14, 1e-6).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let t = r.t_root.unwrap_or(f64::NAN);
        let err = (t - closed_form).abs();
        ok &= err < 2e-3 && secs < 10.0;
        detail += &format!("[{spec}: t={t:.6} err={err:.2e} time={secs:.2}s] ");
    }
    report(1, "Moran-oracle dimensions", ok, detail);
}

#[test]
fn criterion_2_entropy() {
    let cfg = PressureConfig::default();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for spec in all_builtins() {
        let m = map(spec);
        if !m.is_full_branch() {
            continue;
        }
        count += 1;
        let p = pressure_limit(&m, &Potential::zero(), 1e-10, &cfg).unwrap();
        worst = worst.max((p.value - (m.branch_count() as f64).ln()).abs());
    }
    report(2, "entropy", worst < 1e-9 && count >= 8, format!("{count} full-branch maps, max error {worst:.2e}"));
}

#[test]
fn criterion_3_transfer_oracle() {
    let pots =
        [Potential::zero(), Potential::neg_log_jacobian(1.0), Potential::sine(0.5, 1.0), Potential::sine(0.2, 3.0)];
    let mut worst: f64 = 0.0;
    for spec in ONE_D {
        let m = map(spec);
        for pot in &pots {
            // both estimators carry a c/n term; each is combined with its own depth-5 value
            let sep = pressure_at_depth(&m, pot, 10, m.separation_eps()).unwrap().value;
            let tm = 2.0 * transfer_pressure(&m, pot, 10, 1 << 20).unwrap()
                - transfer_pressure(&m, pot, 5, 1 << 20).unwrap();
            worst = worst.max((sep - tm).abs());
        }
    }
    report(3, "transfer-matrix agreement", worst < 1e-2, format!("max |separated − transfer| = {worst:.2e} at n=10"));
}

#[test]
fn criterion_4_monotone_and_lipschitz() {
    let grid: Vec<f64> = (0..10).map(|i| 0.25 * i as f64).collect();
    let mut worst_slack = f64::INFINITY;
    let mut worst_lip = f64::INFINITY;
    for spec in all_builtins() {
        let m = map(spec);
        let n = if m.branch_count() > 4 { 5 } else { 10 };
        let bound = -m.min_expansion().ln() + 1e-6;
        let families: Vec<Box<dyn Fn(f64) -> Potential>> = if m.dim() == 1 {
            vec![Box::new(Potential::neg_log_jacobian)]
        } else {
            vec![Box::new(|t| Potential::SingularUpper { t }), Box::new(|t| Potential::SingularLower { t })]
        };
        for fam in &families {
            let values: Vec<f64> = grid.iter().map(|&t| raw_pressure(&m, &fam(t), n, n, 1 << 20).unwrap()).collect();
            for (w, t) in values.windows(2).zip(grid.windows(2)) {
                let slope = (w[1] - w[0]) / (t[1] - t[0]);
                worst_slack = worst_slack.min(bound - slope);
            }
        }
        // ‖φ − ψ‖∞ = 0.3
        let phi = Potential::sine(0.2, 1.0);
        let psi = phi.plus(1.0, &Potential::constant(0.3)).unwrap().plus(1.0, &Potential::sine(0.0, 2.0)).unwrap();
        let wiggle = Potential::sine(0.2, 1.0).plus(1.0, &Potential::sine(0.15, 2.0)).unwrap();
        for (a, b, norm) in [(&phi, &psi, 0.3), (&phi, &wiggle, 0.15)] {
            let pa = raw_pressure(&m, a, n, n, 1 << 20).unwrap();
            let pb = raw_pressure(&m, b, n, n, 1 << 20).unwrap();
            worst_lip = worst_lip.min(norm - (pa - pb).abs() + 1e-12);
        }
    }
    report(
        4,
        "monotonicity and Lipschitz",
        worst_slack > 0.0 && worst_lip >= 0.0,
        format!("min slope slack {worst_slack:.3e}, min Lipschitz slack {worst_lip:.3e}"),
    );
}

#[test]
fn criterion_5_iterated_pressure() {
    let conformal = [
        ("doubling", 16),
        ("circle n=2 a=0.1", 16),
        ("circle n=3 a=0.05", 8),
        ("cookie_cutter r1=3 r2=3", 16),
        ("cookie_cutter r1=2 r2=4", 16),
        ("conjugated n=2 a=0.05 h=0.1", 16),
        ("toral scale=2 turns=1", 8),
    ];
    let mut worst: f64 = 0.0;
    let mut detail = String::new();
    for (spec, budget) in conformal {
        let m = map(spec);
        let t = dimension_report(&m, budget.min(12), 1e-10).unwrap().t_root.unwrap();
        let cfg = PressureConfig { word_budget: budget, ..Default::default() };
        let p = pressure_subadditive(&m, &Potential::SingularUpper { t }, &[1, 2, 4, 8], f64::INFINITY, &cfg).unwrap();
        let vals: Vec<f64> = p.per_depth_values.iter().map(|v| v.1).collect();
        let spread =
            vals.iter().copied().fold(f64::NEG_INFINITY, f64::max) - vals.iter().copied().fold(f64::INFINITY, f64::min);
        worst = worst.max(spread);
        detail += &format!("[{spec}: {spread:.1e}] ");
    }
    report(
        5,
        "iterated-pressure identity",
        worst < 5e-3,
        format!("max spread over k∈{{1,2,4,8}} {worst:.2e} {detail}"),
    );
}

#[test]
fn criterion_6_conjugacy_invariance() {
    let cfg = PressureConfig { tol: 1e-7, ..Default::default() };
    let mut ok = true;
    let mut detail = String::new();
    let h = Homeo::SineShift { amp: 0.1 };
    let hmap: PointMap = Arc::new(move |p| Point::Line(h.eval(p.x())));
    let pots = [Potential::zero(), Potential::sine(0.3, 1.0)];
    for spec in ["doubling", "circle n=2 a=0.1", "circle n=3 a=0.05"] {
        let f = map(spec);
        let g = f.conjugate_by(h).unwrap();
        for pot in &pots {
            let c = conjugate_pressure_check(&f, &g, hmap.clone(), pot, &cfg).unwrap();
            ok &= c.difference.abs() <= c.bound + 1e-12;
            detail += &format!("[{spec}: |Δ|={:.1e} ≤ {:.1e}] ", c.difference.abs(), c.bound);
        }
    }
    for spec in ONE_D.iter().chain(TWO_D) {
        let f = map(spec);
        let id: PointMap = Arc::new(|p| p);
        let c = conjugate_pressure_check(&f, &f, id, &Potential::zero(), &cfg).unwrap();
        ok &= c.difference == 0.0;
    }
    // 2-to-1 factor: the torus map 2·I onto doubling by projection
    let proj: PointMap = Arc::new(|p| Point::Line(p.coords()[0]));
    let c = conjugate_pressure_check(
        &map("toral scale=2 turns=0"),
        &map("doubling"),
        proj,
        &Potential::sine(0.3, 1.0),
        &cfg,
    )
    .unwrap();
    ok &= c.difference <= c.bound + 1e-12;
    detail += &format!("[factor: Δ={:.3} ≤ 0] ", c.difference);

    for (spec, eps) in [
        ("doubling", 0.05),
        ("circle n=3 a=0.05", 0.05),
        ("cookie_cutter r1=3 r2=3", 0.1),
        ("cookie_cutter r1=2 r2=4", 0.05),
    ] {
        let fam = RandomFamily::new(MapSpec::parse(spec).unwrap(), eps, 2).unwrap();
        for seed in 0..4 {
            let conj = build_conjugacy(&fam, &omega(&fam, seed), 20).unwrap();
            let eq = conj.equivariance_residual(6).unwrap();
            ok &= eq <= 2.0 * conj.error_bound;
            for pot in [Potential::zero(), Potential::neg_log_jacobian(1.0), Potential::sine(0.3, 1.0)] {
                let lip = pot.lipschitz_on(&fam.base_map).unwrap_or(0.0);
                let d = random_conjugacy_pressure_check(&conj, &pot, 6).unwrap();
                ok &= d <= lip * conj.error_bound + 1e-12;
            }
        }
        detail += &format!("[random {spec} ε={eps}] ");
    }
    report(6, "conjugacy invariance", ok, detail);
}

/// Monte-Carlo root of `E[log(r₁^{−t} + r₂^{−t})] = 0` for slopes
/// `3(1 + εa)` with `a = ±1`, drawn from a generator unrelated to the base.
fn expectation_root(eps: f64) -> f64 {
    let mut rng = StdRng::seed_from_u64(0x5eed_0ac1e);
    let samples: Vec<f64> = (0..1_000_000)
        .map(|_| {
            let a = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            3.0 * (1.0 + eps * a)
        })
        .collect();
    let mean = |t: f64| samples.iter().map(|r| (2.0 * r.powf(-t)).ln()).sum::<f64>() / samples.len() as f64;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mean(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn criterion_7_structural_stability() {
    let start = Instant::now();
    let base = MapSpec::parse("cookie_cutter r1=3 r2=3").unwrap();
    let schedule = [0.2, 0.1, 0.05, 0.025];
    let cfg = StabilityConfig::default();
    let table = stability_experiment(&base, &schedule, &cfg).unwrap();
    assert!(table.failures.is_empty());
    let mut ok = table.rows.len() == schedule.len();
    let mut detail = String::new();
    let mut gaps = Vec::new();
    for r in &table.rows {
        let oracle = expectation_root(r.eps);
        let (gt, gs) = ((r.t_root - oracle).abs(), (r.s_root - oracle).abs());
        gaps.push((gt, gs, r.std_err));
        ok &= r.equivariance <= r.equivariance_bound;
        detail += &format!("[ε={} oracle={oracle:.5} gap_t={gt:.1e} gap_s={gs:.1e} h={:.1e}] ", r.eps, r.h_sup);
    }
    for w in gaps.windows(2) {
        let slack = w[0].2 + w[1].2;
        ok &= w[1].0 <= w[0].0 + slack && w[1].1 <= w[0].1 + slack;
    }
    let (ft, fs, _) = *gaps.last().unwrap();
    ok &= ft < 0.02 && fs < 0.02;
    ok &= table.h_non_increasing();
    ok &= table.gaps_non_increasing();
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 300.0;
    report(7, "structural stability", ok, format!("{detail}time={secs:.1}s"));
}

#[test]
fn criterion_8_distortion_and_growth() {
    let families: &[(&str, &[f64])] = &[
        ("cookie_cutter r1=3 r2=3", &[0.2, 0.1, 0.05, 0.025]),
        ("cookie_cutter r1=2 r2=4", &[0.1, 0.05, 0.025]),
        ("doubling", &[0.05, 0.025]),
        ("circle n=3 a=0.05", &[0.1, 0.05]),
    ];
    let mut worst = f64::INFINITY;
    let mut min_growth = f64::INFINITY;
    let mut pairs = usize::MAX;
    for (spec, schedule) in families {
        for &eps in *schedule {
            let fam = RandomFamily::new(MapSpec::parse(spec).unwrap(), eps, 2).unwrap();
            for s in 0..2u8 {
                let c = fiber_distortion(fam.fiber(s), s, 10_000, 1);
                worst = worst.min(c.worst_violation);
                pairs = pairs.min(c.pairs);
            }
            for seed in 0..16 {
                min_growth = min_growth.min(expansivity_min_growth(&fam, &omega(&fam, seed), 8).unwrap());
            }
        }
    }
    report(
        8,
        "distortion certificate",
        worst >= -1e-10 && min_growth > 0.0 && pairs >= 10_000,
        format!("worst slack {worst:.2e} over {pairs} pairs per fiber, min (1/8)·log Λ_8 = {min_growth:.4}"),
    );
}

#[test]
fn criterion_9_variational_inequality() {
    let cfg = PressureConfig { tol: 1e-8, ..Default::default() };
    let mut worst = f64::INFINITY;
    let mut orbits = 0usize;
    for spec in all_builtins() {
        let m = map(spec);
        let pots = if m.dim() == 1 {
            vec![Potential::zero(), Potential::neg_log_jacobian(1.0), Potential::sine(0.4, 1.0)]
        } else {
            vec![Potential::zero(), Potential::SingularUpper { t: 1.0 }, Potential::SingularLower { t: 1.0 }]
        };
        let words = periodic_words(&m, 8);
        orbits += words.len();
        let values: Vec<f64> = pots.iter().map(|pot| pressure_value(&m, pot, &cfg).unwrap().value).collect();
        let min_gap = words
            .par_iter()
            .map(|w| {
                let points = m.periodic_orbit(w);
                pots.iter()
                    .zip(&values)
                    .map(|(pot, p)| p - orbit_average(&m, pot, w, &points).unwrap())
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min);
        worst = worst.min(min_gap);
    }
    report(9, "variational inequality", worst >= -1e-6, format!("min gap {worst:.3e} over {orbits} periodic orbits"));
}
