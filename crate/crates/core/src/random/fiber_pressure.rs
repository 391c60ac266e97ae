//! Pressure, entropy and Bowen roots along random fiber sequences.

use rayon::prelude::*;

use crate::bowen::{clamped_root, LogNormProfile, ProfilePair, SingularKind};
use crate::dynamics::{admissible_words, sweep, Point, SweepSpec, Word};
use crate::error::{LabError, Result};
use crate::linalg::LogProduct;
use crate::pressure::{log_sum_exp, Potential};

use super::{BaseSample, FiberConjugacy, RandomFamily};

/// Window half-width used for every seeded base sample, so one seed means
/// one `ω` throughout a run.
pub const BASE_HORIZON: usize = 128;

/// Largest cylinder count enumerated per fiber sequence.
pub const FIBER_CAP: usize = 1 << 22;

/// The base sample for `seed`.
pub fn omega(fam: &RandomFamily, seed: u64) -> BaseSample {
    super::sample_base(seed, BASE_HORIZON, fam.alphabet)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomPressureEstimate {
    /// Mean of `per_omega`.
    pub value: f64,
    pub n: usize,
    pub eps_sep: f64,
    pub omega_samples: usize,
    pub per_omega: Vec<f64>,
    pub std_error: f64,
}

/// `(mean, standard error of the mean)`.
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn fiber_spec<'a>(fam: &'a RandomFamily, omega: &BaseSample, n: usize, block: usize) -> Result<SweepSpec<'a>> {
    Ok(SweepSpec { fibers: fam.fiber_sequence(omega, n)?, seeds: None, block, additive: None, cap: FIBER_CAP })
}

/// Per-`ω` value `(1/n)·log Σ exp φ_n(ω, x)` over the fiber cylinder
/// points, averaged over the seeds. Singular potentials use the `n`-step
/// fiber cocycle.
pub fn random_pressure(
    fam: &RandomFamily,
    pot: &Potential,
    omega_seeds: &[u64],
    n: usize,
) -> Result<RandomPressureEstimate> {
    assert!(n >= 1 && !omega_seeds.is_empty());
    let per_omega = omega_seeds
        .par_iter()
        .map(|&seed| {
            let w = pot.sweep_weights(fiber_spec(fam, &omega(fam, seed), n, n)?)?;
            Ok(log_sum_exp(&w) / n as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (value, std_error) = mean_and_std_error(&per_omega);
    Ok(RandomPressureEstimate {
        value,
        n,
        eps_sep: 0.5 * fam.branch_gap(),
        omega_samples: per_omega.len(),
        per_omega,
        std_error,
    })
}

/// Random pressure of the zero potential.
pub fn random_entropy(fam: &RandomFamily, omega_seeds: &[u64], n: usize) -> Result<RandomPressureEstimate> {
    random_pressure(fam, &Potential::zero(), omega_seeds, n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomRoots {
    /// Root for `−t·log‖D T_ε(n, ω)‖`.
    pub t: f64,
    /// Root for `−t·log m(D T_ε(n, ω))`.
    pub s: f64,
    /// Spread of the per-`ω` roots of the norm family, as a standard error.
    pub std_error: f64,
    pub n: usize,
}

fn fiber_profiles(fam: &RandomFamily, omega: &BaseSample, n: usize) -> Result<[ProfilePair; 2]> {
    let full = sweep(&fiber_spec(fam, omega, n, n)?)?;
    let half = if n >= 2 { Some(sweep(&fiber_spec(fam, omega, n / 2, n / 2)?)?) } else { None };
    let pair = |kind| ProfilePair {
        full: LogNormProfile::from_rows(n, &full, kind),
        half: half.as_ref().map(|h| LogNormProfile::from_rows(n / 2, h, kind)),
    };
    Ok([pair(SingularKind::Norm), pair(SingularKind::Conorm)])
}

/// Roots of the `ω`-averaged pressures of the two singular potentials, each
/// Richardson-combined with the first `n/2` fibers.
pub fn random_bowen_roots(fam: &RandomFamily, omega_seeds: &[u64], n: usize, tol: f64) -> Result<RandomRoots> {
    assert!(n >= 1 && !omega_seeds.is_empty());
    let profiles =
        omega_seeds.par_iter().map(|&seed| fiber_profiles(fam, &omega(fam, seed), n)).collect::<Result<Vec<_>>>()?;
    let dim = fam.base_map.dim() as f64;
    let k = profiles.len() as f64;
    let profiles = &profiles;
    let averaged = |which: usize| move |t: f64| profiles.iter().map(|p| p[which].pressure(t)).sum::<f64>() / k;
    let t = clamped_root(averaged(0), dim, tol)?;
    let s = clamped_root(averaged(1), dim, tol)?;
    let per_omega =
        profiles.iter().map(|p| clamped_root(|t| p[0].pressure(t), dim, tol)).collect::<Result<Vec<f64>>>()?;
    Ok(RandomRoots { t, s, std_error: mean_and_std_error(&per_omega).1, n })
}

/// `(1/n)·min_x Σ_k log m(D T_ε(θ^k ω))` over the fiber cylinder points.
pub fn expansivity_min_growth(fam: &RandomFamily, omega: &BaseSample, n: usize) -> Result<f64> {
    let rows = sweep(&fiber_spec(fam, omega, n, 1)?)?;
    Ok(rows.iter().map(|r| r.log_conorm).fold(f64::INFINITY, f64::min) / n as f64)
}

/// `|π_T(F) − π_f(F∘h)|` at depth `n` for one `ω`.
///
/// The fiber side sums over fiber cylinders whose representatives are seeded
/// on `J_ε(θ^{n−1}ω)`; the base side follows the `f`-cylinder points of `J`
/// and evaluates `F` at their images `h(θ^k ω) f^k x`.
pub fn random_conjugacy_pressure_check(conj: &FiberConjugacy<'_>, pot: &Potential, n: usize) -> Result<f64> {
    let fam = conj.family;
    let f = &fam.base_map;
    let m = conj.depth;
    conj.omega.require(n + m + 1)?;

    let mut tail = conj.clone();
    for _ in 1..n {
        tail = tail.shifted()?;
    }
    let seeds = (0..f.branch_count())
        .map(|a| tail.evaluate_word(&Word::new(f, vec![a as u8])?))
        .collect::<Result<Vec<Point>>>()?;
    let spec = SweepSpec {
        fibers: fam.fiber_sequence(&conj.omega, n)?,
        seeds: Some(seeds),
        block: n,
        additive: None,
        cap: FIBER_CAP,
    };
    let fiber_side = log_sum_exp(&pot.sweep_weights(spec)?) / n as f64;

    let mut shifted = vec![conj.clone()];
    for _ in 1..n {
        let next = shifted.last().unwrap().shifted()?;
        shifted.push(next);
    }
    let base_weights = admissible_words(f, n)
        .par_iter()
        .map(|w| {
            let long = w.pad_last(n + m);
            let mut birkhoff = 0.0;
            let mut prod = LogProduct::new(f.dim());
            for (k, h) in shifted.iter().enumerate() {
                let code = Word::new(f, long.symbols()[k..].to_vec())?;
                let y = h.evaluate_word(&code)?;
                let fiber = conj.fiber(k)?;
                match pot {
                    Potential::Additive { func, .. } => birkhoff += func(fiber, y),
                    _ => prod.push_left(&fiber.branch_derivative(code.symbols()[0] as usize, y)),
                }
            }
            match pot {
                Potential::Additive { .. } => Ok(birkhoff),
                Potential::SingularUpper { t } => Ok(-t * prod.log_norms()?.0),
                Potential::SingularLower { t } => Ok(-t * prod.log_norms()?.1),
                Potential::PulledBackSingular { .. } => {
                    Err(LabError::BadSpec("pulled-back potentials are not defined on fibers".into()))
                }
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let base_side = log_sum_exp(&base_weights) / n as f64;
    Ok((fiber_side - base_side).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MapSpec;
    use crate::random::build_conjugacy;

    fn family(spec: &str, eps: f64) -> RandomFamily {
        RandomFamily::new(MapSpec::parse(spec).unwrap(), eps, 2).unwrap()
    }

    #[test]
    fn unperturbed_entropy_is_exact() {
        let fam = family("cookie_cutter r1=3 r2=3", 0.0);
        let e = random_entropy(&fam, &[0, 1, 2, 3], 8).unwrap();
        assert!((e.value - 2f64.ln()).abs() < 1e-12);
        assert_eq!(e.std_error, 0.0);
        let e = random_entropy(&family("doubling", 0.05), &[0, 1, 2], 8).unwrap();
        assert!((e.value - 2f64.ln()).abs() < 1e-9);
        for eps in [0.2, 0.1, 0.05] {
            let e = random_entropy(&family("cookie_cutter r1=3 r2=3", eps), &[4, 5], 6).unwrap();
            assert!((e.value - 2f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_fibers_match_closed_form() {
        let fam = family("cookie_cutter r1=3 r2=3", 0.1);
        let n = 8;
        let p = random_pressure(&fam, &Potential::neg_log_jacobian(1.0), &[11], n).unwrap();
        let w = omega(&fam, 11);
        let oracle: f64 = (0..n as i64)
            .map(|k| {
                let a = if w.symbol_at(k).unwrap() == 0 { -1.0 } else { 1.0 };
                let r: f64 = 3.0 * (1.0 + 0.1 * a);
                (2.0 / r).ln()
            })
            .sum::<f64>()
            / n as f64;
        assert!((p.value - oracle).abs() < 1e-12, "{} vs {oracle}", p.value);
    }

    #[test]
    fn unperturbed_roots() {
        let fam = family("cookie_cutter r1=3 r2=3", 0.0);
        let r = random_bowen_roots(&fam, &[0, 1], 8, 1e-9).unwrap();
        let t0 = 2f64.ln() / 3f64.ln();
        assert!((r.t - t0).abs() < 1e-8 && (r.s - t0).abs() < 1e-8);
        let r = random_bowen_roots(&family("doubling", 0.05), &[0, 1], 8, 1e-9).unwrap();
        assert!((r.t - 1.0).abs() < 1e-6 && r.t <= r.s + 1e-12);
    }

    #[test]
    fn min_growth_examples() {
        let w = super::super::sample_base(0, 8, 2);
        let g = expansivity_min_growth(&family("doubling", 0.0), &w, 8).unwrap();
        assert!((g - 2f64.ln()).abs() < 1e-12);
        let g = expansivity_min_growth(&family("cookie_cutter r1=2 r2=4", 0.0), &w, 8).unwrap();
        assert!((g - 2f64.ln()).abs() < 1e-12);
        // every fiber of the first 8 is the contracted one only if all symbols are 0
        let fam = family("cookie_cutter r1=3 r2=3", 0.1);
        let w = omega(&fam, 0);
        let g = expansivity_min_growth(&fam, &w, 1).unwrap();
        let oracle = if w.symbol_at(0).unwrap() == 0 { 2.7f64.ln() } else { 3.3f64.ln() };
        assert!((g - oracle).abs() < 1e-12);
    }

    #[test]
    fn conjugacy_pressure_examples() {
        for eps in [0.0, 0.1] {
            let fam = family("cookie_cutter r1=3 r2=3", eps);
            let w = omega(&fam, 3);
            let conj = build_conjugacy(&fam, &w, 16).unwrap();
            assert_eq!(random_conjugacy_pressure_check(&conj, &Potential::zero(), 5).unwrap(), 0.0);
            let d = random_conjugacy_pressure_check(&conj, &Potential::neg_log_jacobian(1.0), 5).unwrap();
            assert!(d <= 1e-12, "{d}");
        }
        let fam = family("doubling", 0.05);
        let conj = build_conjugacy(&fam, &omega(&fam, 1), 16).unwrap();
        let d = random_conjugacy_pressure_check(&conj, &Potential::sine(0.3, 1.0), 5).unwrap();
        assert!(d <= 1e-12, "{d}");
    }
}
