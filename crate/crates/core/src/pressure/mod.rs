//! Topological pressure by cylinder sums.
//!
//! For a Markov expanding map, distinct `n`-cylinder representatives are
//! `(n, ε)`-separated whenever `ε` is below the branch gap, so the supremum
//! over separated sets is taken at the canonical cylinder family:
//!
//! ```text
//! P_n(φ) = (1/n) · log Σ_{|w| = n} exp φ_n(x_w)
//! ```
//!
//! Estimates at two depths are combined by Richardson extrapolation under
//! the model `P_n = P + c/n`; the raw per-depth values are always kept.
//! A transfer-matrix spectral radius gives an independent cross-check.

mod potential;

use rayon::prelude::*;

pub use potential::{PointMap, Potential, PotentialFn};

use crate::dynamics::{count_admissible_words, CylinderSet, ExpandingMap, Point, Word};
use crate::error::{LabError, Result};
use crate::linalg::{Derivative, LogProduct, Mat2};

/// Budgets shared by the pressure routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureConfig {
    /// Largest number of cylinders enumerated at one depth.
    pub max_cylinders: usize,
    /// Largest word length tried by [`pressure_limit`].
    pub max_depth: usize,
    /// Convergence tolerance used where a routine needs a full pressure value.
    pub tol: f64,
    /// Total word length shared by every iterate in [`pressure_subadditive`].
    pub word_budget: usize,
}

impl Default for PressureConfig {
    fn default() -> Self {
        PressureConfig { max_cylinders: 1 << 20, max_depth: 64, tol: 1e-6, word_budget: 16 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureEstimate {
    /// Pressure in nats per iterate.
    pub value: f64,
    pub depth: usize,
    pub separation: f64,
    /// Raw `(n, P_n)` values (for iterated pressures, `(k, P^{(k)})`).
    pub per_depth_values: Vec<(usize, f64)>,
    pub extrapolated: bool,
    /// Last successive difference of the reported values.
    pub residual: f64,
    /// Set when singular potentials were used on a map whose norm and conorm
    /// families disagree on the sampled cylinders.
    pub advisory: bool,
}

impl PressureEstimate {
    pub const CSV_HEADER: &'static str = "map_id,potential_desc,n,eps,value,residual";

    pub fn to_csv_row(&self, map_id: &str, potential_desc: &str) -> String {
        format!(
            "{},{},{},{},{},{}",
            csv_field(map_id),
            csv_field(potential_desc),
            self.depth,
            self.separation,
            self.value,
            self.residual
        )
    }
}

/// Quotes a CSV field when it contains separators.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `log Σ exp vᵢ` with a fixed-order pairwise reduction, so results do not
/// depend on how the terms were produced.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let terms: Vec<f64> = values.par_iter().with_min_len(4096).map(|v| (v - max).exp()).collect();
    max + pairwise_sum(&terms).ln()
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        v.iter().sum()
    } else {
        let (a, b) = v.split_at(v.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

fn check_eps(map: &ExpandingMap, eps: f64) -> Result<()> {
    if !(eps > 0.0) || eps >= map.branch_gap() {
        return Err(LabError::EpsilonTooLarge { eps, gap: map.branch_gap() });
    }
    Ok(())
}

/// One cylinder representative per admissible `n`-word; the set is
/// `(n, ε)`-separated for every `ε` below the branch gap.
pub fn separated_set(map: &ExpandingMap, n: usize, eps: f64) -> Result<Vec<Point>> {
    check_eps(map, eps)?;
    Ok(CylinderSet::enumerate(map, n, usize::MAX)?.points)
}

/// `(1/n)·log Σ_{x∈E} exp φ_n(x)` over the cylinder separated set `E`.
///
/// Singular potentials are accepted and evaluated as their `n`-step member.
pub fn pressure_additive(map: &ExpandingMap, pot: &Potential, n: usize, eps: f64) -> Result<PressureEstimate> {
    check_eps(map, eps)?;
    let value = raw_pressure(map, pot, n, n, usize::MAX)?;
    Ok(PressureEstimate {
        value,
        depth: n,
        separation: eps,
        per_depth_values: vec![(n, value)],
        extrapolated: false,
        residual: 0.0,
        advisory: false,
    })
}

/// Separated-set pressure at depth `n`, Richardson-combined with depth
/// `n/2` to cancel the `c/n` term of the cylinder count. `residual` is the
/// size of the correction.
pub fn pressure_at_depth(map: &ExpandingMap, pot: &Potential, n: usize, eps: f64) -> Result<PressureEstimate> {
    check_eps(map, eps)?;
    let full = raw_pressure(map, pot, n, n, usize::MAX)?;
    if n < 2 {
        return pressure_additive(map, pot, n, eps);
    }
    let half = raw_pressure(map, pot, n / 2, n / 2, usize::MAX)?;
    let value = 2.0 * full - half;
    Ok(PressureEstimate {
        value,
        depth: n,
        separation: eps,
        per_depth_values: vec![(n / 2, half), (n, full)],
        extrapolated: true,
        residual: (value - full).abs(),
        advisory: false,
    })
}

/// Raw cylinder pressure at word length `n` with cocycle block `block`.
pub fn raw_pressure(map: &ExpandingMap, pot: &Potential, n: usize, block: usize, cap: usize) -> Result<f64> {
    let w = pot.cylinder_weights(map, n, block, cap)?;
    Ok(log_sum_exp(&w) / n as f64)
}

/// Doubles the depth until consecutive extrapolated values differ by less
/// than `tol`. The separation is fixed at half the branch gap.
pub fn pressure_limit(map: &ExpandingMap, pot: &Potential, tol: f64, cfg: &PressureConfig) -> Result<PressureEstimate> {
    assert!(tol > 0.0, "tolerance must be positive");
    let mut raw: Vec<(usize, f64)> = Vec::new();
    let mut extrap: Vec<f64> = Vec::new();
    let mut n = 1;
    loop {
        let p = raw_pressure(map, pot, n, n, cfg.max_cylinders)?;
        let e = match raw.last() {
            Some(&(_, prev)) => 2.0 * p - prev,
            None => p,
        };
        raw.push((n, p));
        extrap.push(e);
        let residual = match extrap.len() {
            0 | 1 => f64::INFINITY,
            k => (extrap[k - 1] - extrap[k - 2]).abs(),
        };
        let estimate = PressureEstimate {
            value: e,
            depth: n,
            separation: map.separation_eps(),
            per_depth_values: raw.clone(),
            extrapolated: true,
            residual,
            advisory: false,
        };
        if residual < tol {
            return Ok(estimate);
        }
        let next = 2 * n;
        if next > cfg.max_depth || count_admissible_words(map, next) > cfg.max_cylinders {
            return Err(LabError::NoConvergence { partial: Box::new(estimate) });
        }
        n = next;
    }
}

/// Sub-additive pressure as the limit of `(1/k)·P_{f^k}(φ_k)`.
///
/// For every `k` in `depths` the iterate `f^k` is evaluated on words of total
/// length `cfg.word_budget` (so every `k` costs the same) and on half that
/// length when it is still a multiple of `k`; the two are Richardson
/// combined. `per_depth_values` holds `(k, value)`.
pub fn pressure_subadditive(
    map: &ExpandingMap,
    pot: &Potential,
    depths: &[usize],
    tol: f64,
    cfg: &PressureConfig,
) -> Result<PressureEstimate> {
    assert!(!depths.is_empty(), "need at least one iterate");
    assert!(depths.windows(2).all(|w| w[0] < w[1]), "depths must increase");
    let budget = cfg.word_budget;
    let mut per_depth = Vec::with_capacity(depths.len());
    for &k in depths {
        if k == 0 || !budget.is_multiple_of(k) {
            return Err(LabError::BadSpec(format!("iterate {k} does not divide word budget {budget}")));
        }
        let full = raw_pressure(map, pot, budget, k, cfg.max_cylinders)?;
        let half = budget / 2;
        let value = if half >= k && half.is_multiple_of(k) {
            2.0 * full - raw_pressure(map, pot, half, k, cfg.max_cylinders)?
        } else {
            full
        };
        per_depth.push((k, value));
    }
    let value = per_depth.last().unwrap().1;
    let residual = if per_depth.len() >= 2 { (value - per_depth[per_depth.len() - 2].1).abs() } else { 0.0 };
    let advisory = pot.is_singular() && map.dim() == 2 && !conformal_on_cylinders(map)?;
    let estimate = PressureEstimate {
        value,
        depth: *depths.last().unwrap(),
        separation: map.separation_eps(),
        per_depth_values: per_depth,
        extrapolated: true,
        residual,
        advisory,
    };
    if residual >= tol {
        return Err(LabError::NoConvergence { partial: Box::new(estimate) });
    }
    Ok(estimate)
}

fn conformal_on_cylinders(map: &ExpandingMap) -> Result<bool> {
    let set = CylinderSet::enumerate(map, 1, usize::MAX)?;
    for (w, p) in set.words.iter().zip(&set.points) {
        let (n, m) = map.branch_derivative(w.symbols()[0] as usize, *p).singular_norms()?;
        if (n.ln() - m.ln()).abs() > 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `(1/n)·log ρ(M)` for the matrix on `n`-cylinders with entries
/// `exp φ_n(x_w)·[last(w) → first(w′)]`.
///
/// `M = X·Y` factors through the alphabet, so `ρ(M) = ρ(Y·X)` is computed
/// on a `k × k` matrix.
pub fn transfer_pressure(map: &ExpandingMap, pot: &Potential, n: usize, cap: usize) -> Result<f64> {
    assert!(n >= 1);
    let count = count_admissible_words(map, n);
    if count > cap {
        return Err(LabError::MatrixTooLarge { cylinders: count, cap });
    }
    let set = CylinderSet::enumerate(map, n, cap)?;
    let weights = pot.cylinder_weights(map, n, n, cap)?;
    let shift = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let k = map.branch_count();
    let mut z = vec![vec![0.0; k]; k];
    for (w, wt) in set.words.iter().zip(&weights) {
        let s = w.symbols();
        z[s[0] as usize][s[s.len() - 1] as usize] += (wt - shift).exp();
    }
    // (Y X)[a][b] = Σ_c A[a][c] · Z[c][b]
    let mut yx = vec![vec![0.0; k]; k];
    for (a, row) in yx.iter_mut().enumerate() {
        for (c, zc) in z.iter().enumerate() {
            if map.allowed(a, c) {
                for (y, zb) in row.iter_mut().zip(zc) {
                    *y += zb;
                }
            }
        }
    }
    let rho = spectral_radius(&yx);
    Ok((rho.ln() + shift) / n as f64)
}

/// Perron root of a non-negative irreducible matrix by power iteration on
/// `K + δI` (aperiodic), stopped when the Collatz–Wielandt bounds meet.
pub fn spectral_radius(k: &[Vec<f64>]) -> f64 {
    let n = k.len();
    let mean = k.iter().flatten().sum::<f64>() / (n * n) as f64;
    let delta = if mean > 0.0 { mean } else { 1.0 };
    let mut v = vec![1.0; n];
    let mut estimate = 0.0;
    for _ in 0..100_000 {
        let mut next = vec![0.0; n];
        for i in 0..n {
            next[i] = delta * v[i] + (0..n).map(|j| k[i][j] * v[j]).sum::<f64>();
        }
        let ratios = next.iter().zip(&v).map(|(a, b)| a / b);
        let (lo, hi) = ratios.fold((f64::INFINITY, 0.0_f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
        estimate = 0.5 * (lo + hi) - delta;
        let norm = next.iter().copied().fold(0.0, f64::max);
        v = next.iter().map(|x| x / norm).collect();
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    estimate
}

/// `F_*(μ)` for the periodic-orbit measure of the cyclically admissible word
/// `orbit`: the orbit average for additive potentials, and `−t` times the
/// top (upper family) or bottom (lower family) Lyapunov exponent of the
/// orbit for singular potentials.
pub fn periodic_average(map: &ExpandingMap, pot: &Potential, orbit: &Word) -> Result<f64> {
    orbit_average(map, pot, orbit, &map.periodic_orbit(orbit))
}

/// [`periodic_average`] with the orbit points already computed by
/// [`ExpandingMap::periodic_orbit`].
pub fn orbit_average(map: &ExpandingMap, pot: &Potential, orbit: &Word, points: &[Point]) -> Result<f64> {
    let s = orbit.symbols();
    let p = s.len();
    match pot {
        Potential::Additive { func, .. } => Ok(points.iter().map(|x| func(map, *x)).sum::<f64>() / p as f64),
        Potential::SingularUpper { t } | Potential::SingularLower { t } => {
            let mut prod = LogProduct::new(map.dim());
            for (x, &a) in points.iter().zip(s) {
                prod.push_left(&map.branch_derivative(a as usize, *x));
            }
            let (top, bottom) = match prod.value() {
                Derivative::Scalar(d) => (d.abs().ln(), d.abs().ln()),
                Derivative::Matrix(m) => eigen_log_moduli(&m),
            };
            let exponent = if matches!(pot, Potential::SingularUpper { .. }) { top } else { bottom };
            Ok(-t * exponent / p as f64)
        }
        Potential::PulledBackSingular { .. } => {
            // F∘h along the orbit: fall back to the orbit value of one period
            // repeated, normalized
            let reps = 16;
            let x = points[0];
            Ok(pot.orbit_value(map, x, p * reps)? / (p * reps) as f64)
        }
    }
}

/// `(log|λ_max|, log|λ_min|)` for a real 2×2 matrix.
fn eigen_log_moduli(m: &Mat2) -> (f64, f64) {
    let tr = m.m[0][0] + m.m[1][1];
    let det = m.det();
    let disc = tr * tr / 4.0 - det;
    if disc < 0.0 {
        let r = det.abs().sqrt().ln();
        (r, r)
    } else {
        let s = disc.sqrt();
        let (a, b) = ((tr / 2.0 + s).abs(), (tr / 2.0 - s).abs());
        (a.max(b).ln(), a.min(b).ln())
    }
}

/// Pressure (additive or singular) by [`pressure_limit`], with the
/// partial estimate accepted when the depth cap is reached.
pub fn pressure_value(map: &ExpandingMap, pot: &Potential, cfg: &PressureConfig) -> Result<PressureEstimate> {
    match pressure_limit(map, pot, cfg.tol, cfg) {
        Ok(e) => Ok(e),
        Err(LabError::NoConvergence { partial }) => Ok(*partial),
        Err(e) => Err(e),
    }
}

/// `π_f(F) − F_*(μ_orbit)`; the variational principle makes this ≥ 0 up to
/// the pressure residual.
pub fn variational_gap(map: &ExpandingMap, pot: &Potential, orbit: &Word, cfg: &PressureConfig) -> Result<f64> {
    if !orbit.is_cyclically_admissible(map) {
        return Err(LabError::NonMarkov(format!("word {orbit} does not close up")));
    }
    let pressure = pressure_value(map, pot, cfg)?.value;
    Ok(pressure - periodic_average(map, pot, orbit)?)
}

/// Largest `d(φ(f₁x), f₂(φx))` over the `depth`-cylinder representatives of `map1`.
pub fn equivariance_residual(map1: &ExpandingMap, map2: &ExpandingMap, conj: &PointMap, depth: usize) -> Result<f64> {
    let set = CylinderSet::enumerate(map1, depth, 1 << 16)?;
    let mut worst: f64 = 0.0;
    for p in &set.points {
        let (_, fx) = map1.apply(*p).ok_or(LabError::EscapedRepeller { step: 0 })?;
        let (_, gy) = map2.apply(conj(*p)).ok_or(LabError::EscapedRepeller { step: 0 })?;
        worst = worst.max(map2.distance(conj(fx), gy));
    }
    Ok(worst)
}

/// Residual tolerance for accepting a semi-conjugacy.
pub const EQUIVARIANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugacyCheck {
    /// `π_{f₂}(F) − π_{f₁}(F∘φ)`.
    pub difference: f64,
    /// Sum of the two extrapolation residuals.
    pub bound: f64,
}

/// `π_{f₂}(F) − π_{f₁}(F∘φ)` for a semi-conjugacy `φ ∘ f₁ = f₂ ∘ φ`.
/// Non-positive for factors, zero for conjugacies, in both cases up to `bound`.
pub fn conjugate_pressure_check(
    map1: &ExpandingMap,
    map2: &ExpandingMap,
    conj: PointMap,
    pot: &Potential,
    cfg: &PressureConfig,
) -> Result<ConjugacyCheck> {
    let residual = equivariance_residual(map1, map2, &conj, 4)?;
    if residual > EQUIVARIANCE_TOL {
        return Err(LabError::NotSemiConjugate { residual, tol: EQUIVARIANCE_TOL });
    }
    let p2 = pressure_value(map2, pot, cfg)?;
    let p1 = pressure_value(map1, &pot.pull_back(map2, conj), cfg)?;
    Ok(ConjugacyCheck { difference: p2.value - p1.value, bound: p1.residual + p2.residual })
}
