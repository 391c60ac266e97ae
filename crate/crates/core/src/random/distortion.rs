//! Empirical check of the local distortion inequality
//!
//! ```text
//! λ(x) − K·d(x,y)^α ≤ d(Tx, Ty)/d(x,y) ≤ η(x) + K·d(x,y)^α
//! ```
//!
//! with `K = max{K₀, diam/r₀, max‖DT‖/r₀^α}` and `K₀` the Hölder constant of
//! `DT` measured on the sampled pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{Domain, ExpandingMap, Point};
use crate::error::Result;

use super::{BaseSample, RandomFamily};

#[derive(Debug, Clone, PartialEq)]
pub struct DistortionCertificate {
    pub symbol: u8,
    pub k0: f64,
    pub k: f64,
    pub r0: f64,
    /// Smallest slack over both inequalities and all pairs.
    pub worst_violation: f64,
    pub pairs: usize,
}

/// Collar radius `r₀`: a quarter of the smallest gap between pieces for
/// maps with gaps, `1/(4·max|T′|)` when the pieces tile the domain.
pub fn collar_radius(map: &ExpandingMap) -> f64 {
    let mut bounds: Vec<(f64, f64)> = map.branches().iter().filter_map(|b| b.piece.bounds_1d()).collect();
    bounds.sort_by(|a, b| a.0.total_cmp(&b.0));
    let gap = bounds.windows(2).map(|w| w[1].0 - w[0].1).fold(f64::INFINITY, f64::min);
    if map.domain() == Domain::Interval && gap > 0.0 && gap.is_finite() {
        0.25 * gap
    } else {
        0.25 / map.max_expansion()
    }
}

/// Certificate for the fiber map at the origin of `ω`.
pub fn distortion_constants(
    fam: &RandomFamily,
    omega: &BaseSample,
    sample_pairs: usize,
) -> Result<DistortionCertificate> {
    let s = omega.symbol_at(0)?;
    Ok(fiber_distortion(fam.fiber(s), s, sample_pairs, omega.seed))
}

/// Certificate for one 1D fiber map from `sample_pairs` pairs inside common
/// pieces; half of them are close pairs at scales down to `10⁻⁴·r₀`.
pub fn fiber_distortion(map: &ExpandingMap, symbol: u8, sample_pairs: usize, seed: u64) -> DistortionCertificate {
    assert!(sample_pairs >= 100, "need at least 100 pairs");
    assert_eq!(map.dim(), 1, "distortion sampling is implemented for 1D fibers");
    let alpha = map.holder_exponent();
    let r0 = collar_radius(map);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (u64::from(symbol) << 32));
    let deriv = |i: usize, x: f64| match map.branch_derivative(i, Point::Line(x)) {
        crate::linalg::Derivative::Scalar(d) => d.abs(),
        crate::linalg::Derivative::Matrix(_) => unreachable!(),
    };

    let mut pairs = Vec::with_capacity(sample_pairs);
    while pairs.len() < sample_pairs {
        let i = rng.gen_range(0..map.branch_count());
        let (lo, hi) = map.branches()[i].piece.bounds_1d().expect("1D piece");
        let x = rng.gen_range(lo..hi);
        let y = if pairs.len() % 2 == 0 {
            let scale = r0 * 10f64.powf(-rng.gen_range(0.0..4.0));
            (x + if rng.gen_bool(0.5) { scale } else { -scale }).clamp(lo, hi)
        } else {
            rng.gen_range(lo..hi)
        };
        if y != x {
            pairs.push((i, x, y));
        }
    }

    let mut k0: f64 = 0.0;
    let mut max_d: f64 = 0.0;
    for &(i, x, y) in &pairs {
        let d = map.distance(Point::Line(x), Point::Line(y));
        k0 = k0.max((deriv(i, x) - deriv(i, y)).abs() / d.powf(alpha));
        max_d = max_d.max(deriv(i, x)).max(deriv(i, y));
    }
    max_d = max_d.max(map.max_expansion());
    let k = k0.max(map.domain().diam() / r0).max(max_d / r0.powf(alpha));

    let mut worst = f64::INFINITY;
    for &(i, x, y) in &pairs {
        let d = map.distance(Point::Line(x), Point::Line(y));
        let image = map.distance(map.branch_forward(i, Point::Line(x)), map.branch_forward(i, Point::Line(y)));
        let ratio = image / d;
        let lam = deriv(i, x);
        worst = worst.min(slack_of(ratio, lam, k * d.powf(alpha)));
    }
    DistortionCertificate { symbol, k0, k, r0, worst_violation: worst, pairs: sample_pairs }
}

/// Smaller slack of the two sides; in 1D `λ = η = |T′|`.
fn slack_of(ratio: f64, lam: f64, kd: f64) -> f64 {
    (ratio - (lam - kd)).min((lam + kd) - ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_markov_map, MapSpec};
    use crate::random::sample_base;

    #[test]
    fn linear_fibers_have_zero_holder_constant() {
        let fam = RandomFamily::new(MapSpec::parse("cookie_cutter r1=3 r2=3").unwrap(), 0.1, 2).unwrap();
        for seed in 0..4 {
            let c = distortion_constants(&fam, &sample_base(seed, 4, 2), 10_000).unwrap();
            assert_eq!(c.k0, 0.0);
            assert!(c.worst_violation >= -1e-10);
        }
    }

    #[test]
    fn sine_bump_constant_below_analytic_bound() {
        let eps = 0.05;
        let fam = RandomFamily::new(MapSpec::parse("doubling").unwrap(), eps, 2).unwrap();
        for s in 0..2u8 {
            let c = fiber_distortion(fam.fiber(s), s, 10_000, 9);
            // |T″| ≤ ε·(2π)² for amplitude ε·a with |a| ≤ 1
            assert!(c.k0 <= eps * std::f64::consts::TAU.powi(2) + 1e-9, "{}", c.k0);
            assert!(c.k0 > 0.0);
            assert!(c.worst_violation >= -1e-10);
        }
    }

    #[test]
    fn collar_radii() {
        let c = build_markov_map("cookie_cutter r1=3 r2=3").unwrap();
        assert!((collar_radius(&c) - 1.0 / 12.0).abs() < 1e-12);
        let d = build_markov_map("doubling").unwrap();
        assert!((collar_radius(&d) - 0.125).abs() < 1e-12);
    }
}
