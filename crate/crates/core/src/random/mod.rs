//! Random perturbations of an expanding map driven by a Bernoulli base.
//!
//! The base `(Ω, θ, P)` is a two-sided i.i.d. shift stored as a finite window
//! around the current position. The fiber map `T_ε(ω)` depends only on the
//! symbol at the origin, so a depth-`m` construction needs exactly `m`
//! shifts of horizon.

mod conjugacy;
mod distortion;
mod fiber_pressure;
mod stability;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{ExpandingMap, Family, MapSpec};
use crate::error::{LabError, Result};

pub use conjugacy::{build_conjugacy, fiber_repeller, FiberConjugacy};
pub use distortion::{collar_radius, distortion_constants, fiber_distortion, DistortionCertificate};
pub use fiber_pressure::{
    expansivity_min_growth, random_bowen_roots, random_conjugacy_pressure_check, random_entropy, random_pressure,
    RandomPressureEstimate, RandomRoots,
};
pub use fiber_pressure::{omega, BASE_HORIZON};
pub use stability::{geometric_schedule, stability_experiment, StabilityConfig, StabilityRow, StabilityTable};

/// A window `ω_{−W}, …, ω_W` of a two-sided Bernoulli sequence together with
/// the current position of `θ^k ω`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseSample {
    pub seed: u64,
    window: Vec<u8>,
    pub alphabet_size: usize,
    /// Offset of the current position from the window center.
    pub shift_origin: i64,
}

/// I.i.d. uniform symbols from ChaCha8 seeded with `seed`.
pub fn sample_base(seed: u64, horizon: usize, alphabet: usize) -> BaseSample {
    assert!(horizon >= 1 && alphabet >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = (0..2 * horizon + 1).map(|_| rng.gen_range(0..alphabet) as u8).collect();
    BaseSample { seed, window, alphabet_size: alphabet, shift_origin: 0 }
}

impl BaseSample {
    /// `W`, so the window holds `2W + 1` symbols.
    pub fn horizon(&self) -> usize {
        self.window.len() / 2
    }

    pub fn window(&self) -> &[u8] {
        &self.window
    }

    /// Symbol of `θ^k ω` at the origin.
    pub fn symbol_at(&self, k: i64) -> Result<u8> {
        let w = self.horizon() as i64;
        let pos = self.shift_origin + k;
        if pos.abs() > w {
            return Err(LabError::HorizonExceeded { needed: pos, horizon: self.horizon() });
        }
        Ok(self.window[(pos + w) as usize])
    }

    /// `θω`.
    pub fn shift(&self) -> Result<BaseSample> {
        self.shift_by(1)
    }

    pub fn shift_by(&self, k: i64) -> Result<BaseSample> {
        self.symbol_at(k)?;
        Ok(BaseSample { shift_origin: self.shift_origin + k, ..self.clone() })
    }

    /// Fails unless positions `0..needed` are inside the window.
    pub fn require(&self, needed: usize) -> Result<()> {
        if needed > 0 {
            self.symbol_at(needed as i64 - 1)?;
        }
        Ok(())
    }
}

/// How a base symbol perturbs the unperturbed map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    /// `x ↦ N x + (a + ε·a(ω))·sin(2πx)` on circle maps.
    SineBump,
    /// Slopes `r_i·(1 + ε·a(ω))` on cookie-cutters.
    SlopeScale,
}

/// `T_ε(ω)` for every base symbol, certified on construction.
#[derive(Debug, Clone)]
pub struct RandomFamily {
    pub base_spec: MapSpec,
    pub base_map: ExpandingMap,
    pub perturbation: Perturbation,
    pub eps: f64,
    pub alphabet: usize,
    /// Bound on the `C¹` distance per unit `ε`.
    pub holder_budget: f64,
    fibers: Vec<ExpandingMap>,
}

impl RandomFamily {
    /// Builds every fiber map and checks the expansion certificate
    /// `min m(DT_ε(ω)) ≥ 1 + c/2` with `c = min m(Df) − 1`.
    pub fn new(base_spec: MapSpec, eps: f64, alphabet: usize) -> Result<RandomFamily> {
        if !(eps >= 0.0) || alphabet == 0 {
            return Err(LabError::BadSpec(format!("eps={eps} alphabet={alphabet}")));
        }
        let base_map = base_spec.build()?;
        let (perturbation, holder_budget) = match &base_spec.family {
            Family::Circle { .. } => (Perturbation::SineBump, std::f64::consts::TAU),
            Family::CookieCutter { slopes } => (Perturbation::SlopeScale, slopes.iter().copied().fold(0.0, f64::max)),
            other => {
                return Err(LabError::BadSpec(format!("no random perturbation for {other:?}")));
            }
        };
        let required = 1.0 + 0.5 * (base_map.min_expansion() - 1.0);
        let mut fibers = Vec::with_capacity(alphabet);
        for s in 0..alphabet {
            let map = if eps == 0.0 {
                base_map.clone()
            } else {
                let a = amplitude(s, alphabet);
                let family = match &base_spec.family {
                    Family::Circle { degree, amp } => Family::Circle { degree: *degree, amp: amp + eps * a },
                    Family::CookieCutter { slopes } => {
                        let slopes: Vec<f64> = slopes.iter().map(|r| r * (1.0 + eps * a)).collect();
                        // shrunken slopes can also make the pieces overlap
                        let min_slope = slopes.iter().copied().fold(f64::INFINITY, f64::min);
                        if min_slope < required {
                            return Err(LabError::PerturbationTooLarge { min_expansion: min_slope, required });
                        }
                        Family::CookieCutter { slopes }
                    }
                    _ => unreachable!(),
                };
                match (MapSpec { family, alpha: base_spec.alpha }).build() {
                    Ok(m) => m,
                    Err(LabError::NonExpanding { min_expansion, .. }) => {
                        return Err(LabError::PerturbationTooLarge { min_expansion, required });
                    }
                    Err(e) => return Err(e),
                }
            };
            if map.min_expansion() < required {
                return Err(LabError::PerturbationTooLarge { min_expansion: map.min_expansion(), required });
            }
            fibers.push(map);
        }
        Ok(RandomFamily { base_spec, base_map, perturbation, eps, alphabet, holder_budget, fibers })
    }

    /// `T_ε` for base symbol `s`.
    pub fn fiber(&self, s: u8) -> &ExpandingMap {
        &self.fibers[s as usize]
    }

    /// Fiber maps of `ω, θω, …, θ^{n−1}ω`.
    pub fn fiber_sequence(&self, omega: &BaseSample, n: usize) -> Result<Vec<&ExpandingMap>> {
        (0..n as i64).map(|k| Ok(self.fiber(omega.symbol_at(k)?))).collect()
    }

    /// Largest inverse-branch contraction over all fibers.
    pub fn gamma(&self) -> f64 {
        self.fibers.iter().map(ExpandingMap::inverse_contraction).fold(0.0, f64::max)
    }

    /// Smallest fiber expansion and the certified threshold.
    pub fn expansion_margin(&self) -> (f64, f64) {
        let min = self.fibers.iter().map(ExpandingMap::min_expansion).fold(f64::INFINITY, f64::min);
        (min, 1.0 + 0.5 * (self.base_map.min_expansion() - 1.0))
    }

    /// Smallest branch gap over the fibers.
    pub fn branch_gap(&self) -> f64 {
        self.fibers.iter().map(ExpandingMap::branch_gap).fold(f64::INFINITY, f64::min)
    }

    /// Default conjugacy depth `⌈log tol / log γ⌉`.
    pub fn default_depth(&self, tol: f64) -> usize {
        ((tol.ln() / self.gamma().ln()).ceil() as usize).max(1)
    }
}

/// `T_ε(ω)` at the origin of `ω`.
pub fn perturbed_map<'a>(fam: &'a RandomFamily, omega: &BaseSample) -> Result<&'a ExpandingMap> {
    Ok(fam.fiber(omega.symbol_at(0)?))
}

/// `a(s)`, evenly spaced in `[−1, 1]`.
pub fn amplitude(symbol: usize, alphabet: usize) -> f64 {
    if alphabet <= 1 {
        1.0
    } else {
        -1.0 + 2.0 * symbol as f64 / (alphabet - 1) as f64
    }
}
