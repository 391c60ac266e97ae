//! Roots of the Bowen equation `P(−tΨ) = 0` and dimension brackets.

use crate::dynamics::{sweep, ExpandingMap, SweepRow, SweepSpec};
use crate::error::{LabError, Result};
use crate::pressure::{csv_field, log_sum_exp};

/// Bisection for the zero of a decreasing function on `bracket`.
///
/// Stops once the bracket is no wider than `tol` and returns its midpoint.
pub fn bowen_root<F>(mut pressure_fn: F, bracket: (f64, f64), tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    assert!(tol > 0.0, "tolerance must be positive");
    let (mut lo, mut hi) = bracket;
    let (f_lo, f_hi) = (pressure_fn(lo), pressure_fn(hi));
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(LabError::NoSignChange { lo, hi, f_lo, f_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f = pressure_fn(mid);
        if f == 0.0 {
            return Ok(mid);
        }
        if f > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Root on `(0, dim]` with the degenerate ends handled: `0` when the
/// entropy is not positive, `dim` when the pressure is still non-negative
/// there.
pub fn clamped_root<F>(mut pressure_fn: F, dim: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if pressure_fn(0.0) <= 0.0 {
        return Ok(0.0);
    }
    if pressure_fn(dim) >= 0.0 {
        return Ok(dim);
    }
    bowen_root(pressure_fn, (0.0, dim), tol)
}

/// Which singular value enters the potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularKind {
    /// `−t·log‖·‖`
    Norm,
    /// `−t·log m(·)`
    Conorm,
}

/// Per-cylinder log singular values of the depth-`n` cocycle. The pressure
/// of `−t·log σ` is then a cheap function of `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogNormProfile {
    pub depth: usize,
    pub values: Vec<f64>,
}

impl LogNormProfile {
    pub fn from_rows(depth: usize, rows: &[SweepRow], kind: SingularKind) -> Self {
        let values = rows
            .iter()
            .map(|r| match kind {
                SingularKind::Norm => r.log_norm,
                SingularKind::Conorm => r.log_conorm,
            })
            .collect();
        LogNormProfile { depth, values }
    }

    /// `(1/n)·log Σ_w σ_w^{−t}`.
    pub fn pressure(&self, t: f64) -> f64 {
        let scaled: Vec<f64> = self.values.iter().map(|v| -t * v).collect();
        log_sum_exp(&scaled) / self.depth as f64
    }
}

/// Richardson combination of a depth-`n` and a depth-`n/2` profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePair {
    pub full: LogNormProfile,
    pub half: Option<LogNormProfile>,
}

impl ProfilePair {
    pub fn pressure(&self, t: f64) -> f64 {
        match &self.half {
            Some(h) => 2.0 * self.full.pressure(t) - h.pressure(t),
            None => self.full.pressure(t),
        }
    }
}

/// Norm and conorm profiles at word length `n`, each paired with length `n/2`.
pub fn profile_pairs(map: &ExpandingMap, n: usize, cap: usize) -> Result<(ProfilePair, ProfilePair)> {
    let full = sweep(&SweepSpec::deterministic(map, n, cap))?;
    let half = if n >= 2 { Some(sweep(&SweepSpec::deterministic(map, n / 2, cap))?) } else { None };
    let pair = |kind| ProfilePair {
        full: LogNormProfile::from_rows(n, &full, kind),
        half: half.as_ref().map(|h| LogNormProfile::from_rows(n / 2, h, kind)),
    };
    Ok((pair(SingularKind::Norm), pair(SingularKind::Conorm)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionReport {
    /// Root for `−t·log‖·‖`.
    pub t_lower: f64,
    /// Root for `−t·log m(·)`.
    pub t_upper: f64,
    /// Mean of the two roots when they agree within `2·tolerance`.
    pub t_root: Option<f64>,
    pub depth: usize,
    pub bracket_width: f64,
    pub tolerance: f64,
}

impl DimensionReport {
    pub const CSV_HEADER: &'static str = "map_id,t_lower,t_upper,t_root,depth,tol";

    pub fn to_csv_row(&self, map_id: &str) -> String {
        format!(
            "{},{},{},{},{},{}",
            csv_field(map_id),
            self.t_lower,
            self.t_upper,
            self.t_root.map(|t| t.to_string()).unwrap_or_default(),
            self.depth,
            self.tolerance
        )
    }
}

/// Largest cylinder count a dimension report will enumerate.
pub const DIMENSION_CAP: usize = 1 << 22;

/// Dimension bracket from the two singular-value pressures at word length
/// `depth_budget`, extrapolated against half that length.
pub fn dimension_report(map: &ExpandingMap, depth_budget: usize, tol: f64) -> Result<DimensionReport> {
    assert!(depth_budget >= 1);
    let (norm, conorm) = profile_pairs(map, depth_budget, DIMENSION_CAP)?;
    dimension_from_profiles(map.dim(), &norm, &conorm, tol)
}

/// [`dimension_report`] from precomputed profiles.
pub fn dimension_from_profiles(
    dim: usize,
    norm: &ProfilePair,
    conorm: &ProfilePair,
    tol: f64,
) -> Result<DimensionReport> {
    let dim = dim as f64;
    let t_lower = clamped_root(|t| norm.pressure(t), dim, tol)?;
    let t_upper = clamped_root(|t| conorm.pressure(t), dim, tol)?;
    let bracket_width = t_upper - t_lower;
    let t_root = (bracket_width.abs() <= 2.0 * tol).then_some(0.5 * (t_lower + t_upper));
    Ok(DimensionReport { t_lower, t_upper, t_root, depth: norm.full.depth, bracket_width, tolerance: tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::build_markov_map;

    /// Independent scalar bisection for `Σ r_i^{−t} = 1`.
    fn moran(slopes: &[f64]) -> f64 {
        let f = |t: f64| slopes.iter().map(|r| r.powf(-t)).sum::<f64>() - 1.0;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        lo
    }

    #[test]
    fn linear_root() {
        let l2 = 2f64.ln();
        let t = bowen_root(|t| l2 - t * l2, (0.0, 2.0), 1e-6).unwrap();
        assert!((t - 1.0).abs() < 1e-6);
        assert!(matches!(bowen_root(|t| 1.0 + t, (0.0, 2.0), 1e-6), Err(LabError::NoSignChange { .. })));
    }

    #[test]
    fn bisection_evaluation_count() {
        let mut calls = 0;
        let tol = 1e-6;
        bowen_root(
            |t| {
                calls += 1;
                0.3 - t
            },
            (0.0, 1.0),
            tol,
        )
        .unwrap();
        assert!(calls - 2 <= (1.0 / tol).log2().ceil() as usize);
    }

    #[test]
    fn cookie_cutter_dimensions() {
        let m = build_markov_map("cookie_cutter r1=3 r2=3").unwrap();
        let r = dimension_report(&m, 12, 1e-6).unwrap();
        assert!((r.t_root.unwrap() - 2f64.ln() / 3f64.ln()).abs() < 1e-3);

        let m = build_markov_map("cookie_cutter r1=2 r2=4").unwrap();
        let r = dimension_report(&m, 12, 1e-6).unwrap();
        let oracle = moran(&[2.0, 4.0]);
        assert!((oracle - 0.69424).abs() < 1e-5);
        assert!((r.t_root.unwrap() - oracle).abs() < 2e-3);
    }

    #[test]
    fn full_and_conformal_maps() {
        let r = dimension_report(&build_markov_map("doubling").unwrap(), 8, 1e-6).unwrap();
        assert_eq!((r.t_lower, r.t_upper), (1.0, 1.0));
        let r = dimension_report(&build_markov_map("toral scale=3 turns=1").unwrap(), 4, 1e-6).unwrap();
        assert_eq!(r.t_root, Some(2.0));
    }

    #[test]
    fn non_conformal_bracket() {
        let m = build_markov_map("toral m11=2 m12=0 m21=0 m22=4").unwrap();
        let r = dimension_report(&m, 4, 1e-6).unwrap();
        assert!((r.t_lower - 1.5).abs() < 1e-6);
        assert_eq!(r.t_upper, 2.0);
        assert!(r.t_root.is_none());
        assert!((r.bracket_width - 0.5).abs() < 1e-6);
    }

    #[test]
    fn nonlinear_roots_are_ordered_and_refine() {
        let m = build_markov_map("circle n=3 a=0.1").unwrap();
        let coarse = dimension_report(&m, 4, 1e-8).unwrap();
        let fine = dimension_report(&m, 8, 1e-8).unwrap();
        assert!(coarse.t_lower <= coarse.t_upper && fine.t_lower <= fine.t_upper);
        assert!(fine.bracket_width <= coarse.bracket_width + 1e-12);
        // circle endomorphism: the repeller is the whole circle
        assert!((fine.t_root.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn csv_row_leaves_unset_root_empty() {
        let r =
            DimensionReport { t_lower: 1.5, t_upper: 2.0, t_root: None, depth: 4, bracket_width: 0.5, tolerance: 1e-6 };
        assert_eq!(r.to_csv_row("toral"), "toral,1.5,2,,4,0.000001");
    }
}
