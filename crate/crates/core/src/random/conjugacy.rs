//! Fiber conjugacies `h(ω)` with `T_ε(ω) ∘ h(ω) = h(θω) ∘ f` on the repeller.

use crate::dynamics::{admissible_words, ExpandingMap, Point, Word};
use crate::error::Result;

use super::{BaseSample, RandomFamily};

/// `h(ω)` truncated at depth `m`: a point of `J` with `f`-itinerary
/// `a₀a₁…` goes to the point whose fiber itinerary is `a₀…a_m`, found by
/// inverse branches of `T(θ^m ω), …, T(ω)` from a seed.
#[derive(Debug, Clone)]
pub struct FiberConjugacy<'a> {
    pub family: &'a RandomFamily,
    pub omega: BaseSample,
    pub depth: usize,
    /// `γ^m · diam`.
    pub error_bound: f64,
}

/// Checks the horizon for a depth-`depth` conjugacy at `ω` and its shift.
pub fn build_conjugacy<'a>(fam: &'a RandomFamily, omega: &BaseSample, depth: usize) -> Result<FiberConjugacy<'a>> {
    assert!(depth >= 1);
    omega.require(depth + 2)?;
    let error_bound = fam.gamma().powi(depth as i32) * fam.base_map.domain().diam();
    Ok(FiberConjugacy { family: fam, omega: omega.clone(), depth, error_bound })
}

impl<'a> FiberConjugacy<'a> {
    /// The conjugacy at `θω`.
    pub fn shifted(&self) -> Result<FiberConjugacy<'a>> {
        let omega = self.omega.shift()?;
        omega.require(self.depth + 2)?;
        Ok(FiberConjugacy { omega, ..self.clone() })
    }

    pub fn fiber(&self, k: usize) -> Result<&'a ExpandingMap> {
        Ok(self.family.fiber(self.omega.symbol_at(k as i64)?))
    }

    /// Word extended by its last symbol to the evaluation length `m + 1`.
    pub fn padded(&self, w: &Word) -> Word {
        w.pad_last(self.depth + 1)
    }

    /// Image of the `f`-cylinder point coded by `w` (padded to length `m + 1`):
    /// inverse branches of the fiber maps with the same indices, seeded at
    /// the center of the last fiber's piece.
    pub fn evaluate_word(&self, w: &Word) -> Result<Point> {
        let w = self.padded(w);
        let s = w.symbols();
        let n = s.len();
        let mut p = self.fiber(n - 1)?.center(s[n - 1] as usize);
        for k in (0..n - 1).rev() {
            p = self.fiber(k)?.branch_inverse(s[k] as usize, p);
        }
        Ok(p)
    }

    /// `h(ω)x` for a point of `J`, via its `f`-itinerary.
    pub fn evaluate_point(&self, x: Point) -> Result<Point> {
        let w = self.family.base_map.itinerary(x, self.depth + 1)?;
        self.evaluate_word(&w)
    }

    /// `sup d(T_ε(ω)(h(ω)x), h(θω)(f x))` over the `f`-cylinder points of
    /// depth `n`; bounded by `2·error_bound`.
    pub fn equivariance_residual(&self, n: usize) -> Result<f64> {
        let f = &self.family.base_map;
        let next = self.shifted()?;
        let t0 = self.fiber(0)?;
        let mut worst: f64 = 0.0;
        for w in admissible_words(f, n.min(self.depth + 1)) {
            let w = self.padded(&w);
            let lhs = t0.branch_forward(w.symbols()[0] as usize, self.evaluate_word(&w)?);
            let tail = Word::new(f, w.symbols()[1..].to_vec())?;
            let rhs = next.evaluate_word(&tail)?;
            worst = worst.max(t0.distance(lhs, rhs));
        }
        Ok(worst)
    }

    /// `sup d(h(ω)x, x)` over the `f`-cylinder points of depth `n`.
    pub fn distance_to_identity(&self, n: usize) -> Result<f64> {
        let f = &self.family.base_map;
        let mut worst: f64 = 0.0;
        for w in admissible_words(f, n.min(self.depth + 1)) {
            let w = self.padded(&w);
            worst = worst.max(f.distance(self.evaluate_word(&w)?, f.cylinder_point(&w)));
        }
        Ok(worst)
    }
}

/// `h(ω)` applied to the depth-`n` cylinder points of `J`, in
/// lexicographic word order.
pub fn fiber_repeller(conj: &FiberConjugacy<'_>, n: usize) -> Result<Vec<Point>> {
    admissible_words(&conj.family.base_map, n).iter().map(|w| conj.evaluate_word(w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MapSpec;
    use crate::error::LabError;
    use crate::random::sample_base;

    fn family(spec: &str, eps: f64) -> RandomFamily {
        RandomFamily::new(MapSpec::parse(spec).unwrap(), eps, 2).unwrap()
    }

    #[test]
    fn zero_perturbation_gives_the_identity() {
        let fam = family("cookie_cutter r1=3 r2=3", 0.0);
        let omega = sample_base(1, 30, 2);
        let conj = build_conjugacy(&fam, &omega, 12).unwrap();
        let pts = fiber_repeller(&conj, 4).unwrap();
        for (w, p) in admissible_words(&fam.base_map, 4).iter().zip(&pts) {
            assert_eq!(*p, fam.base_map.cylinder_point(&conj.padded(w)));
        }
        assert_eq!(conj.distance_to_identity(4).unwrap(), 0.0);
    }

    #[test]
    fn fixed_point_goes_to_the_fiber_fixed_point() {
        let fam = family("cookie_cutter r1=3 r2=3", 0.1);
        let omega = sample_base(7, 30, 2);
        let conj = build_conjugacy(&fam, &omega, 20).unwrap();
        // oracle: branch 0 of every fiber is y ↦ r·y, fixing 0
        let y = conj.evaluate_point(Point::Line(0.0)).unwrap();
        assert!(y.x().abs() <= conj.error_bound);
        // branch 1 fixes the right endpoint 1 on every fiber
        let w = Word::new(&fam.base_map, vec![1]).unwrap();
        assert!((conj.evaluate_word(&w).unwrap().x() - 1.0).abs() <= conj.error_bound);
    }

    #[test]
    fn equivariance_within_bound() {
        for (spec, eps) in [("cookie_cutter r1=3 r2=3", 0.05), ("doubling", 0.05), ("circle n=3 a=0.05", 0.1)] {
            let fam = family(spec, eps);
            let omega = sample_base(2, 40, 2);
            let conj = build_conjugacy(&fam, &omega, 20).unwrap();
            let r = conj.equivariance_residual(6).unwrap();
            assert!(r <= 2.0 * fam.gamma().powi(20), "{spec}: {r}");
        }
    }

    #[test]
    fn repeller_points_lie_in_the_fiber_pieces_and_are_invariant() {
        let fam = family("cookie_cutter r1=3 r2=3", 0.1);
        let omega = sample_base(5, 40, 2);
        let conj = build_conjugacy(&fam, &omega, 16).unwrap();
        let pts = fiber_repeller(&conj, 4).unwrap();
        assert_eq!(pts.len(), 16);
        let t0 = conj.fiber(0).unwrap();
        for p in &pts {
            assert!(t0.locate(*p).is_some());
        }
        let next = fiber_repeller(&conj.shifted().unwrap(), 4).unwrap();
        for p in &pts {
            let (_, image) = t0.apply(*p).unwrap();
            let d = next.iter().map(|q| t0.distance(image, *q)).fold(f64::INFINITY, f64::min);
            assert!(d <= 2.0 * conj.error_bound, "{d}");
        }
    }

    #[test]
    fn short_window_is_rejected() {
        let fam = family("doubling", 0.05);
        let omega = sample_base(0, 5, 2);
        assert!(matches!(build_conjugacy(&fam, &omega, 10), Err(LabError::HorizonExceeded { .. })));
    }
}
