//! Deterministic expanding Markov maps, their symbolic coding and derivative
//! cocycles.
//!
//! A map is a finite list of branches, each an injective expanding map of a
//! domain piece, together with a 0/1 adjacency matrix saying which pieces
//! each branch image covers. The repeller is the maximal invariant set of the
//! branch system; its points are coded by admissible words.

mod branch;
mod cylinders;
mod spec;
mod word;

use std::fmt;

pub use branch::{BranchKind, Homeo, Piece};
pub use cylinders::{sweep, AdditiveFn, CylinderSet, SweepRow, SweepSpec};
pub use spec::{build_markov_map, Family, MapSpec};
pub use word::{admissible_words, count_admissible_words, lyndon_words, periodic_words, Word};

use crate::error::{LabError, Result};
use crate::linalg::{Derivative, LogProduct};

/// A point of the ambient space: the unit interval, the circle or the 2-torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Line(f64),
    Plane([f64; 2]),
}

impl Point {
    /// Coordinate of a 1D point. Panics on 2D points.
    pub fn x(&self) -> f64 {
        match self {
            Point::Line(x) => *x,
            Point::Plane(_) => panic!("expected a 1D point"),
        }
    }

    pub fn coords(&self) -> [f64; 2] {
        match self {
            Point::Line(x) => [*x, 0.0],
            Point::Plane(v) => *v,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Line(x) => write!(f, "{x}"),
            Point::Plane([a, b]) => write!(f, "({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// `[0, 1]` with the Euclidean metric.
    Interval,
    /// `[0, 1)` with endpoints identified, arc-length metric.
    Circle,
    /// The flat 2-torus `[0, 1)²`.
    Torus,
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval | Domain::Circle => 1,
            Domain::Torus => 2,
        }
    }

    pub fn distance(&self, a: Point, b: Point) -> f64 {
        fn circ(d: f64) -> f64 {
            let d = d.abs().rem_euclid(1.0);
            d.min(1.0 - d)
        }
        match (self, a, b) {
            (Domain::Interval, Point::Line(x), Point::Line(y)) => (x - y).abs(),
            (Domain::Circle, Point::Line(x), Point::Line(y)) => circ(x - y),
            (Domain::Torus, Point::Plane(u), Point::Plane(v)) => circ(u[0] - v[0]).hypot(circ(u[1] - v[1])),
            _ => f64::NAN,
        }
    }

    pub fn diam(&self) -> f64 {
        match self {
            Domain::Interval => 1.0,
            Domain::Circle => 0.5,
            Domain::Torus => 0.5 * std::f64::consts::SQRT_2,
        }
    }

    /// Reduces a point into the fundamental domain.
    pub fn wrap(&self, p: Point) -> Point {
        fn w(x: f64) -> f64 {
            let r = x.rem_euclid(1.0);
            if r >= 1.0 {
                0.0
            } else {
                r
            }
        }
        match (self, p) {
            (Domain::Interval, _) => p,
            (Domain::Circle, Point::Line(x)) => Point::Line(w(x)),
            (Domain::Torus, Point::Plane(v)) => Point::Plane([w(v[0]), w(v[1])]),
            _ => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub piece: Piece,
    pub kind: BranchKind,
}

/// `D_x f^n` along an orbit segment, with its log singular values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CocycleProduct {
    pub base_point: Point,
    pub length: usize,
    /// The product itself; may overflow to infinity for very long segments,
    /// the log fields never do.
    pub product: Derivative,
    pub log_norm: f64,
    pub log_conorm: f64,
}

/// `(‖A‖, m(A))` of a cocycle product.
pub fn singular_norms(c: &CocycleProduct) -> Result<(f64, f64)> {
    c.product.singular_norms()
}

/// A piecewise expanding Markov map.
#[derive(Debug, Clone)]
pub struct ExpandingMap {
    id: String,
    domain: Domain,
    branches: Vec<Branch>,
    adjacency: Vec<Vec<bool>>,
    holder_exponent: f64,
    min_expansion: f64,
    max_expansion: f64,
    branch_gap: f64,
}

const EXPANSION_SAMPLES: usize = 257;

impl ExpandingMap {
    /// Validates and assembles a map. Fails with `NonExpanding` if any branch
    /// has minimal expansion ≤ 1 on its sampled piece, and with `NonMarkov`
    /// if pieces overlap, images miss the pieces the adjacency promises, or
    /// the adjacency is reducible.
    pub fn new(
        id: impl Into<String>,
        domain: Domain,
        branches: Vec<Branch>,
        adjacency: Vec<Vec<bool>>,
        holder_exponent: f64,
    ) -> Result<Self> {
        let k = branches.len();
        if k == 0 || k > u8::MAX as usize {
            return Err(LabError::BadSpec(format!("unsupported branch count {k}")));
        }
        if adjacency.len() != k || adjacency.iter().any(|r| r.len() != k) {
            return Err(LabError::NonMarkov("adjacency shape does not match branches".into()));
        }
        if !(holder_exponent > 0.0 && holder_exponent <= 1.0) {
            return Err(LabError::BadSpec(format!("Hölder exponent {holder_exponent} not in (0,1]")));
        }
        let mut map = ExpandingMap {
            id: id.into(),
            domain,
            branches,
            adjacency,
            holder_exponent,
            min_expansion: f64::INFINITY,
            max_expansion: 0.0,
            branch_gap: 0.0,
        };
        map.check_expansion()?;
        map.check_markov()?;
        map.check_irreducible()?;
        map.branch_gap = map.compute_branch_gap();
        Ok(map)
    }

    fn check_expansion(&mut self) -> Result<()> {
        for (i, b) in self.branches.iter().enumerate() {
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for p in b.piece.samples(EXPANSION_SAMPLES) {
                let (n, m) = b.kind.derivative(p).singular_norms()?;
                lo = lo.min(m);
                hi = hi.max(n);
            }
            if !(lo > 1.0) {
                return Err(LabError::NonExpanding { branch: i, min_expansion: lo });
            }
            self.min_expansion = self.min_expansion.min(lo);
            self.max_expansion = self.max_expansion.max(hi);
        }
        Ok(())
    }

    fn check_markov(&self) -> Result<()> {
        const TOL: f64 = 1e-9;
        if self.domain.dim() == 1 {
            let mut bounds: Vec<(f64, f64)> = self.branches.iter().filter_map(|b| b.piece.bounds_1d()).collect();
            bounds.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in bounds.windows(2) {
                if w[0].1 > w[1].0 + TOL {
                    return Err(LabError::NonMarkov(format!(
                        "pieces [{}, {}] and [{}, {}] overlap",
                        w[0].0, w[0].1, w[1].0, w[1].1
                    )));
                }
            }
            if bounds.first().is_some_and(|b| b.0 < -TOL) || bounds.last().is_some_and(|b| b.1 > 1.0 + TOL) {
                return Err(LabError::NonMarkov("pieces leave [0, 1]".into()));
            }
            for (i, b) in self.branches.iter().enumerate() {
                let (lo, hi) = b.piece.bounds_1d().unwrap();
                let a = b.kind.forward(Point::Line(lo)).x();
                let z = b.kind.forward(Point::Line(hi)).x();
                if !(z > a) {
                    return Err(LabError::NonMarkov(format!("branch {i} is not increasing")));
                }
                for (j, other) in self.branches.iter().enumerate() {
                    let (plo, phi) = other.piece.bounds_1d().unwrap();
                    let covered = a <= plo + TOL && z >= phi - TOL;
                    let disjoint = z <= plo + TOL || a >= phi - TOL;
                    match (self.adjacency[i][j], covered, disjoint) {
                        (true, true, _) | (false, _, true) => {}
                        _ => {
                            return Err(LabError::NonMarkov(format!(
                                "image [{a}, {z}] of branch {i} does not match adjacency for piece {j}"
                            )))
                        }
                    }
                }
            }
        } else {
            // toral branches: every adjacent piece center must pull back into
            // the branch piece and push forward onto itself
            for (i, b) in self.branches.iter().enumerate() {
                for (j, other) in self.branches.iter().enumerate() {
                    if !self.adjacency[i][j] {
                        continue;
                    }
                    let c = other.piece.center();
                    let pre = b.kind.inverse(c, &b.piece);
                    if !b.piece.contains(pre) {
                        return Err(LabError::NonMarkov(format!(
                            "inverse branch {i} maps center of piece {j} outside its piece"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_irreducible(&self) -> Result<()> {
        let k = self.branches.len();
        for start in 0..k {
            let mut seen = vec![false; k];
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                for (j, s) in seen.iter_mut().enumerate() {
                    if self.adjacency[i][j] && !*s {
                        *s = true;
                        stack.push(j);
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(LabError::NonMarkov("adjacency matrix is reducible".into()));
            }
        }
        Ok(())
    }

    /// Smallest distance between the branch-domain centers and between
    /// distinct inverse-branch images of a common point. Cylinder
    /// representatives of distinct words are at least this far apart at the
    /// last index where their words differ.
    fn compute_branch_gap(&self) -> f64 {
        let k = self.branches.len();
        let mut gap = f64::INFINITY;
        for a in 0..k {
            for b in (a + 1)..k {
                gap = gap.min(self.domain.distance(self.center(a), self.center(b)));
                for j in 0..k {
                    if !(self.adjacency[a][j] && self.adjacency[b][j]) {
                        continue;
                    }
                    for z in self.branches[j].piece.samples(65) {
                        let d = self.domain.distance(self.branch_inverse(a, z), self.branch_inverse(b, z));
                        gap = gap.min(d);
                    }
                }
            }
        }
        if gap.is_finite() {
            gap
        } else {
            self.domain.diam()
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn adjacency(&self) -> &[Vec<bool>] {
        &self.adjacency
    }

    pub fn allowed(&self, a: usize, b: usize) -> bool {
        self.adjacency[a][b]
    }

    pub fn is_full_branch(&self) -> bool {
        self.adjacency.iter().flatten().all(|&x| x)
    }

    pub fn holder_exponent(&self) -> f64 {
        self.holder_exponent
    }

    /// Minimal singular value of `Df` over the sampled pieces.
    pub fn min_expansion(&self) -> f64 {
        self.min_expansion
    }

    pub fn max_expansion(&self) -> f64 {
        self.max_expansion
    }

    /// Largest contraction factor of the inverse branches.
    pub fn inverse_contraction(&self) -> f64 {
        1.0 / self.min_expansion
    }

    pub fn branch_gap(&self) -> f64 {
        self.branch_gap
    }

    /// The canonical separation scale: half the minimal branch gap.
    pub fn separation_eps(&self) -> f64 {
        0.5 * self.branch_gap
    }

    pub fn distance(&self, a: Point, b: Point) -> f64 {
        self.domain.distance(a, b)
    }

    pub fn center(&self, branch: usize) -> Point {
        self.branches[branch].piece.center()
    }

    /// Branch whose piece contains `p`.
    pub fn locate(&self, p: Point) -> Option<usize> {
        let p = self.domain.wrap(p);
        self.branches.iter().position(|b| b.piece.contains(p))
    }

    pub fn branch_forward(&self, branch: usize, p: Point) -> Point {
        self.domain.wrap(self.branches[branch].kind.forward(p))
    }

    pub fn branch_inverse(&self, branch: usize, p: Point) -> Point {
        let b = &self.branches[branch];
        b.kind.inverse(p, &b.piece)
    }

    pub fn branch_derivative(&self, branch: usize, p: Point) -> Derivative {
        self.branches[branch].kind.derivative(p)
    }

    /// One step of the map: `(branch index, f(p))`.
    pub fn apply(&self, p: Point) -> Option<(usize, Point)> {
        let p = self.domain.wrap(p);
        let i = self.locate(p)?;
        Some((i, self.branch_forward(i, p)))
    }

    pub fn derivative_at(&self, p: Point) -> Option<Derivative> {
        let p = self.domain.wrap(p);
        self.locate(p).map(|i| self.branch_derivative(i, p))
    }

    /// Branch indices of `x, f(x), …, f^{n−1}(x)`.
    pub fn itinerary(&self, x: Point, n: usize) -> Result<Word> {
        let mut symbols = Vec::with_capacity(n);
        let mut p = self.domain.wrap(x);
        for step in 0..n {
            let i = self.locate(p).ok_or(LabError::EscapedRepeller { step })?;
            symbols.push(i as u8);
            p = self.branch_forward(i, p);
        }
        Ok(Word::from_symbols_unchecked(symbols))
    }

    /// Representative of the cylinder `w`: the center of the last symbol's
    /// piece pulled back through the inverse branches right to left.
    pub fn cylinder_point(&self, w: &Word) -> Point {
        let s = w.symbols();
        assert!(!s.is_empty(), "cylinder of the empty word");
        let mut p = self.center(*s.last().unwrap() as usize);
        for &a in s[..s.len() - 1].iter().rev() {
            p = self.branch_inverse(a as usize, p);
        }
        p
    }

    /// Fixed point of `f^p` with itinerary `w` repeated, by iterating the
    /// contracting inverse composition. `w` must be cyclically admissible.
    pub fn periodic_point(&self, w: &Word) -> Point {
        let s = w.symbols();
        let mut p = self.cylinder_point(w);
        let rate = self.inverse_contraction().powi(s.len() as i32);
        // enough cycles to contract a unit error below rounding
        let cycles = ((f64::EPSILON.ln() / rate.ln()).ceil() as usize + 2).clamp(2, 4000);
        for _ in 0..cycles {
            let prev = p;
            for &a in s.iter().rev() {
                p = self.branch_inverse(a as usize, p);
            }
            if prev == p {
                break;
            }
        }
        p
    }

    /// The `p` points of the periodic orbit with itinerary `w`: the fixed
    /// point `x₀` of `f^p`, then `f^k x₀` as the partial inverse chains
    /// `g_{s_k} ∘ ⋯ ∘ g_{s_{p−1}}(x₀)`, so no forward drift accumulates.
    pub fn periodic_orbit(&self, w: &Word) -> Vec<Point> {
        let s = w.symbols();
        let x0 = self.periodic_point(w);
        let mut out = vec![x0; s.len()];
        let mut p = x0;
        for k in (1..s.len()).rev() {
            p = self.branch_inverse(s[k] as usize, p);
            out[k] = p;
        }
        out
    }

    /// Orbit `x, f(x), …, f^{n−1}(x)` of a cylinder point computed from the
    /// suffix representatives, which avoids forward error amplification.
    pub fn cylinder_orbit(&self, w: &Word) -> Vec<Point> {
        let s = w.symbols();
        let mut out = vec![Point::Line(0.0); s.len()];
        let mut p = self.center(*s.last().unwrap() as usize);
        out[s.len() - 1] = p;
        for k in (0..s.len() - 1).rev() {
            p = self.branch_inverse(s[k] as usize, p);
            out[k] = p;
        }
        out
    }

    /// `D_x f^n = D_{f^{n−1}x} f ⋯ D_x f` by forward iteration.
    pub fn cocycle(&self, x: Point, n: usize) -> Result<CocycleProduct> {
        assert!(n >= 1, "cocycle length must be positive");
        let mut prod = LogProduct::new(self.dim());
        let mut p = self.domain.wrap(x);
        for step in 0..n {
            let i = self.locate(p).ok_or(LabError::EscapedRepeller { step })?;
            prod.push_left(&self.branch_derivative(i, p));
            p = self.branch_forward(i, p);
        }
        let (log_norm, log_conorm) = prod.log_norms()?;
        Ok(CocycleProduct { base_point: x, length: n, product: prod.value(), log_norm, log_conorm })
    }

    /// Cocycle along the suffix-representative orbit of a word.
    pub fn cocycle_along(&self, orbit: &[Point], symbols: &[u8]) -> Result<(f64, f64)> {
        let mut prod = LogProduct::new(self.dim());
        for (p, &a) in orbit.iter().zip(symbols) {
            prod.push_left(&self.branch_derivative(a as usize, *p));
        }
        prod.log_norms()
    }

    /// Returns a copy of this map conjugated by a circle homeomorphism,
    /// `h ∘ f ∘ h⁻¹`. Only 1D maps are supported.
    pub fn conjugate_by(&self, homeo: Homeo) -> Result<ExpandingMap> {
        if self.dim() != 1 {
            return Err(LabError::BadSpec("conjugation is implemented for 1D maps".into()));
        }
        let branches = self
            .branches
            .iter()
            .map(|b| {
                let Piece::Interval { lo, hi, closed_hi } = b.piece else { unreachable!() };
                Branch {
                    piece: Piece::Interval { lo: homeo.eval(lo), hi: homeo.eval(hi), closed_hi },
                    kind: BranchKind::Conjugated { inner: Box::new(b.kind.clone()), homeo, inner_piece: (lo, hi) },
                }
            })
            .collect();
        let id = format!("{} conj={:?}", self.id, homeo);
        ExpandingMap::new(id, self.domain, branches, self.adjacency.clone(), self.holder_exponent)
    }
}
