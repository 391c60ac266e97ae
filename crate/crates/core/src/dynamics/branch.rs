//! Closed-form branch maps with exact derivatives.

use std::f64::consts::TAU;

use crate::linalg::{Derivative, Mat2};

use super::Point;

/// Domain piece of a branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    /// `[lo, hi)`, or `[lo, hi]` when `closed_hi`.
    Interval { lo: f64, hi: f64, closed_hi: bool },
    /// Half-open rectangle `[lo₀, hi₀) × [lo₁, hi₁)` in the unit square.
    Cell { lo: [f64; 2], hi: [f64; 2] },
}

impl Piece {
    pub fn contains(&self, p: Point) -> bool {
        match (self, p) {
            (Piece::Interval { lo, hi, closed_hi }, Point::Line(x)) => {
                x >= *lo && (x < *hi || (*closed_hi && x <= *hi))
            }
            (Piece::Cell { lo, hi }, Point::Plane(v)) => (0..2).all(|i| v[i] >= lo[i] && v[i] < hi[i]),
            _ => false,
        }
    }

    pub fn center(&self) -> Point {
        match self {
            Piece::Interval { lo, hi, .. } => Point::Line(0.5 * (lo + hi)),
            Piece::Cell { lo, hi } => Point::Plane([0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])]),
        }
    }

    /// `n` evenly spaced sample points (per axis in 2D), endpoints included
    /// for closed ends.
    pub fn samples(&self, n: usize) -> Vec<Point> {
        let n = n.max(2);
        match self {
            Piece::Interval { lo, hi, closed_hi } => {
                let top = if *closed_hi { n } else { n - 1 };
                (0..top).map(|i| Point::Line(lo + (hi - lo) * i as f64 / (n - 1) as f64)).collect()
            }
            Piece::Cell { lo, hi } => {
                let mut out = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        let u = (i as f64 + 0.5) / n as f64;
                        let v = (j as f64 + 0.5) / n as f64;
                        out.push(Point::Plane([lo[0] + (hi[0] - lo[0]) * u, lo[1] + (hi[1] - lo[1]) * v]));
                    }
                }
                out
            }
        }
    }

    pub fn bounds_1d(&self) -> Option<(f64, f64)> {
        match self {
            Piece::Interval { lo, hi, .. } => Some((*lo, *hi)),
            Piece::Cell { .. } => None,
        }
    }
}

/// Circle homeomorphisms fixing 0, used to build smoothly conjugate maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Homeo {
    Identity,
    /// `x ↦ x + amp·sin(2πx)/(2π)` with `|amp| < 1`.
    SineShift {
        amp: f64,
    },
}

impl Homeo {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Homeo::Identity => x,
            Homeo::SineShift { amp } => x + amp * (TAU * x).sin() / TAU,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Homeo::Identity => 1.0,
            Homeo::SineShift { amp } => 1.0 + amp * (TAU * x).cos(),
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match self {
            Homeo::Identity => 0.0,
            Homeo::SineShift { amp } => -amp * TAU * (TAU * x).sin(),
        }
    }

    pub fn inverse(&self, y: f64) -> f64 {
        match self {
            Homeo::Identity => y,
            Homeo::SineShift { .. } => solve_increasing(|x| self.eval(x), |x| self.derivative(x), y, 0.0, 1.0),
        }
    }
}

/// Solves `f(x) = y` for increasing `f` on `[lo, hi]` by safeguarded Newton.
pub(crate) fn solve_increasing(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, y: f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    if f(a) >= y {
        return a;
    }
    if f(b) <= y {
        return b;
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = f(x) - y;
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d > 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) || b - a <= f64::EPSILON {
            return next;
        }
        x = next;
    }
    x
}

/// Closed-form branch map. Forward maps are orientation preserving in 1D.
#[derive(Debug, Clone, PartialEq)]
pub enum BranchKind {
    /// `x ↦ slope·x + offset`.
    Affine { slope: f64, offset: f64 },
    /// `x ↦ degree·x + amp·sin(2πx) − shift`.
    SineLift { degree: f64, amp: f64, shift: f64 },
    /// `x ↦ A x − shift` on the torus.
    Toral { matrix: Mat2, inverse: Mat2, shift: [f64; 2] },
    /// `h ∘ inner ∘ h⁻¹`; `inner_piece` is the inner branch's domain.
    Conjugated { inner: Box<BranchKind>, homeo: Homeo, inner_piece: (f64, f64) },
}

impl BranchKind {
    pub fn forward(&self, p: Point) -> Point {
        match (self, p) {
            (BranchKind::Affine { slope, offset }, Point::Line(x)) => Point::Line(slope * x + offset),
            (BranchKind::SineLift { degree, amp, shift }, Point::Line(x)) => {
                Point::Line(degree * x + amp * (TAU * x).sin() - shift)
            }
            (BranchKind::Toral { matrix, shift, .. }, Point::Plane(v)) => {
                let w = matrix.apply(v);
                Point::Plane([w[0] - shift[0], w[1] - shift[1]])
            }
            (BranchKind::Conjugated { inner, homeo, .. }, Point::Line(x)) => {
                let u = homeo.inverse(x);
                Point::Line(homeo.eval(inner.forward(Point::Line(u)).x()))
            }
            _ => panic!("branch applied to a point of the wrong dimension"),
        }
    }

    /// Inverse branch; `piece` brackets the answer in 1D.
    pub fn inverse(&self, p: Point, piece: &Piece) -> Point {
        match (self, p) {
            (BranchKind::Affine { slope, offset }, Point::Line(y)) => Point::Line((y - offset) / slope),
            (BranchKind::SineLift { degree, amp, shift }, Point::Line(y)) => {
                let (lo, hi) = piece.bounds_1d().expect("interval piece");
                let (degree, amp, shift) = (*degree, *amp, *shift);
                Point::Line(solve_increasing(
                    |x| degree * x + amp * (TAU * x).sin() - shift,
                    |x| degree + amp * TAU * (TAU * x).cos(),
                    y,
                    lo,
                    hi,
                ))
            }
            (BranchKind::Toral { inverse, shift, .. }, Point::Plane(v)) => {
                Point::Plane(inverse.apply([v[0] + shift[0], v[1] + shift[1]]))
            }
            (BranchKind::Conjugated { inner, homeo, inner_piece }, Point::Line(y)) => {
                let v = homeo.inverse(y);
                let inner_piece = Piece::Interval { lo: inner_piece.0, hi: inner_piece.1, closed_hi: true };
                let u = inner.inverse(Point::Line(v), &inner_piece).x();
                Point::Line(homeo.eval(u))
            }
            _ => panic!("branch applied to a point of the wrong dimension"),
        }
    }

    pub fn derivative(&self, p: Point) -> Derivative {
        match (self, p) {
            (BranchKind::Affine { slope, .. }, Point::Line(_)) => Derivative::Scalar(*slope),
            (BranchKind::SineLift { degree, amp, .. }, Point::Line(x)) => {
                Derivative::Scalar(degree + amp * TAU * (TAU * x).cos())
            }
            (BranchKind::Toral { matrix, .. }, Point::Plane(_)) => Derivative::Matrix(*matrix),
            (BranchKind::Conjugated { inner, homeo, .. }, Point::Line(x)) => {
                let u = homeo.inverse(x);
                let fu = inner.forward(Point::Line(u)).x();
                let inner_d = match inner.derivative(Point::Line(u)) {
                    Derivative::Scalar(d) => d,
                    Derivative::Matrix(_) => unreachable!(),
                };
                Derivative::Scalar(homeo.derivative(fu) * inner_d / homeo.derivative(u))
            }
            _ => panic!("branch applied to a point of the wrong dimension"),
        }
    }

    /// Analytic Lipschitz bound for the derivative (Hölder constant at α = 1),
    /// when one is available in closed form.
    pub fn derivative_lipschitz(&self) -> Option<f64> {
        match self {
            BranchKind::Affine { .. } | BranchKind::Toral { .. } => Some(0.0),
            BranchKind::SineLift { amp, .. } => Some(amp.abs() * TAU * TAU),
            BranchKind::Conjugated { .. } => None,
        }
    }
}
