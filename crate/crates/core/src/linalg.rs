//! Small fixed-size linear algebra: 2×2 matrices and the derivative type
//! shared by one- and two-dimensional maps.

use std::ops::Mul;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[f64; 2]; 2],
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { m: [[1.0, 0.0], [0.0, 1.0]] };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { m: [[a, b], [c, d]] }
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, d)
    }

    /// `scale` times the rotation by `theta` radians.
    pub fn scaled_rotation(scale: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Mat2::new(scale * c, -scale * s, scale * s, scale * c)
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn scale(&self, k: f64) -> Self {
        let m = self.m;
        Mat2::new(k * m[0][0], k * m[0][1], k * m[1][0], k * m[1][1])
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.m[0][0] * v[0] + self.m[0][1] * v[1], self.m[1][0] * v[0] + self.m[1][1] * v[1]]
    }

    pub fn inverse(&self) -> Result<Mat2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(LabError::SingularMatrix);
        }
        let m = self.m;
        Ok(Mat2::new(m[1][1], -m[0][1], -m[1][0], m[0][0]).scale(1.0 / det))
    }

    /// Singular values `(largest, smallest)` in closed form.
    pub fn singular_values(&self) -> (f64, f64) {
        let [[a, b], [c, d]] = self.m;
        let e = 0.5 * (a + d);
        let f = 0.5 * (a - d);
        let g = 0.5 * (c + b);
        let h = 0.5 * (c - b);
        let q = e.hypot(h);
        let r = f.hypot(g);
        (q + r, (q - r).abs())
    }

    /// Largest absolute entry, used for renormalizing long products.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Gram–Schmidt QR factorization; `R` has a non-negative diagonal.
    pub fn qr(&self) -> (Mat2, [f64; 2]) {
        let [[a, b], [c, d]] = self.m;
        let r11 = a.hypot(c);
        let q1 = if r11 > 0.0 { [a / r11, c / r11] } else { [1.0, 0.0] };
        let r12 = q1[0] * b + q1[1] * d;
        let u = [b - r12 * q1[0], d - r12 * q1[1]];
        let r22 = u[0].hypot(u[1]);
        let q2 = if r22 > 0.0 { [u[0] / r22, u[1] / r22] } else { [-q1[1], q1[0]] };
        (Mat2::new(q1[0], q2[0], q1[1], q2[1]), [r11, r22])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = self.m;
        let b = rhs.m;
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2 { m: out }
    }
}

/// A derivative (or product of derivatives): a scalar for interval and
/// circle maps, a 2×2 matrix on the torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Derivative {
    Scalar(f64),
    Matrix(Mat2),
}

impl Derivative {
    pub fn identity_like(&self) -> Derivative {
        match self {
            Derivative::Scalar(_) => Derivative::Scalar(1.0),
            Derivative::Matrix(_) => Derivative::Matrix(Mat2::IDENTITY),
        }
    }

    /// `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Derivative) -> Derivative {
        match (self, rhs) {
            (Derivative::Scalar(a), Derivative::Scalar(b)) => Derivative::Scalar(a * b),
            (Derivative::Matrix(a), Derivative::Matrix(b)) => Derivative::Matrix(*a * *b),
            (Derivative::Scalar(a), Derivative::Matrix(b)) => Derivative::Matrix(b.scale(*a)),
            (Derivative::Matrix(a), Derivative::Scalar(b)) => Derivative::Matrix(a.scale(*b)),
        }
    }

    /// `(‖A‖, m(A))` with `m(A) = ‖A⁻¹‖⁻¹`.
    pub fn singular_norms(&self) -> Result<(f64, f64)> {
        match self {
            Derivative::Scalar(a) => {
                if *a == 0.0 || !a.is_finite() {
                    Err(LabError::SingularMatrix)
                } else {
                    Ok((a.abs(), a.abs()))
                }
            }
            Derivative::Matrix(m) => {
                let (hi, lo) = m.singular_values();
                if lo == 0.0 || !hi.is_finite() {
                    Err(LabError::SingularMatrix)
                } else {
                    Ok((hi, lo))
                }
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Derivative::Scalar(a) => a.abs(),
            Derivative::Matrix(m) => m.max_abs(),
        }
    }

    pub fn scale(&self, k: f64) -> Derivative {
        match self {
            Derivative::Scalar(a) => Derivative::Scalar(a * k),
            Derivative::Matrix(m) => Derivative::Matrix(m.scale(k)),
        }
    }
}

/// Running product of derivatives with logarithmic renormalization so that
/// long products neither overflow nor underflow.
#[derive(Debug, Clone, Copy)]
pub struct LogProduct {
    log_scale: f64,
    log_det: f64,
    mat: Derivative,
    steps: usize,
}

fn log_abs_det(d: &Derivative) -> f64 {
    match d {
        Derivative::Scalar(a) => a.abs().ln(),
        Derivative::Matrix(m) => m.det().abs().ln(),
    }
}

/// Matrix products are renormalized every this many factors.
pub const RENORM_PERIOD: usize = 8;

impl LogProduct {
    pub fn new(dim: usize) -> Self {
        let mat = if dim == 1 { Derivative::Scalar(1.0) } else { Derivative::Matrix(Mat2::IDENTITY) };
        LogProduct { log_scale: 0.0, log_det: 0.0, mat, steps: 0 }
    }

    /// Multiplies on the left: `self ← d · self`.
    pub fn push_left(&mut self, d: &Derivative) {
        self.log_det += log_abs_det(d);
        self.mat = d.compose(&self.mat);
        self.bump();
    }

    /// Multiplies on the right: `self ← self · d`.
    pub fn push_right(&mut self, d: &Derivative) {
        self.log_det += log_abs_det(d);
        self.mat = self.mat.compose(d);
        self.bump();
    }

    fn bump(&mut self) {
        self.steps += 1;
        match self.mat {
            Derivative::Scalar(a) => {
                // scalars are folded into the log scale immediately
                self.log_scale += a.abs().ln();
                self.mat = Derivative::Scalar(a.signum());
            }
            Derivative::Matrix(_) => {
                if self.steps.is_multiple_of(RENORM_PERIOD) {
                    let s = self.mat.max_abs();
                    if s > 0.0 && s.is_finite() {
                        self.log_scale += s.ln();
                        self.mat = self.mat.scale(1.0 / s);
                    }
                }
            }
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `(log‖P‖, log m(P))` of the accumulated product.
    ///
    /// In 2D the conorm comes from `σ₁σ₂ = |det P|`, which stays accurate
    /// after the smaller singular value of the normalized product underflows.
    pub fn log_norms(&self) -> Result<(f64, f64)> {
        match self.mat {
            Derivative::Scalar(_) => Ok((self.log_scale, self.log_scale)),
            Derivative::Matrix(m) => {
                let (hi, _) = m.singular_values();
                if !self.log_det.is_finite() || hi == 0.0 {
                    return Err(LabError::SingularMatrix);
                }
                let log_norm = self.log_scale + hi.ln();
                Ok((log_norm, (self.log_det - log_norm).min(log_norm)))
            }
        }
    }

    /// The product itself (may overflow for long products).
    pub fn value(&self) -> Derivative {
        self.mat.scale(self.log_scale.exp())
    }
}
