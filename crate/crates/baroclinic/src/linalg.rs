//! Minimal 2x2 real matrix toolkit.
//!
//! The model decouples over spherical-harmonic modes into 2x2 blocks (one
//! row per layer), so everything the integrator and the linear oracle need
//! is closed-form 2x2 algebra: products, inverses, the matrix exponential
//! and the continuous Lyapunov equation.

use crate::num::Real;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Row-major 2x2 real matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn diag(x: T, y: T) -> Self {
        Self::new(x, T::zero(), T::zero(), y)
    }

    pub fn det(&self) -> T {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> T {
        self.a + self.d
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a, self.c, self.b, self.d)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn apply(&self, v: [T; 2]) -> [T; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// Applies the real matrix to a complex vector (used per spectral mode,
    /// where the block matrix is real but coefficients are complex).
    pub fn apply_complex(&self, v: [Complex<T>; 2]) -> [Complex<T>; 2] {
        [v[0] * self.a + v[1] * self.b, v[0] * self.c + v[1] * self.d]
    }

    /// Returns the inverse, or `None` when the determinant underflows
    /// relative to the matrix scale.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        let scale = self.a.abs() + self.b.abs() + self.c.abs() + self.d.abs();
        if det.abs() <= T::epsilon() * scale * scale * T::of(1e-3) {
            return None;
        }
        let inv = T::one() / det;
        Some(Self::new(
            self.d * inv,
            -self.b * inv,
            -self.c * inv,
            self.a * inv,
        ))
    }

    /// Both eigenvalues have positive real part (trace and determinant test).
    pub fn is_positive_stable(&self) -> bool {
        self.trace() > T::zero() && self.det() > T::zero()
    }

    /// Matrix exponential via the Cayley-Hamilton closed form.
    ///
    /// With tau = tr/2 and B = A - tau*I one has B^2 = -det(B) I, so
    /// e^A = e^tau (cosh(r) I + sinh(r)/r B) with r^2 = -det(B); the
    /// oscillatory branch (r^2 < 0) turns cosh/sinh into cos/sin and small
    /// |r^2| falls back to the series for cosh and sinh(r)/r.
    pub fn expm(&self) -> Self {
        let tau = self.trace() / T::of(2.0);
        let b = self.sub(&Mat2::diag(tau, tau));
        let r2 = -b.det();
        let (cosh_r, sinhc_r) = cosh_sinhc(r2);
        let e = tau.exp();
        Mat2::identity()
            .scale(cosh_r)
            .add(&b.scale(sinhc_r))
            .scale(e)
    }

    /// Eigenvalues of a symmetric matrix (uses `a`, `d` and the mean of the
    /// off-diagonal entries).
    pub fn sym_eigenvalues(&self) -> [T; 2] {
        let half = T::of(0.5);
        let mean = (self.a + self.d) * half;
        let off = (self.b + self.c) * half;
        let delta = ((self.a - self.d) * half).hypot(off);
        [mean - delta, mean + delta]
    }
}

/// (cosh r, sinh(r)/r) as functions of r^2, valid for either sign of r^2.
fn cosh_sinhc<T: Real>(r2: T) -> (T, T) {
    if r2.abs() < T::of(1e-6) {
        // cosh r = 1 + r^2/2 + r^4/24, sinh(r)/r = 1 + r^2/6 + r^4/120
        let c = T::one() + r2 * T::of(0.5) + r2 * r2 * T::of(1.0 / 24.0);
        let s = T::one() + r2 * T::of(1.0 / 6.0) + r2 * r2 * T::of(1.0 / 120.0);
        (c, s)
    } else if r2 > T::zero() {
        let r = r2.sqrt();
        (r.cosh(), r.sinh() / r)
    } else {
        let r = (-r2).sqrt();
        (r.cos(), r.sin() / r)
    }
}

/// Solves the continuous Lyapunov equation M X + X M^T = Q for symmetric X,
/// with symmetric right-hand side Q, by Cramer's rule on the equivalent
/// 3x3 system in (x11, x12, x22). Returns `None` when the system is
/// singular (M and -M^T share an eigenvalue).
pub fn lyapunov_solve<T: Real>(m: &Mat2<T>, q: &Mat2<T>) -> Option<Mat2<T>> {
    let two = T::of(2.0);
    // Rows: equations for entries (1,1), (1,2), (2,2).
    let a = [
        [two * m.a, two * m.b, T::zero()],
        [m.c, m.a + m.d, m.b],
        [T::zero(), two * m.c, two * m.d],
    ];
    let rhs = [q.a, (q.b + q.c) * T::of(0.5), q.d];
    let det3 = |c0: [T; 3], c1: [T; 3], c2: [T; 3]| {
        c0[0] * (c1[1] * c2[2] - c1[2] * c2[1]) - c1[0] * (c0[1] * c2[2] - c0[2] * c2[1])
            + c2[0] * (c0[1] * c1[2] - c0[2] * c1[1])
    };
    let col = |j: usize| [a[0][j], a[1][j], a[2][j]];
    let det = det3(col(0), col(1), col(2));
    let scale = m.a.abs() + m.b.abs() + m.c.abs() + m.d.abs() + T::epsilon();
    if det.abs() <= T::epsilon() * scale * scale * scale {
        return None;
    }
    let x11 = det3(rhs, col(1), col(2)) / det;
    let x12 = det3(col(0), rhs, col(2)) / det;
    let x22 = det3(col(0), col(1), rhs) / det;
    Some(Mat2::new(x11, x12, x12, x22))
}
