//! Field containers: spherical-harmonic coefficients and grid values.
//!
//! Spectral fields hold complex coefficients a_{l,m} of an expansion in
//! fully normalized (orthonormal) spherical harmonics Y_l^m for degrees
//! 1 <= l <= l_max and orders 0 <= m <= l. Fields represent real-valued,
//! zero-mean functions, so l = 0 is never stored and negative orders are
//! implied by conjugate symmetry a_{l,-m} = (-1)^m conj(a_{l,m}).

use crate::num::Real;
use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Eigenvalue of -Laplacian on degree-l harmonics: lambda_l = l(l+1).
pub fn laplacian_eigenvalue<T: Real>(l: usize) -> T {
    T::of_usize(l * (l + 1))
}

/// Coefficients of a real zero-mean field, stored for m >= 0 only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralField<T> {
    l_max: usize,
    coeffs: Vec<Complex<T>>,
}

/// Flat index of (l, m) in triangular storage, l >= 1, 0 <= m <= l.
#[inline]
pub(crate) fn lm_index(l: usize, m: usize) -> usize {
    debug_assert!(l >= 1 && m <= l);
    (l - 1) * (l + 2) / 2 + m
}

/// Number of stored coefficients for truncation degree l_max.
pub(crate) fn coeff_len(l_max: usize) -> usize {
    l_max * (l_max + 3) / 2
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(l_max: usize) -> Self {
        assert!(l_max >= 1, "truncation degree must be at least 1");
        Self {
            l_max,
            coeffs: vec![Complex::new(T::zero(), T::zero()); coeff_len(l_max)],
        }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    #[inline]
    pub fn get(&self, l: usize, m: usize) -> Complex<T> {
        self.coeffs[lm_index(l, m)]
    }

    #[inline]
    pub fn set(&mut self, l: usize, m: usize, value: Complex<T>) {
        self.coeffs[lm_index(l, m)] = value;
    }

    #[inline]
    pub fn coeff_mut(&mut self, l: usize, m: usize) -> &mut Complex<T> {
        &mut self.coeffs[lm_index(l, m)]
    }

    /// Iterates (l, m, a_{l,m}) in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex<T>)> + '_ {
        (1..=self.l_max).flat_map(move |l| (0..=l).map(move |m| (l, m, self.get(l, m))))
    }

    pub fn scale(&mut self, s: T) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    /// self += alpha * other. Truncations must match.
    pub fn axpy(&mut self, alpha: T, other: &Self) {
        assert_eq!(self.l_max, other.l_max, "truncation mismatch");
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += *o * alpha;
        }
    }

    /// Applies (-Laplacian)^power, multiplying degree l by (l(l+1))^power.
    /// Negative powers are well defined because l = 0 is excluded.
    pub fn laplacian_apply(&self, power: i32) -> Self {
        let mut out = self.clone();
        for l in 1..=self.l_max {
            let factor = laplacian_eigenvalue::<T>(l).powi(power);
            for m in 0..=l {
                let c = out.coeff_mut(l, m);
                *c *= factor;
            }
        }
        out
    }

    /// Longitude derivative: multiplies a_{l,m} by i*m. Exact in spectral
    /// space; the m = 0 (zonal) part is annihilated, preserving realness.
    pub fn lambda_derivative(&self) -> Self {
        let mut out = Self::zeros(self.l_max);
        for l in 1..=self.l_max {
            for m in 1..=l {
                let c = self.get(l, m);
                out.set(l, m, Complex::new(-c.im, c.re) * T::of_usize(m));
            }
        }
        out
    }

    /// Truncates or zero-pads to a new degree.
    pub fn resized(&self, l_max: usize) -> Self {
        let mut out = Self::zeros(l_max);
        for l in 1..=self.l_max.min(l_max) {
            for m in 0..=l {
                out.set(l, m, self.get(l, m));
            }
        }
        out
    }

    /// Sum over modes of weight(lambda_l) * energy_l where energy_l counts
    /// both orders +-m: |a_{l,0}|^2 + 2 sum_{m>=1} |a_{l,m}|^2.
    pub fn weighted_energy(&self, weight: impl Fn(T) -> T) -> T {
        let mut total = T::zero();
        for l in 1..=self.l_max {
            let mut e = self.get(l, 0).norm_sqr();
            let two = T::of(2.0);
            for m in 1..=l {
                e += two * self.get(l, m).norm_sqr();
            }
            total += weight(laplacian_eigenvalue::<T>(l)) * e;
        }
        total
    }

    /// Real L2(S^2) pairing sum_l weight(lambda_l) * <f_l, g_l> including
    /// the implied negative orders.
    pub fn weighted_pairing(&self, other: &Self, weight: impl Fn(T) -> T) -> T {
        assert_eq!(self.l_max, other.l_max, "truncation mismatch");
        let two = T::of(2.0);
        let mut total = T::zero();
        for l in 1..=self.l_max {
            let mut p = (self.get(l, 0) * other.get(l, 0).conj()).re;
            for m in 1..=l {
                p += two * (self.get(l, m) * other.get(l, m).conj()).re;
            }
            total += weight(laplacian_eigenvalue::<T>(l)) * p;
        }
        total
    }

    /// Largest coefficient magnitude, for tolerance scaling in tests.
    pub fn max_abs(&self) -> T {
        self.coeffs
            .iter()
            .map(|c| c.norm_sqr())
            .fold(T::zero(), T::max)
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Random band-limited field with coefficient standard deviation
    /// (1 + lambda_l)^(-slope) per real degree of freedom.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, l_max: usize, slope: T) -> Self {
        let mut f = Self::zeros(l_max);
        let half_sqrt = T::of(0.5).sqrt();
        for l in 1..=l_max {
            let sd = (T::one() + laplacian_eigenvalue::<T>(l)).powf(-slope);
            f.set(l, 0, Complex::new(T::standard_normal(rng) * sd, T::zero()));
            for m in 1..=l {
                let re = T::standard_normal(rng) * sd * half_sqrt;
                let im = T::standard_normal(rng) * sd * half_sqrt;
                f.set(l, m, Complex::new(re, im));
            }
        }
        f
    }
}

/// Point values on the latitude x longitude grid, row-major by latitude.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField<T> {
    n_lat: usize,
    n_lon: usize,
    values: Vec<T>,
}

impl<T: Real> GridField<T> {
    pub fn zeros(n_lat: usize, n_lon: usize) -> Self {
        Self {
            n_lat,
            n_lon,
            values: vec![T::zero(); n_lat * n_lon],
        }
    }

    pub fn n_lat(&self) -> usize {
        self.n_lat
    }

    pub fn n_lon(&self) -> usize {
        self.n_lon
    }

    #[inline]
    pub fn at(&self, j: usize, k: usize) -> T {
        self.values[j * self.n_lon + k]
    }

    #[inline]
    pub fn at_mut(&mut self, j: usize, k: usize) -> &mut T {
        &mut self.values[j * self.n_lon + k]
    }

    pub fn row(&self, j: usize) -> &[T] {
        &self.values[j * self.n_lon..(j + 1) * self.n_lon]
    }

    pub fn row_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.values[j * self.n_lon..(j + 1) * self.n_lon]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn fill_with(&mut self, f: impl Fn(usize, usize) -> T) {
        for j in 0..self.n_lat {
            for k in 0..self.n_lon {
                self.values[j * self.n_lon + k] = f(j, k);
            }
        }
    }

    /// self += a * other, pointwise.
    pub fn add_scaled(&mut self, a: T, other: &Self) {
        assert_eq!(self.values.len(), other.values.len());
        for (v, o) in self.values.iter_mut().zip(&other.values) {
            *v += a * *o;
        }
    }

    /// Pointwise a*x*y accumulated into self (used for Jacobian products).
    pub fn add_product(&mut self, a: T, x: &Self, y: &Self) {
        assert_eq!(self.values.len(), x.values.len());
        assert_eq!(self.values.len(), y.values.len());
        for ((v, xv), yv) in self.values.iter_mut().zip(&x.values).zip(&y.values) {
            *v += a * *xv * *yv;
        }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().map(|v| v.abs()).fold(T::zero(), T::max)
    }
}
