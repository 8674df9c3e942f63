//! Gauss-Legendre x equispaced-longitude grid and the spectral transforms.
//!
//! Latitudes are Gauss-Legendre nodes in mu = sin(phi), longitudes are
//! uniform. Analysis integrates against conjugate harmonics with Gauss
//! weights in mu and an FFT in lambda; both directions are exact on
//! band-limited fields as long as the grid meets the capacity bounds, so
//! round trips and quadratic conservation identities hold to round-off.

use super::field::{GridField, SpectralField};
use super::gauss::gauss_legendre;
use super::legendre::LegendreTables;
use crate::num::Real;
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum SphereError {
    #[error(
        "grid {n_lat}x{n_lon} cannot transform degree {l_max}: needs n_lat >= {need_lat}, n_lon >= {need_lon}"
    )]
    TransformCapacity {
        l_max: usize,
        n_lat: usize,
        n_lon: usize,
        need_lat: usize,
        need_lon: usize,
    },
    #[error(
        "grid {n_lat}x{n_lon} cannot dealias quadratic terms at degree {l_max}: needs n_lat >= {need_lat}, n_lon >= {need_lon}"
    )]
    DealiasCapacity {
        l_max: usize,
        n_lat: usize,
        n_lon: usize,
        need_lat: usize,
        need_lon: usize,
    },
    #[error("grid field is {got_lat}x{got_lon}, grid expects {n_lat}x{n_lon}")]
    ShapeMismatch {
        n_lat: usize,
        n_lon: usize,
        got_lat: usize,
        got_lon: usize,
    },
    #[error("spectral fields have different truncations: {a} vs {b}")]
    TruncationMismatch { a: usize, b: usize },
}

/// Smallest n >= lo whose prime factors are all in {2, 3, 5}.
pub fn next_fast_len(lo: usize) -> usize {
    let mut n = lo.max(1);
    loop {
        let mut k = n;
        for p in [2, 3, 5] {
            while k.is_multiple_of(p) {
                k /= p;
            }
        }
        if k == 1 {
            return n;
        }
        n += 1;
    }
}

pub struct SphericalGrid<T> {
    l_max: usize,
    n_lat: usize,
    n_lon: usize,
    mu: Vec<T>,
    weights: Vec<T>,
    tables: LegendreTables<T>,
    fft_fwd: Arc<dyn Fft<T>>,
    fft_inv: Arc<dyn Fft<T>>,
}

impl<T> fmt::Debug for SphericalGrid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphericalGrid")
            .field("l_max", &self.l_max)
            .field("n_lat", &self.n_lat)
            .field("n_lon", &self.n_lon)
            .finish()
    }
}

impl<T: Real> SphericalGrid<T> {
    /// Grid with explicit sizes. Fails if the sizes cannot represent
    /// degree-l_max fields exactly (n_lat >= l_max+1, n_lon >= 2 l_max+1).
    pub fn new(l_max: usize, n_lat: usize, n_lon: usize) -> Result<Self, SphereError> {
        assert!(l_max >= 1);
        let need_lat = l_max + 1;
        let need_lon = 2 * l_max + 1;
        if n_lat < need_lat || n_lon < need_lon {
            return Err(SphereError::TransformCapacity {
                l_max,
                n_lat,
                n_lon,
                need_lat,
                need_lon,
            });
        }
        let (mu, weights) = gauss_legendre::<T>(n_lat);
        let tables = LegendreTables::new(l_max, &mu);
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(n_lon);
        let fft_inv = planner.plan_fft_inverse(n_lon);
        Ok(Self {
            l_max,
            n_lat,
            n_lon,
            mu,
            weights,
            tables,
            fft_fwd,
            fft_inv,
        })
    }

    /// Grid sized for dealiased quadratic nonlinearities at `l_max`:
    /// n_lat = ceil((3 l_max + 1)/2) rounded up to even, n_lon the next
    /// FFT-friendly length >= 3 l_max + 1.
    pub fn dealiased(l_max: usize) -> Self {
        let mut n_lat = (3 * l_max + 2) / 2;
        if n_lat % 2 == 1 {
            n_lat += 1;
        }
        let n_lon = next_fast_len(3 * l_max + 1);
        Self::new(l_max, n_lat, n_lon).expect("dealiased sizes satisfy capacity by construction")
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn n_lat(&self) -> usize {
        self.n_lat
    }

    pub fn n_lon(&self) -> usize {
        self.n_lon
    }

    /// Quadrature nodes mu_j in increasing order.
    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    /// Gauss weights paired with `mu`.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Longitude of grid column k.
    pub fn longitude(&self, k: usize) -> T {
        T::of(2.0) * T::PI() * T::of_usize(k) / T::of_usize(self.n_lon)
    }

    fn check_shape(&self, f: &GridField<T>) -> Result<(), SphereError> {
        if f.n_lat() != self.n_lat || f.n_lon() != self.n_lon {
            return Err(SphereError::ShapeMismatch {
                n_lat: self.n_lat,
                n_lon: self.n_lon,
                got_lat: f.n_lat(),
                got_lon: f.n_lon(),
            });
        }
        Ok(())
    }

    fn check_truncation(&self, l_max: usize) -> Result<(), SphereError> {
        if l_max > self.l_max {
            return Err(SphereError::TransformCapacity {
                l_max,
                n_lat: self.n_lat,
                n_lon: self.n_lon,
                need_lat: l_max + 1,
                need_lon: 2 * l_max + 1,
            });
        }
        Ok(())
    }

    /// Errors unless quadratic products of degree-l_max fields can be
    /// analyzed without aliasing on this grid.
    pub fn check_dealias(&self, l_max: usize) -> Result<(), SphereError> {
        let need_lat = (3 * l_max + 2) / 2;
        let need_lon = 3 * l_max + 1;
        if self.l_max < l_max || self.n_lat < need_lat || self.n_lon < need_lon {
            return Err(SphereError::DealiasCapacity {
                l_max,
                n_lat: self.n_lat,
                n_lon: self.n_lon,
                need_lat,
                need_lon,
            });
        }
        Ok(())
    }

    /// Projects grid values onto harmonics up to the grid truncation.
    /// The l = 0 mean is discarded; order-zero coefficients are kept
    /// exactly real, so analyzed fields always satisfy the realness
    /// (conjugate-symmetry) invariant structurally.
    pub fn sht_analysis(&self, f: &GridField<T>) -> Result<SpectralField<T>, SphereError> {
        self.check_shape(f)?;
        let l = self.l_max;
        let n = self.n_lat;
        let zero = Complex::new(T::zero(), T::zero());
        // fourier[m * n_lat + j] = w_j * (2 pi / n_lon) * sum_k f e^{-i m lambda_k}
        let mut fourier = vec![zero; (l + 1) * n];
        let mut buf = vec![zero; self.n_lon];
        let lambda_scale = T::of(2.0) * T::PI() / T::of_usize(self.n_lon);
        for j in 0..n {
            for (b, v) in buf.iter_mut().zip(f.row(j)) {
                *b = Complex::new(*v, T::zero());
            }
            self.fft_fwd.process(&mut buf);
            let factor = self.weights[j] * lambda_scale;
            for m in 0..=l {
                fourier[m * n + j] = buf[m] * factor;
            }
        }
        let mut out = SpectralField::zeros(l);
        for m in 0..=l {
            let col = &fourier[m * n..(m + 1) * n];
            for deg in m.max(1)..=l {
                let row = self.tables.value_row(m, deg);
                let mut acc = zero;
                for j in 0..n {
                    acc += col[j] * row[j];
                }
                if m == 0 {
                    acc.im = T::zero();
                }
                out.set(deg, m, acc);
            }
        }
        Ok(out)
    }

    /// Evaluates a spectral field on the grid.
    pub fn sht_synthesis(&self, f: &SpectralField<T>) -> Result<GridField<T>, SphereError> {
        self.synthesize_with(f, false)
    }

    /// Evaluates the mu-derivative of a spectral field on the grid
    /// (exact at the interior quadrature nodes).
    pub fn synthesis_mu_derivative(
        &self,
        f: &SpectralField<T>,
    ) -> Result<GridField<T>, SphereError> {
        self.synthesize_with(f, true)
    }

    fn synthesize_with(
        &self,
        f: &SpectralField<T>,
        mu_deriv: bool,
    ) -> Result<GridField<T>, SphereError> {
        self.check_truncation(f.l_max())?;
        let l = f.l_max();
        let n = self.n_lat;
        let zero = Complex::new(T::zero(), T::zero());
        let mut fourier = vec![zero; (l + 1) * n];
        for m in 0..=l {
            let col = &mut fourier[m * n..(m + 1) * n];
            for deg in m.max(1)..=l {
                let c = f.get(deg, m);
                let row = if mu_deriv {
                    self.tables.deriv_row(m, deg)
                } else {
                    self.tables.value_row(m, deg)
                };
                for j in 0..n {
                    col[j] += c * row[j];
                }
            }
        }
        let mut out = GridField::zeros(n, self.n_lon);
        let mut buf = vec![zero; self.n_lon];
        for j in 0..n {
            for b in buf.iter_mut() {
                *b = zero;
            }
            buf[0] = Complex::new(fourier[j].re, T::zero());
            for m in 1..=l {
                let c = fourier[m * n + j];
                buf[m] = c;
                buf[self.n_lon - m] = c.conj();
            }
            self.fft_inv.process(&mut buf);
            for (v, b) in out.row_mut(j).iter_mut().zip(&buf) {
                *v = b.re;
            }
        }
        Ok(out)
    }

    /// Area integral over the sphere of grid values.
    pub fn sphere_integral(&self, f: &GridField<T>) -> Result<T, SphereError> {
        self.check_shape(f)?;
        let lambda_scale = T::of(2.0) * T::PI() / T::of_usize(self.n_lon);
        let mut total = T::zero();
        for j in 0..self.n_lat {
            let row_sum = f.row(j).iter().copied().fold(T::zero(), |a, b| a + b);
            total += self.weights[j] * row_sum;
        }
        Ok(total * lambda_scale)
    }

    /// Subtracts the area mean so the field integrates to ~0.
    pub fn remove_mean(&self, f: &mut GridField<T>) -> Result<(), SphereError> {
        let mean = self.sphere_integral(f)? / (T::of(4.0) * T::PI());
        for v in f.values_mut() {
            *v -= mean;
        }
        Ok(())
    }

    /// The planetary vorticity field scale * mu as a spectral field:
    /// a single (1, 0) coefficient equal to scale * sqrt(4 pi / 3).
    pub fn coriolis_field(&self, scale: T) -> SpectralField<T> {
        let mut f = SpectralField::zeros(self.l_max);
        f.set(
            1,
            0,
            Complex::new(
                scale * (T::of(4.0) * T::PI() / T::of(3.0)).sqrt(),
                T::zero(),
            ),
        );
        f
    }

    /// Jacobian J(psi, theta) = psi_lambda theta_mu - psi_mu theta_lambda,
    /// evaluated pseudospectrally and projected back onto the input
    /// truncation. Requires dealiasing capacity for that truncation.
    pub fn jacobian(
        &self,
        psi: &SpectralField<T>,
        theta: &SpectralField<T>,
    ) -> Result<SpectralField<T>, SphereError> {
        if psi.l_max() != theta.l_max() {
            return Err(SphereError::TruncationMismatch {
                a: psi.l_max(),
                b: theta.l_max(),
            });
        }
        self.check_dealias(psi.l_max())?;
        let psi_lam = self.sht_synthesis(&psi.lambda_derivative())?;
        let psi_mu = self.synthesis_mu_derivative(psi)?;
        let theta_lam = self.sht_synthesis(&theta.lambda_derivative())?;
        let theta_mu = self.synthesis_mu_derivative(theta)?;
        let mut j = GridField::zeros(self.n_lat, self.n_lon);
        j.add_product(T::one(), &psi_lam, &theta_mu);
        j.add_product(-T::one(), &psi_mu, &theta_lam);
        Ok(self.sht_analysis(&j)?.resized(psi.l_max()))
    }
}
