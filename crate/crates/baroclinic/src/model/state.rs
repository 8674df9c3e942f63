//! The two-layer model state.

use crate::num::Real;
use crate::sphere::SpectralField;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Barotropic (u1) and baroclinic (u2) stream functions in spectral form,
/// sharing one truncation degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct State<T> {
    pub u1: SpectralField<T>,
    pub u2: SpectralField<T>,
}

impl<T: Real> State<T> {
    pub fn zeros(l_max: usize) -> Self {
        Self {
            u1: SpectralField::zeros(l_max),
            u2: SpectralField::zeros(l_max),
        }
    }

    pub fn new(u1: SpectralField<T>, u2: SpectralField<T>) -> Self {
        assert_eq!(u1.l_max(), u2.l_max(), "layer truncations differ");
        Self { u1, u2 }
    }

    pub fn l_max(&self) -> usize {
        self.u1.l_max()
    }

    pub fn scale(&mut self, s: T) {
        self.u1.scale(s);
        self.u2.scale(s);
    }

    /// self += alpha * other.
    pub fn axpy(&mut self, alpha: T, other: &Self) {
        self.u1.axpy(alpha, &other.u1);
        self.u2.axpy(alpha, &other.u2);
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite()
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, l_max: usize, slope: T) -> Self {
        Self {
            u1: SpectralField::random(rng, l_max, slope),
            u2: SpectralField::random(rng, l_max, slope),
        }
    }
}
