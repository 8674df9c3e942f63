//! Physical parameters and the per-mode 2x2 operator blocks.
//!
//! In spectral space the linear operators act mode-by-mode on the layer
//! pair (u1, u2) of each harmonic (l, m), with lambda = l(l+1):
//!
//! * A1 (energy metric):    diag(lambda, lambda + gamma)
//! * A2 (biharmonic):       diag(lambda^2, lambda^2)
//! * A3 (friction/coupling, standard variant):
//!   [ k0 lambda, -2 k0 lambda; -k0 lambda, (2 k0 + k1 + nu gamma) lambda + rho ]
//! * A3 (hat variant):
//!   [ k0 lambda, -k0 lambda; -k0 lambda, (k0 + k1) lambda + rho ]
//!
//! With `scaled_friction` the stored friction coefficients are the primed,
//! viscosity-free values and the effective ones are nu * k'.

use crate::linalg::Mat2;
use crate::num::Real;
use crate::sphere::laplacian_eigenvalue;
use serde::{Deserialize, Serialize};

/// Which friction/coupling operator the model uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OperatorVariant {
    /// Standard operator with the -2 k0 cross-coupling and nu*gamma term.
    #[default]
    A3,
    /// Symmetrized-coupling variant without the nu*gamma term.
    A3Hat,
}

/// How the friction coefficients relate to viscosity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FrictionRegime {
    /// k0, k1, rho fields are primed values; effective friction is nu * k'.
    #[default]
    Scaled,
    /// k0, k1, rho are used literally, independent of nu.
    Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    /// Viscosity in front of the biharmonic operator.
    pub nu: T,
    /// Layer-coupling constant in A1 (gamma >= 0).
    pub gamma: T,
    /// Zero-order drag on the baroclinic layer.
    pub rho: T,
    /// Interfacial friction coefficient.
    pub k0: T,
    /// Bottom friction coefficient.
    pub k1: T,
    pub variant: OperatorVariant,
    pub regime: FrictionRegime,
    /// Coefficient of mu in the planetary-vorticity field (2 for the
    /// unscaled sphere; the inviscid-limit rescaling shrinks it).
    pub coriolis_scale: T,
}

impl<T: Real> ModelParams<T> {
    /// Desk-scale defaults: unit-order coupling and drag, scaled friction,
    /// full Coriolis term.
    pub fn new(nu: T) -> Self {
        Self {
            nu,
            gamma: T::one(),
            rho: T::of(0.5),
            k0: T::of(0.1),
            k1: T::one(),
            variant: OperatorVariant::A3,
            regime: FrictionRegime::Scaled,
            coriolis_scale: T::of(2.0),
        }
    }

    pub fn scaled_friction(&self) -> bool {
        self.regime == FrictionRegime::Scaled
    }

    /// Friction coefficients as they enter the equations.
    pub fn effective_k0(&self) -> T {
        match self.regime {
            FrictionRegime::Scaled => self.nu * self.k0,
            FrictionRegime::Fixed => self.k0,
        }
    }

    pub fn effective_k1(&self) -> T {
        match self.regime {
            FrictionRegime::Scaled => self.nu * self.k1,
            FrictionRegime::Fixed => self.k1,
        }
    }

    pub fn effective_rho(&self) -> T {
        match self.regime {
            FrictionRegime::Scaled => self.nu * self.rho,
            FrictionRegime::Fixed => self.rho,
        }
    }

    /// Diagonal of A1 on mode l.
    pub fn a1_diag(&self, l: usize) -> [T; 2] {
        let lam = laplacian_eigenvalue::<T>(l);
        [lam, lam + self.gamma]
    }

    /// Diagonal of A2 on mode l.
    pub fn a2_diag(&self, l: usize) -> [T; 2] {
        let lam = laplacian_eigenvalue::<T>(l);
        [lam * lam, lam * lam]
    }

    /// The friction/coupling block on mode l, with effective coefficients.
    pub fn a3_matrix(&self, l: usize) -> Mat2<T> {
        let lam = laplacian_eigenvalue::<T>(l);
        let k0 = self.effective_k0();
        let k1 = self.effective_k1();
        let rho = self.effective_rho();
        match self.variant {
            OperatorVariant::A3 => Mat2::new(
                k0 * lam,
                -T::of(2.0) * k0 * lam,
                -k0 * lam,
                (T::of(2.0) * k0 + k1 + self.nu * self.gamma) * lam + rho,
            ),
            OperatorVariant::A3Hat => {
                Mat2::new(k0 * lam, -k0 * lam, -k0 * lam, (k0 + k1) * lam + rho)
            }
        }
    }

    /// The viscosity-free friction block A3' on mode l built from the
    /// primed coefficients; in the scaled regime the effective operator is
    /// exactly nu * A3'.
    pub fn a3_prime_matrix(&self, l: usize) -> Mat2<T> {
        let lam = laplacian_eigenvalue::<T>(l);
        let (k0, k1, rho) = (self.k0, self.k1, self.rho);
        match self.variant {
            OperatorVariant::A3 => Mat2::new(
                k0 * lam,
                -T::of(2.0) * k0 * lam,
                -k0 * lam,
                (T::of(2.0) * k0 + k1 + self.gamma) * lam + rho,
            ),
            OperatorVariant::A3Hat => {
                Mat2::new(k0 * lam, -k0 * lam, -k0 * lam, (k0 + k1) * lam + rho)
            }
        }
    }

    /// nu A2 + A3 on mode l.
    pub fn dissipation_matrix(&self, l: usize) -> Mat2<T> {
        let [a2_1, a2_2] = self.a2_diag(l);
        let visc = Mat2::diag(self.nu * a2_1, self.nu * a2_2);
        visc.add(&self.a3_matrix(l))
    }

    /// A1 + dt (nu A2 + A3) on mode l, the matrix solved each step.
    pub fn implicit_matrix(&self, l: usize, dt: T) -> Mat2<T> {
        let [a1_1, a1_2] = self.a1_diag(l);
        Mat2::diag(a1_1, a1_2).add(&self.dissipation_matrix(l).scale(dt))
    }
}
