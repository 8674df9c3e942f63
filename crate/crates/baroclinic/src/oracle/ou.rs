//! Closed-form stationary statistics of the linearized system.
//!
//! With the nonlinearity off, every real degree of freedom at a fixed
//! (degree, order) evolves as a two-layer Ornstein-Uhlenbeck pair
//!
//!   dx = -M x dt + A1^{-1} diag(b1, b2) dW,   M = A1^{-1} (nu A2 + A3),
//!
//! whose stationary covariance solves the continuous Lyapunov equation.
//! Summing per-mode closed forms gives exact moments against which the
//! integrator and the statistics pipeline are validated.

use std::collections::BTreeMap;

use crate::linalg::{lyapunov_solve, Mat2};
use crate::model::ModelParams;
use crate::num::Real;
use crate::sde::{Layer, NoiseSpectrum};
use crate::sphere::laplacian_eigenvalue;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum OracleError {
    #[error("drift at degree {l} is not positive stable; parameters violate dissipativity")]
    NonDissipative { l: usize },
    #[error("Lyapunov system at degree {l} is singular")]
    SingularLyapunov { l: usize },
    #[error("invalid step ladder: {0}")]
    Ladder(String),
}

/// One forced (degree, signed-order) pair: the coupled two-layer OU system
/// of that real harmonic.
#[derive(Clone, Copy, Debug)]
pub struct ModeOU<T> {
    pub l: usize,
    pub m: i64,
    /// Effective amplitudes (b1 barotropic, b2 baroclinic), zero if the
    /// layer is unforced at this harmonic.
    pub amplitudes: [T; 2],
    /// Drift M = A1^{-1}(nu A2 + A3).
    pub drift: Mat2<T>,
    /// Forcing covariance Q = A1^{-1} diag(b^2) A1^{-1}.
    pub forcing: Mat2<T>,
    /// Stationary covariance.
    pub sigma: Mat2<T>,
}

/// Exact stationary covariance of dx = -M x dt + noise with covariance
/// rate Q: solves M Sigma + Sigma M^T = Q.
pub fn ou_stationary_covariance<T: Real>(
    l: usize,
    drift: &Mat2<T>,
    forcing: &Mat2<T>,
) -> Result<Mat2<T>, OracleError> {
    if !drift.is_positive_stable() {
        return Err(OracleError::NonDissipative { l });
    }
    lyapunov_solve(drift, forcing).ok_or(OracleError::SingularLyapunov { l })
}

/// The forced modes of a configuration with their solved covariances.
pub fn forced_modes<T: Real>(
    params: &ModelParams<T>,
    noise: &NoiseSpectrum<T>,
) -> Result<Vec<ModeOU<T>>, OracleError> {
    let mut groups: BTreeMap<(usize, i64), [T; 2]> = BTreeMap::new();
    for e in noise.entries() {
        let slot = groups.entry((e.l, e.m)).or_insert([T::zero(); 2]);
        let b = noise.effective_amplitude(params.nu, e);
        match e.layer {
            Layer::Barotropic => slot[0] = b,
            Layer::Baroclinic => slot[1] = b,
        }
    }
    let mut modes = Vec::with_capacity(groups.len());
    for ((l, m), amplitudes) in groups {
        let [a1_1, a1_2] = params.a1_diag(l);
        let a1_inv = Mat2::diag(a1_1.recip(), a1_2.recip());
        let drift = a1_inv.mul(&params.dissipation_matrix(l));
        let [b1, b2] = amplitudes;
        let forcing = Mat2::diag(b1 * b1 / (a1_1 * a1_1), b2 * b2 / (a1_2 * a1_2));
        let sigma = ou_stationary_covariance(l, &drift, &forcing)?;
        modes.push(ModeOU {
            l,
            m,
            amplitudes,
            drift,
            forcing,
            sigma,
        });
    }
    Ok(modes)
}

/// Gaussian exponential moment E exp(theta |||A1 u|||_0^2): finite value
/// or the first mode whose Gaussian integral diverges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExpMomentOracle<T> {
    Finite(T),
    Divergent { l: usize, m: i64 },
}

/// Exact stationary moments of the linearized system.
#[derive(Clone, Copy, Debug)]
pub struct LinearMoments<T> {
    pub norm0_sq: T,
    pub norm1_sq: T,
    pub norm2_sq: T,
    pub norm3_sq: T,
    /// E <A2 u, A1 u>.
    pub a2_a1: T,
    /// E <A2 u, u> (equals norm2_sq).
    pub a2_u: T,
    /// E <A3 u, u>.
    pub a3_u: T,
    /// E <A3' u, u>.
    pub a3_prime_u: T,
    /// E |||A1 u|||_0^2.
    pub a1_norm0_sq: T,
    /// E exp(theta |||A1 u|||_0^2) for the theta passed in.
    pub exp_moment: ExpMomentOracle<T>,
}

/// Sums the per-mode closed forms. `theta` is the coefficient in the
/// exponential functional (kappa* nu for the stationary bound).
pub fn oracle_moments<T: Real>(
    params: &ModelParams<T>,
    noise: &NoiseSpectrum<T>,
    theta: T,
) -> Result<LinearMoments<T>, OracleError> {
    let modes = forced_modes(params, noise)?;
    let mut m = LinearMoments {
        norm0_sq: T::zero(),
        norm1_sq: T::zero(),
        norm2_sq: T::zero(),
        norm3_sq: T::zero(),
        a2_a1: T::zero(),
        a2_u: T::zero(),
        a3_u: T::zero(),
        a3_prime_u: T::zero(),
        a1_norm0_sq: T::zero(),
        exp_moment: ExpMomentOracle::Finite(T::one()),
    };
    let mut log_exp = T::zero();
    let mut divergent = None;
    for mode in &modes {
        let lam = laplacian_eigenvalue::<T>(mode.l);
        let s = mode.sigma;
        let total = s.a + s.d;
        m.norm0_sq += total;
        m.norm1_sq += lam * total;
        m.norm2_sq += lam * lam * total;
        m.norm3_sq += lam * lam * lam * total;
        let [a1_1, a1_2] = params.a1_diag(mode.l);
        m.a2_a1 += lam * lam * (a1_1 * s.a + a1_2 * s.d);
        m.a2_u += lam * lam * total;
        let a3 = params.a3_matrix(mode.l);
        m.a3_u += a3.mul(&s).trace();
        let a3p = params.a3_prime_matrix(mode.l);
        m.a3_prime_u += a3p.mul(&s).trace();
        // Covariance of the A1 u coefficients at this mode.
        let a1 = Mat2::diag(a1_1, a1_2);
        let c = a1.mul(&s).mul(&a1);
        m.a1_norm0_sq += c.trace();
        if divergent.is_none() {
            for sig in c.sym_eigenvalues() {
                let factor = T::one() - (theta + theta) * sig;
                if factor <= T::zero() {
                    divergent = Some((mode.l, mode.m));
                } else {
                    log_exp -= T::of(0.5) * factor.ln();
                }
            }
        }
    }
    m.exp_moment = match divergent {
        Some((l, mm)) => ExpMomentOracle::Divergent { l, m: mm },
        None => ExpMomentOracle::Finite(log_exp.exp()),
    };
    Ok(m)
}
