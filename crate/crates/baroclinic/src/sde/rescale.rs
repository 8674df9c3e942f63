//! Change of variables that maps a run with noise exponent alpha < 1/2
//! onto the critical exponent 1/2.
//!
//! With beta = 1/2 - alpha, the substitution v = nu^beta u, tau = nu^beta t
//! turns the scaled-friction system at (nu, alpha) into the same system at
//! (nu^(1+beta), 1/2), with the Coriolis strength multiplied by nu^beta.
//! Statistics transfer exactly: time averages over [0, T] of |||u|||_p^2
//! correspond to averages over [0, T / nu^beta] of nu^(-2 beta) |||v|||_p^2.

use crate::model::{FrictionRegime, ModelParams};
use crate::num::Real;

use super::noise::NoiseSpectrum;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RescaleError {
    #[error("rescaling applies only to noise exponents alpha < 1/2, got {0}")]
    AlphaNotBelowHalf(f64),
    #[error("rescaling requires the scaled-friction regime")]
    FixedFriction,
}

/// The equivalent critical-exponent system and the exponent beta used in
/// the substitution.
#[derive(Clone, Debug, PartialEq)]
pub struct RescaledSystem<T> {
    pub params: ModelParams<T>,
    pub noise: NoiseSpectrum<T>,
    pub beta: T,
}

impl<T: Real> RescaledSystem<T> {
    /// Time-horizon map: a span T for the original system corresponds to
    /// T / nu^beta for the rescaled one.
    pub fn rescaled_horizon(&self, original_nu: T, span: T) -> T {
        span / original_nu.powf(self.beta)
    }

    /// Factor turning rescaled-system moments |||v|||_p^2 back into
    /// original-system moments: |||u|||_p^2 = nu^(-2 beta) |||v|||_p^2.
    pub fn moment_factor(&self, original_nu: T) -> T {
        original_nu.powf(-(self.beta + self.beta))
    }
}

/// Builds the critical-exponent twin of a sub-critical configuration.
pub fn rescale_config<T: Real>(
    params: &ModelParams<T>,
    noise: &NoiseSpectrum<T>,
) -> Result<RescaledSystem<T>, RescaleError> {
    if params.regime != FrictionRegime::Scaled {
        return Err(RescaleError::FixedFriction);
    }
    let half = T::of(0.5);
    let alpha = noise.alpha();
    if !(alpha < half) {
        return Err(RescaleError::AlphaNotBelowHalf(
            alpha.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let beta = half - alpha;
    let nu_beta = params.nu.powf(beta);
    let mut rescaled = *params;
    rescaled.nu = params.nu.powf(T::one() + beta);
    rescaled.coriolis_scale = params.coriolis_scale * nu_beta;
    Ok(RescaledSystem {
        params: rescaled,
        noise: noise
            .with_alpha(half)
            .expect("entries were already validated"),
        beta,
    })
}
