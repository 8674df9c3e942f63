//! Stability thresholds and the constant ladders of the stationary
//! estimates.
//!
//! The friction operator is dissipative in the A1 metric exactly when k0
//! stays below a threshold depending on (gamma, k1, rho). Mode l
//! contributes the constraint k0 <= 4 chi(lambda)/(lambda - gamma)^2
//! (standard variant) or k0 <= 4 chi(lambda)/gamma^2 (hat variant), with
//! chi(lambda) = (lambda + gamma)(k1 lambda + rho); the threshold is the
//! infimum over l >= 1, which collapses to a two-branch closed form.
//!
//! The report bundles two ladders of constants: the primed ladder (C1,
//! C2, C3, C4, K, kappa), built from the viscosity-free amplitudes b',
//! and the effective ladder (c1..c4, kappa_star), built from b = nu^alpha
//! b'. The effective c2 is the exact stationary energy balance level
//! E|||u|||_2^2 + (1/nu) E<A3 u, u> = c2.

use super::norms::{pairings, sobolev_norm_sq};
use super::params::{ModelParams, OperatorVariant};
use super::state::State;
use crate::num::Real;
use crate::sde::NoiseSpectrum;
use crate::sphere::laplacian_eigenvalue;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConstantsError {
    #[error("noise spectrum has no entries with positive amplitude; kappa is undefined")]
    ZeroSpectrum,
    #[error("alpha1 must lie in the open interval (0, 2)")]
    Alpha1OutOfRange,
}

/// Constraint on k0 contributed by degree l alone; infinite when the mode
/// imposes none (lambda = gamma for the standard variant, gamma = 0 for
/// the hat variant).
pub fn per_mode_bound<T: Real>(variant: OperatorVariant, l: usize, gamma: T, k1: T, rho: T) -> T {
    let lam = laplacian_eigenvalue::<T>(l);
    let chi = (lam + gamma) * (k1 * lam + rho);
    let denom = match variant {
        OperatorVariant::A3 => (lam - gamma) * (lam - gamma),
        OperatorVariant::A3Hat => gamma * gamma,
    };
    if denom == T::zero() {
        T::infinity()
    } else {
        T::of(4.0) * chi / denom
    }
}

/// Brute-force infimum of the per-mode bounds over 1 <= l <= max_degree.
pub fn k0_threshold_infimum<T: Real>(
    variant: OperatorVariant,
    gamma: T,
    k1: T,
    rho: T,
    max_degree: usize,
) -> T {
    (1..=max_degree)
        .map(|l| per_mode_bound(variant, l, gamma, k1, rho))
        .fold(T::infinity(), T::min)
}

/// Closed form of the threshold: min{4 k1, bound at l = 1} for the
/// standard variant (the l = 1 branch is +inf at gamma = 2), and the
/// l = 1 bound alone for the hat variant (+inf at gamma = 0), where it is
/// attained because the per-mode bound increases in l.
pub fn k0_threshold_closed_form<T: Real>(variant: OperatorVariant, gamma: T, k1: T, rho: T) -> T {
    let lowest = per_mode_bound(variant, 1, gamma, k1, rho);
    match variant {
        OperatorVariant::A3 => (T::of(4.0) * k1).min(lowest),
        OperatorVariant::A3Hat => lowest,
    }
}

/// Threshold for the configured variant. The comparison with k0 is the
/// same whether the stored friction coefficients are read as effective or
/// primed values: both sides scale linearly in nu.
pub fn k0_threshold<T: Real>(params: &ModelParams<T>) -> T {
    k0_threshold_closed_form(params.variant, params.gamma, params.k1, params.rho)
}

/// Outcome of comparing k0 against the threshold. Both the non-strict
/// comparison (needed for the stationary estimates) and the strict one
/// (needed for the fixed-friction inviscid limit) are reported.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityCheck<T> {
    pub threshold: T,
    pub k0: T,
    pub le: bool,
    pub lt: bool,
}

pub fn stability_check<T: Real>(params: &ModelParams<T>) -> StabilityCheck<T> {
    let threshold = k0_threshold(params);
    StabilityCheck {
        threshold,
        k0: params.k0,
        le: params.k0 <= threshold,
        lt: params.k0 < threshold,
    }
}

/// Every named constant of the stationary-measure estimates, evaluated
/// for one (params, noise) pair. Uppercase fields form the primed ladder,
/// lowercase the effective ladder at the given viscosity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport<T> {
    pub nu: T,
    pub gamma: T,
    pub alpha: T,
    pub variant: OperatorVariant,
    pub stability: StabilityCheck<T>,
    /// C1 = b'^2 / 2.
    #[serde(rename = "C1")]
    pub big_c1: T,
    /// C2 = exp(3 + b'^2 / (sup b'_i)^2).
    #[serde(rename = "C2")]
    pub big_c2: T,
    /// kappa = (2/(2+gamma)) (sup b'_i)^{-2}.
    pub kappa: T,
    /// C3 = (1/2) sum b'_i^2 <A1^{-1} E_i, E_i>.
    #[serde(rename = "C3")]
    pub big_c3: T,
    /// C4 = C3^2 / (C1 + 2 K C3), the viscosity-free lower bound level.
    #[serde(rename = "C4")]
    pub big_c4: T,
    /// K = 4 k0' + k1' + gamma + rho' (hat variant: 2 k0' + k1' + rho').
    #[serde(rename = "K")]
    pub big_k: T,
    /// c1 = b^2 / (2 nu).
    pub c1: T,
    /// c2 = (1/(2 nu)) sum b_i^2 <A1^{-1} E_i, E_i>, the balance level.
    pub c2: T,
    /// c3 = 4 k0 + k1 + nu gamma + rho with effective coefficients (hat
    /// variant: 2 k0 + k1 + rho).
    pub c3: T,
    /// c4 = exp(3 + b^2 / (sup b_i)^2).
    pub c4: T,
    /// kappa_star = (2/(2+gamma)) (sup b_i)^{-2}.
    pub kappa_star: T,
    /// c2^2 / (c1 + (4/nu) c2 c3), the lower bound on E|||u|||_1^2.
    pub norm1_lower_bound: T,
    pub alpha1: Option<T>,
    /// alpha2 = 4 alpha1 nu / (2 + gamma)^2 when alpha1 is given.
    pub alpha2: Option<T>,
}

pub fn constants_report<T: Real>(
    params: &ModelParams<T>,
    noise: &NoiseSpectrum<T>,
) -> Result<ConstantsReport<T>, ConstantsError> {
    let one = T::one();
    let sup_primed = noise.sup_b(one);
    if noise.is_empty() || !(sup_primed > T::zero()) {
        return Err(ConstantsError::ZeroSpectrum);
    }
    let two = T::of(2.0);
    let gamma = params.gamma;
    let nu = params.nu;

    let primed_sq = noise.sum_b_sq(one);
    let primed_weighted = noise.weighted_a1_inverse_sum(one, gamma);
    let big_k = match params.variant {
        OperatorVariant::A3 => T::of(4.0) * params.k0 + params.k1 + gamma + params.rho,
        OperatorVariant::A3Hat => two * params.k0 + params.k1 + params.rho,
    };
    let big_c1 = primed_sq / two;
    let big_c2 = (T::of(3.0) + primed_sq / (sup_primed * sup_primed)).exp();
    let kappa = two / (two + gamma) / (sup_primed * sup_primed);
    let big_c3 = primed_weighted / two;
    let big_c4 = big_c3 * big_c3 / (big_c1 + two * big_k * big_c3);

    let eff_sq = noise.sum_b_sq(nu);
    let sup_eff = noise.sup_b(nu);
    let c1 = eff_sq / (two * nu);
    let c2 = noise.weighted_a1_inverse_sum(nu, gamma) / (two * nu);
    let c3 = match params.variant {
        OperatorVariant::A3 => {
            T::of(4.0) * params.effective_k0()
                + params.effective_k1()
                + nu * gamma
                + params.effective_rho()
        }
        OperatorVariant::A3Hat => {
            two * params.effective_k0() + params.effective_k1() + params.effective_rho()
        }
    };
    let c4 = (T::of(3.0) + eff_sq / (sup_eff * sup_eff)).exp();
    let kappa_star = two / (two + gamma) / (sup_eff * sup_eff);
    let norm1_lower_bound = c2 * c2 / (c1 + T::of(4.0) / nu * c2 * c3);

    Ok(ConstantsReport {
        nu,
        gamma,
        alpha: noise.alpha(),
        variant: params.variant,
        stability: stability_check(params),
        big_c1,
        big_c2,
        kappa,
        big_c3,
        big_c4,
        big_k,
        c1,
        c2,
        c3,
        c4,
        kappa_star,
        norm1_lower_bound,
        alpha1: None,
        alpha2: None,
    })
}

/// As `constants_report`, additionally evaluating the dissipation-rate
/// pair (alpha1, alpha2); alpha1 must lie in (0, 2).
pub fn constants_report_with_alpha1<T: Real>(
    params: &ModelParams<T>,
    noise: &NoiseSpectrum<T>,
    alpha1: T,
) -> Result<ConstantsReport<T>, ConstantsError> {
    if !(alpha1 > T::zero() && alpha1 < T::of(2.0)) {
        return Err(ConstantsError::Alpha1OutOfRange);
    }
    let mut report = constants_report(params, noise)?;
    let g2 = (T::of(2.0) + params.gamma) * (T::of(2.0) + params.gamma);
    report.alpha1 = Some(alpha1);
    report.alpha2 = Some(T::of(4.0) * alpha1 * params.nu / g2);
    Ok(report)
}

/// Positivity check used by the property tests: <A3 s, A1 s> with an
/// explicit tolerance relative to |||s|||_2^2.
pub fn a3_a1_nonnegative<T: Real>(params: &ModelParams<T>, state: &State<T>, tol: T) -> bool {
    let p = pairings(params, state);
    p.a3_a1 >= -tol * sobolev_norm_sq(state, T::of(2.0))
}
