//! The quadratic advection operator B(u) and its Coriolis part.
//!
//! B(u) = ( J(Delta u1 + c mu, u1) + J(Delta u2, u2),
//!          J(Delta u2 - gamma u2, u1) + J(Delta u1 + c mu, u2) )
//!
//! with J(psi, theta) = psi_lambda theta_mu - psi_mu theta_lambda and
//! c = coriolis_scale (2 on the unscaled sphere). Every Jacobian is
//! evaluated pseudospectrally: the two absolute-vorticity fields
//! chi1 = Delta u1 + c mu and chi2 = Delta u2 and the stream functions are
//! synthesized as lambda- and mu-derivative grids, combined pointwise,
//! and the two products are analyzed back at the state's truncation. One
//! call costs eight syntheses and two analyses.

use super::params::ModelParams;
use super::state::State;
use crate::num::Real;
use crate::sphere::{GridField, SphereError, SphericalGrid};

pub fn b_nonlinear<T: Real>(
    params: &ModelParams<T>,
    state: &State<T>,
    grid: &SphericalGrid<T>,
) -> Result<State<T>, SphereError> {
    let l_max = state.l_max();
    grid.check_dealias(l_max)?;

    // chi1 = Delta u1 + c mu; mu = sqrt(4 pi / 3) Y_1^0.
    let mut chi1 = state.u1.laplacian_apply(1);
    chi1.scale(-T::one());
    let c_mu = params.coriolis_scale * (T::of(4.0) * T::PI() / T::of(3.0)).sqrt();
    {
        let c = chi1.coeff_mut(1, 0);
        c.re += c_mu;
    }
    let mut chi2 = state.u2.laplacian_apply(1);
    chi2.scale(-T::one());

    let chi1_lam = grid.sht_synthesis(&chi1.lambda_derivative())?;
    let chi1_mu = grid.synthesis_mu_derivative(&chi1)?;
    let chi2_lam = grid.sht_synthesis(&chi2.lambda_derivative())?;
    let chi2_mu = grid.synthesis_mu_derivative(&chi2)?;
    let u1_lam = grid.sht_synthesis(&state.u1.lambda_derivative())?;
    let u1_mu = grid.synthesis_mu_derivative(&state.u1)?;
    let u2_lam = grid.sht_synthesis(&state.u2.lambda_derivative())?;
    let u2_mu = grid.synthesis_mu_derivative(&state.u2)?;

    let one = T::one();
    let gamma = params.gamma;

    // Layer 1: J(chi1, u1) + J(chi2, u2).
    let mut b1 = GridField::zeros(grid.n_lat(), grid.n_lon());
    b1.add_product(one, &chi1_lam, &u1_mu);
    b1.add_product(-one, &chi1_mu, &u1_lam);
    b1.add_product(one, &chi2_lam, &u2_mu);
    b1.add_product(-one, &chi2_mu, &u2_lam);

    // Layer 2: J(chi2 - gamma u2, u1) + J(chi1, u2); the gamma part is
    // expanded as -gamma J(u2, u1).
    let mut b2 = GridField::zeros(grid.n_lat(), grid.n_lon());
    b2.add_product(one, &chi2_lam, &u1_mu);
    b2.add_product(-one, &chi2_mu, &u1_lam);
    b2.add_product(-gamma, &u2_lam, &u1_mu);
    b2.add_product(gamma, &u2_mu, &u1_lam);
    b2.add_product(one, &chi1_lam, &u2_mu);
    b2.add_product(-one, &chi1_mu, &u2_lam);

    Ok(State::new(
        grid.sht_analysis(&b1)?.resized(l_max),
        grid.sht_analysis(&b2)?.resized(l_max),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::norms::sobolev_norm_sq;
    use crate::model::params::{FrictionRegime, OperatorVariant};
    use num_complex::Complex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(gamma: f64, coriolis: f64) -> ModelParams<f64> {
        ModelParams {
            nu: 1.0,
            gamma,
            rho: 0.0,
            k0: 0.0,
            k1: 0.0,
            variant: OperatorVariant::A3,
            regime: FrictionRegime::Fixed,
            coriolis_scale: coriolis,
        }
    }

    /// <B(s), s> in H^0, both layers, counting negative orders.
    fn h0_pairing(a: &State<f64>, b: &State<f64>) -> f64 {
        a.u1.weighted_pairing(&b.u1, |_| 1.0) + a.u2.weighted_pairing(&b.u2, |_| 1.0)
    }

    #[test]
    fn vanishes_on_zero_state() {
        let grid = SphericalGrid::<f64>::dealiased(9);
        let b = b_nonlinear(&params(1.0, 2.0), &State::zeros(9), &grid).unwrap();
        assert_eq!(b.u1.max_abs(), 0.0);
        assert_eq!(b.u2.max_abs(), 0.0);
    }

    #[test]
    fn annihilates_zonal_states() {
        let grid = SphericalGrid::<f64>::dealiased(8);
        let mut s = State::<f64>::zeros(8);
        for l in 1..=8 {
            s.u1.set(l, 0, Complex::new(0.3 / l as f64, 0.0));
            s.u2.set(l, 0, Complex::new(-0.2 / l as f64, 0.0));
        }
        let b = b_nonlinear(&params(1.4, 2.0), &s, &grid).unwrap();
        assert!(b.u1.max_abs() < 1e-12);
        assert!(b.u2.max_abs() < 1e-12);
    }

    #[test]
    fn energy_pairing_vanishes_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let grid = SphericalGrid::<f64>::dealiased(10);
        let p = params(1.0, 2.0);
        for _ in 0..20 {
            let s = State::<f64>::random(&mut rng, 10, 0.4);
            let b = b_nonlinear(&p, &s, &grid).unwrap();
            let pairing = h0_pairing(&b, &s);
            let scale = sobolev_norm_sq(&s, 1.0).sqrt() * sobolev_norm_sq(&s, 2.0);
            assert!(pairing.abs() <= 1e-10 * scale, "{pairing} vs scale {scale}");
        }
    }

    #[test]
    fn matches_jacobian_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let grid = SphericalGrid::<f64>::dealiased(7);
        let p = params(0.8, 2.0);
        let s = State::<f64>::random(&mut rng, 7, 0.4);
        let b = b_nonlinear(&p, &s, &grid).unwrap();

        let mut chi1 = s.u1.laplacian_apply(1);
        chi1.scale(-1.0);
        chi1.axpy(1.0, &grid.coriolis_field(p.coriolis_scale).resized(7));
        let mut chi2 = s.u2.laplacian_apply(1);
        chi2.scale(-1.0);
        let mut chi3 = chi2.clone();
        chi3.axpy(-p.gamma, &s.u2);

        let mut b1 = grid.jacobian(&chi1, &s.u1).unwrap();
        b1.axpy(1.0, &grid.jacobian(&chi2, &s.u2).unwrap());
        let mut b2 = grid.jacobian(&chi3, &s.u1).unwrap();
        b2.axpy(1.0, &grid.jacobian(&chi1, &s.u2).unwrap());

        for (l, m, v) in b.u1.iter() {
            assert!((v - b1.get(l, m)).norm() < 1e-12);
        }
        for (l, m, v) in b.u2.iter() {
            assert!((v - b2.get(l, m)).norm() < 1e-12);
        }
    }

    #[test]
    fn coriolis_part_is_minus_scale_times_lambda_derivative() {
        // B_c(u) - B_0(u) = (J(c mu, u1), J(c mu, u2)) = -c (u1_lam, u2_lam).
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let grid = SphericalGrid::<f64>::dealiased(8);
        let s = State::<f64>::random(&mut rng, 8, 0.4);
        let c = 1.7;
        let with = b_nonlinear(&params(1.0, c), &s, &grid).unwrap();
        let without = b_nonlinear(&params(1.0, 0.0), &s, &grid).unwrap();
        let d1 = s.u1.lambda_derivative();
        let d2 = s.u2.lambda_derivative();
        for (l, m, v) in with.u1.iter() {
            let expect = without.u1.get(l, m) - d1.get(l, m) * c;
            assert!((v - expect).norm() < 1e-12);
        }
        for (l, m, v) in with.u2.iter() {
            let expect = without.u2.get(l, m) - d2.get(l, m) * c;
            assert!((v - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn pure_advection_is_quadratically_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let grid = SphericalGrid::<f64>::dealiased(6);
        let p = params(0.6, 0.0);
        let s = State::<f64>::random(&mut rng, 6, 0.5);
        let mut doubled = s.clone();
        doubled.scale(2.0);
        let b1 = b_nonlinear(&p, &s, &grid).unwrap();
        let b2 = b_nonlinear(&p, &doubled, &grid).unwrap();
        for (l, m, v) in b2.u1.iter() {
            assert!((v - b1.u1.get(l, m) * 4.0).norm() < 1e-11);
        }
        for (l, m, v) in b2.u2.iter() {
            assert!((v - b1.u2.get(l, m) * 4.0).norm() < 1e-11);
        }
    }

    #[test]
    fn undersized_grid_is_rejected() {
        // Exact for transforms at L=9 but below the dealiasing bound.
        let grid = SphericalGrid::<f64>::new(9, 10, 19).unwrap();
        let s = State::<f64>::zeros(9);
        assert!(b_nonlinear(&params(1.0, 2.0), &s, &grid).is_err());
    }
}
