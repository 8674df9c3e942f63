//! Sobolev norms and the quadratic pairings entering the energy balance.

use super::params::ModelParams;
use super::state::State;
use crate::linalg::Mat2;
use crate::num::Real;

/// Squared Sobolev norm |||u|||_p^2 = sum_l lambda_l^p (|a1|^2 + |a2|^2),
/// counting both signed orders. The exponent may be any real number.
pub fn sobolev_norm_sq<T: Real>(state: &State<T>, p: T) -> T {
    state.u1.weighted_energy(|lam| lam.powf(p)) + state.u2.weighted_energy(|lam| lam.powf(p))
}

pub fn sobolev_norm<T: Real>(state: &State<T>, p: T) -> T {
    sobolev_norm_sq(state, p).sqrt()
}

/// sum over modes of Re <A x, B x> with per-degree real blocks A, B and
/// x the layer coefficient pair, including the implied negative orders.
fn block_pairing<T: Real>(
    state: &State<T>,
    a: impl Fn(usize) -> Mat2<T>,
    b: impl Fn(usize) -> Mat2<T>,
) -> T {
    let two = T::of(2.0);
    let mut total = T::zero();
    for l in 1..=state.l_max() {
        let ma = a(l);
        let mb = b(l);
        let mut mode = T::zero();
        for m in 0..=l {
            let x = [state.u1.get(l, m), state.u2.get(l, m)];
            let ax = ma.apply_complex(x);
            let bx = mb.apply_complex(x);
            let dot = (ax[0] * bx[0].conj() + ax[1] * bx[1].conj()).re;
            mode += if m == 0 { dot } else { two * dot };
        }
        total += mode;
    }
    total
}

/// The quadratic functionals tracked by the statistics layer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pairings<T> {
    /// <A1 u, u>: twice the total energy.
    pub a1_u: T,
    /// <A2 u, A1 u> = sum lambda^3 |a1|^2 + lambda^2 (lambda + gamma)|a2|^2.
    pub a2_a1: T,
    /// <A3 u, u> for the configured variant and regime.
    pub a3_u: T,
    /// <A3 u, A1 u>, nonnegative below the k0 threshold.
    pub a3_a1: T,
    /// <A3' u, u> with the primed (viscosity-free) friction block.
    pub a3_prime_u: T,
    /// |||A1 u|||_0^2 = sum lambda^2 |a1|^2 + (lambda + gamma)^2 |a2|^2.
    pub a1_norm0_sq: T,
}

pub fn pairings<T: Real>(params: &ModelParams<T>, state: &State<T>) -> Pairings<T> {
    let ident = |_l: usize| Mat2::identity();
    let a1 = |l: usize| {
        let [d1, d2] = params.a1_diag(l);
        Mat2::diag(d1, d2)
    };
    let a2 = |l: usize| {
        let [d1, d2] = params.a2_diag(l);
        Mat2::diag(d1, d2)
    };
    Pairings {
        a1_u: block_pairing(state, a1, ident),
        a2_a1: block_pairing(state, a2, a1),
        a3_u: block_pairing(state, |l| params.a3_matrix(l), ident),
        a3_a1: block_pairing(state, |l| params.a3_matrix(l), a1),
        a3_prime_u: block_pairing(state, |l| params.a3_prime_matrix(l), ident),
        a1_norm0_sq: block_pairing(state, a1, a1),
    }
}
