//! Whole-state application of the per-mode linear operators.

use super::params::ModelParams;
use super::state::State;
use crate::linalg::Mat2;
use crate::num::Real;
use crate::sphere::SpectralField;

/// Applies a per-degree 2x2 block to every (l, m) coefficient pair.
fn apply_blocks<T: Real>(state: &State<T>, block: impl Fn(usize) -> Mat2<T>) -> State<T> {
    let l_max = state.l_max();
    let mut out = State::zeros(l_max);
    for l in 1..=l_max {
        let b = block(l);
        for m in 0..=l {
            let v = b.apply_complex([state.u1.get(l, m), state.u2.get(l, m)]);
            out.u1.set(l, m, v[0]);
            out.u2.set(l, m, v[1]);
        }
    }
    out
}

/// A1 u: the energy metric (-Laplacian on layer 1, -Laplacian + gamma on
/// layer 2).
pub fn a1_apply<T: Real>(params: &ModelParams<T>, state: &State<T>) -> State<T> {
    apply_blocks(state, |l| {
        let [d1, d2] = params.a1_diag(l);
        Mat2::diag(d1, d2)
    })
}

/// A1^{-1} u; well defined because lambda >= 2 and gamma >= 0.
pub fn a1_solve<T: Real>(params: &ModelParams<T>, state: &State<T>) -> State<T> {
    apply_blocks(state, |l| {
        let [d1, d2] = params.a1_diag(l);
        Mat2::diag(d1.recip(), d2.recip())
    })
}

/// (nu A2 + A3) u for the configured variant and friction regime.
pub fn dissipation_apply<T: Real>(params: &ModelParams<T>, state: &State<T>) -> State<T> {
    apply_blocks(state, |l| params.dissipation_matrix(l))
}

/// Precomputed per-degree blocks for one (params, truncation, dt) triple:
/// A1, the dissipation block and the factorized implicit-step matrix
/// (A1 + dt (nu A2 + A3))^{-1}. Immutable after construction and shared
/// across threads.
#[derive(Clone, Debug)]
pub struct PerModeOperators<T> {
    l_max: usize,
    dt: T,
    a1: Vec<[T; 2]>,
    dissipation: Vec<Mat2<T>>,
    implicit_inv: Vec<Mat2<T>>,
}

impl<T: Real> PerModeOperators<T> {
    pub fn new(params: &ModelParams<T>, l_max: usize, dt: T) -> Self {
        let mut a1 = Vec::with_capacity(l_max);
        let mut dissipation = Vec::with_capacity(l_max);
        let mut implicit_inv = Vec::with_capacity(l_max);
        for l in 1..=l_max {
            a1.push(params.a1_diag(l));
            dissipation.push(params.dissipation_matrix(l));
            implicit_inv.push(
                params
                    .implicit_matrix(l, dt)
                    .inverse()
                    .expect("implicit matrix is invertible for dt >= 0"),
            );
        }
        Self {
            l_max,
            dt,
            a1,
            dissipation,
            implicit_inv,
        }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn a1_block(&self, l: usize) -> [T; 2] {
        self.a1[l - 1]
    }

    pub fn dissipation_block(&self, l: usize) -> Mat2<T> {
        self.dissipation[l - 1]
    }

    pub fn implicit_inverse_block(&self, l: usize) -> Mat2<T> {
        self.implicit_inv[l - 1]
    }

    /// In-place A1 application on layer coefficient pairs.
    pub fn a1_apply_inplace(&self, u1: &mut SpectralField<T>, u2: &mut SpectralField<T>) {
        for l in 1..=self.l_max {
            let [d1, d2] = self.a1[l - 1];
            for m in 0..=l {
                let c1 = u1.coeff_mut(l, m);
                *c1 *= d1;
                let c2 = u2.coeff_mut(l, m);
                *c2 *= d2;
            }
        }
    }

    /// Solves (A1 + dt (nu A2 + A3)) x = rhs in place.
    pub fn implicit_solve_inplace(&self, rhs: &mut State<T>) {
        for l in 1..=self.l_max {
            let inv = self.implicit_inv[l - 1];
            for m in 0..=l {
                let v = inv.apply_complex([rhs.u1.get(l, m), rhs.u2.get(l, m)]);
                rhs.u1.set(l, m, v[0]);
                rhs.u2.set(l, m, v[1]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params::{FrictionRegime, OperatorVariant};
    use num_complex::Complex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> ModelParams<f64> {
        ModelParams {
            nu: 1.0,
            gamma: 1.0,
            rho: 0.5,
            k0: 0.1,
            k1: 1.0,
            variant: OperatorVariant::A3,
            regime: FrictionRegime::Fixed,
            coriolis_scale: 2.0,
        }
    }

    #[test]
    fn a1_solve_inverts_a1_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let p = params();
        let s = State::random(&mut rng, 8, 0.5);
        let back = a1_solve(&p, &a1_apply(&p, &s));
        for l in 1..=8 {
            for m in 0..=l {
                assert!((back.u1.get(l, m) - s.u1.get(l, m)).norm() < 1e-14);
                assert!((back.u2.get(l, m) - s.u2.get(l, m)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn a1_apply_on_single_modes_matches_eigenvalues() {
        let p = params();
        let mut s = State::zeros(3);
        s.u1.set(1, 0, Complex::new(1.0, 0.0));
        s.u2.set(3, 1, Complex::new(0.0, 2.0));
        let a = a1_apply(&p, &s);
        assert_eq!(a.u1.get(1, 0), Complex::new(2.0, 0.0));
        assert_eq!(a.u2.get(3, 1), Complex::new(0.0, 26.0)); // (12 + 1) * 2
    }

    #[test]
    fn dissipation_apply_matches_hand_value_on_lowest_mode() {
        let mut p = params();
        p.gamma = 0.0;
        p.rho = 0.0;
        p.k1 = 0.0;
        let mut s = State::zeros(2);
        s.u1.set(1, 0, Complex::new(1.0, 0.0));
        let d = dissipation_apply(&p, &s);
        assert!((d.u1.get(1, 0).re - 4.2).abs() < 1e-15);
        assert!((d.u2.get(1, 0).re + 0.2).abs() < 1e-15);
    }

    #[test]
    fn implicit_solve_then_multiply_recovers_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = params();
        let dt = 0.05;
        let ops = PerModeOperators::new(&p, 6, dt);
        let rhs = State::random(&mut rng, 6, 0.3);
        let mut x = rhs.clone();
        ops.implicit_solve_inplace(&mut x);
        // Multiply back: (A1 + dt D) x.
        let mut ax = a1_apply(&p, &x);
        ax.axpy(dt, &dissipation_apply(&p, &x));
        for l in 1..=6 {
            for m in 0..=l {
                assert!((ax.u1.get(l, m) - rhs.u1.get(l, m)).norm() < 1e-12);
                assert!((ax.u2.get(l, m) - rhs.u2.get(l, m)).norm() < 1e-12);
            }
        }
    }
}
