//! Gauss-Legendre quadrature nodes and weights on (-1, 1).
//!
//! Nodes are the roots of the Legendre polynomial P_n, found by Newton
//! iteration from the Chebyshev-based initial guess; the rule integrates
//! polynomials up to degree 2n-1 exactly, which is what makes the
//! spherical transforms in this crate exact on band-limited fields.

use crate::num::Real;

/// Value and derivative of P_n at x via the three-term recurrence.
fn legendre_pair<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p_prev = T::one();
    let mut p = x;
    for k in 2..=n {
        let kf = T::of_usize(k);
        let next = ((T::of(2.0) * kf - T::one()) * x * p - (kf - T::one()) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let deriv = T::of_usize(n) * (x * p - p_prev) / (x * x - T::one());
    (p, deriv)
}

/// Returns (nodes, weights) with nodes in increasing order.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let tol = T::epsilon() * T::of(4.0);
    for i in 0..n {
        // Initial guess for the i-th root in decreasing order.
        let theta = T::PI() * (T::of_usize(i) + T::of(0.75)) / (T::of_usize(n) + T::of(0.5));
        let mut x = theta.cos();
        let mut dp = T::one();
        for _ in 0..60 {
            let (p, d) = legendre_pair(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= tol * (T::one() + x.abs()) {
                let (p2, d2) = legendre_pair(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = T::of(2.0) / ((T::one() - x * x) * dp * dp);
    }
    // The rule is symmetric; average the two halves to remove the tiny
    // asymmetric round-off left by independent Newton solves.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let node = (nodes[j] - nodes[i]) * T::of(0.5);
        nodes[i] = -node;
        nodes[j] = node;
        let w = (weights[i] + weights[j]) * T::of(0.5);
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}
