//! Tables of fully normalized associated Legendre functions.
//!
//! P_l^m here is normalized so that Y_l^m = P_l^m(mu) e^{i m lambda} has
//! unit L2 norm over the sphere, i.e. 2*pi * int P_l^m(mu)^2 dmu = 1, with
//! a positive leading sign (no Condon-Shortley phase). Values and
//! mu-derivatives are tabulated once per grid at the quadrature nodes and
//! shared immutably by all transforms.

use crate::num::Real;

pub(crate) struct LegendreTables<T> {
    l_max: usize,
    n_lat: usize,
    /// Per order m: rows for l = max(1, m)..=l_max, each of length n_lat.
    value: Vec<Vec<T>>,
    /// dP_l^m/dmu at the nodes, same layout as `value`.
    deriv: Vec<Vec<T>>,
}

impl<T: Real> LegendreTables<T> {
    pub fn new(l_max: usize, nodes: &[T]) -> Self {
        assert!(l_max >= 1);
        let n = nodes.len();
        let one = T::one();
        let inv_sqrt_4pi = (T::of(4.0) * T::PI()).sqrt().recip();
        let s: Vec<T> = nodes.iter().map(|&mu| (one - mu * mu).sqrt()).collect();

        let mut value = Vec::with_capacity(l_max + 1);
        let mut deriv = Vec::with_capacity(l_max + 1);
        // Sectoral values P_m^m carried across the m loop.
        let mut pmm = vec![inv_sqrt_4pi; n];
        for m in 0..=l_max {
            if m > 0 {
                let f = (T::of_usize(2 * m + 1) / T::of_usize(2 * m)).sqrt();
                for j in 0..n {
                    pmm[j] = pmm[j] * s[j] * f;
                }
            }
            let lmin = m.max(1);
            let rows = l_max + 1 - lmin;
            let mut val_m = vec![T::zero(); rows * n];
            let mut der_m = vec![T::zero(); rows * n];
            let mut p_prev = vec![T::zero(); n];
            let mut p = pmm.clone();
            for l in m..=l_max {
                if l > m {
                    let lf2 = T::of_usize(l * l);
                    let a = ((T::of(4.0) * lf2 - one) / (lf2 - T::of_usize(m * m))).sqrt();
                    let lm1 = T::of_usize((l - 1) * (l - 1));
                    let b = ((lm1 - T::of_usize(m * m)) / (T::of(4.0) * lm1 - one)).sqrt();
                    for j in 0..n {
                        let next = a * (nodes[j] * p[j] - b * p_prev[j]);
                        p_prev[j] = p[j];
                        p[j] = next;
                    }
                }
                if l >= lmin {
                    let row = l - lmin;
                    let d = if l == m {
                        T::zero()
                    } else {
                        (T::of_usize((l * l - m * m) * (2 * l + 1)) / T::of_usize(2 * l - 1)).sqrt()
                    };
                    let lf = T::of_usize(l);
                    for j in 0..n {
                        val_m[row * n + j] = p[j];
                        der_m[row * n + j] =
                            (d * p_prev[j] - lf * nodes[j] * p[j]) / (one - nodes[j] * nodes[j]);
                    }
                }
            }
            value.push(val_m);
            deriv.push(der_m);
        }
        Self {
            l_max,
            n_lat: n,
            value,
            deriv,
        }
    }

    #[inline]
    pub fn value_row(&self, m: usize, l: usize) -> &[T] {
        let lmin = m.max(1);
        debug_assert!(m <= l && l <= self.l_max);
        let row = l - lmin;
        &self.value[m][row * self.n_lat..(row + 1) * self.n_lat]
    }

    #[inline]
    pub fn deriv_row(&self, m: usize, l: usize) -> &[T] {
        let lmin = m.max(1);
        let row = l - lmin;
        &self.deriv[m][row * self.n_lat..(row + 1) * self.n_lat]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::gauss::gauss_legendre;

    const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

    fn tables(l_max: usize, n: usize) -> (LegendreTables<f64>, Vec<f64>, Vec<f64>) {
        let (mu, w) = gauss_legendre::<f64>(n);
        (LegendreTables::new(l_max, &mu), mu, w)
    }

    #[test]
    fn low_degree_values_match_closed_forms() {
        let (t, mu, _) = tables(2, 8);
        for (j, &m) in mu.iter().enumerate() {
            let s = (1.0 - m * m).sqrt();
            let p10 = (3.0 / FOUR_PI).sqrt() * m;
            let p11 = (3.0 / (2.0 * FOUR_PI)).sqrt() * s;
            let p20 = (5.0 / FOUR_PI).sqrt() * 0.5 * (3.0 * m * m - 1.0);
            let p21 = (15.0 / (2.0 * FOUR_PI)).sqrt() * m * s;
            assert!((t.value_row(0, 1)[j] - p10).abs() < 1e-14);
            assert!((t.value_row(1, 1)[j] - p11).abs() < 1e-14);
            assert!((t.value_row(0, 2)[j] - p20).abs() < 1e-14);
            assert!((t.value_row(1, 2)[j] - p21).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_match_closed_forms() {
        let (t, mu, _) = tables(2, 8);
        for (j, &m) in mu.iter().enumerate() {
            let s = (1.0 - m * m).sqrt();
            let d10 = (3.0 / FOUR_PI).sqrt();
            let d20 = (5.0 / FOUR_PI).sqrt() * 3.0 * m;
            let d21 = (15.0 / (2.0 * FOUR_PI)).sqrt() * (1.0 - 2.0 * m * m) / s;
            assert!((t.deriv_row(0, 1)[j] - d10).abs() < 1e-13);
            assert!((t.deriv_row(0, 2)[j] - d20).abs() < 1e-13);
            assert!((t.deriv_row(1, 2)[j] - d21).abs() < 1e-12);
        }
    }

    #[test]
    fn rows_are_orthonormal_under_gauss_quadrature() {
        let l_max = 12;
        let (t, _, w) = tables(l_max, l_max + 1);
        for m in 0..=l_max {
            for l in m.max(1)..=l_max {
                for lp in m.max(1)..=l_max {
                    let dot: f64 = (0..w.len())
                        .map(|j| w[j] * t.value_row(m, l)[j] * t.value_row(m, lp)[j])
                        .sum();
                    let expect = if l == lp {
                        1.0 / (2.0 * std::f64::consts::PI)
                    } else {
                        0.0
                    };
                    assert!(
                        (dot - expect).abs() < 1e-13,
                        "m={m} l={l} lp={lp}: {dot} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn sturm_liouville_energy_recovers_eigenvalue() {
        // int (1-mu^2) (dP/dmu)^2 + m^2 P^2/(1-mu^2) dmu = l(l+1)/(2 pi),
        // and the integrand is a polynomial the quadrature handles exactly.
        let l_max = 9;
        let (t, mu, w) = tables(l_max, l_max + 1);
        for m in 0..=l_max {
            for l in m.max(1)..=l_max {
                let q: f64 = (0..w.len())
                    .map(|j| {
                        let omm = 1.0 - mu[j] * mu[j];
                        let p = t.value_row(m, l)[j];
                        let d = t.deriv_row(m, l)[j];
                        w[j] * (omm * d * d + (m * m) as f64 * p * p / omm)
                    })
                    .sum();
                let expect = (l * (l + 1)) as f64 / (2.0 * std::f64::consts::PI);
                assert!(
                    (q - expect).abs() < 1e-11 * expect.max(1.0),
                    "m={m} l={l}: {q} vs {expect}"
                );
            }
        }
    }
}
