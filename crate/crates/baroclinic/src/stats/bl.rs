//! Dual bounded-Lipschitz (flat) distance between one-dimensional
//! empirical laws:
//!
//!   d(p, q) = sup { integral of psi d(p - q) : ||psi||_inf + Lip(psi) <= 1 }.
//!
//! On a finite support x_1 < ... < x_K with net masses c_k = p_k - q_k the
//! optimizer is piecewise linear with knots at the x_k, and splitting the
//! norm budget as ||psi||_inf <= a, Lip <= 1 - a gives
//!
//!   d = max_{a in [0,1]} V(a),
//!   V(a) = min_h [ a sum_k |h_k - h_{k-1}|
//!                  + (1-a) sum_{k<K} (x_{k+1} - x_k) |h_k - C_k| ],
//!
//! with h_0 = h_K = 0 and C_k the cumulative mass (Lagrangian dual of the
//! inner maximization; V is concave in a). The inner problem is a 1-D
//! total-variation / weighted-L1 form solved exactly by dynamic
//! programming over convex piecewise-linear value functions; the outer
//! maximization is a ternary search.

use crate::num::Real;

use super::accumulator::StatsError;
use super::sample::EmpiricalSample;

/// Samples larger than this are thinned to this many quantile
/// representatives before the distance is computed, keeping the exact
/// solve quadratic in a bounded support size.
pub const BL_SUPPORT_CAP: usize = 512;

/// Convex piecewise-linear function of one variable: slope per interval
/// between sorted knots, anchored at (a minimizer, the minimum value).
struct Pwl<T> {
    xs: Vec<T>,
    /// slopes[i] applies left of xs[i]; slopes[xs.len()] to the right of
    /// the last knot. Nondecreasing (convexity).
    slopes: Vec<T>,
    min_x: T,
    min_val: T,
}

impl<T: Real> Pwl<T> {
    fn new_abs(weight: T, center: T) -> Self {
        Self {
            xs: vec![center],
            slopes: vec![-weight, weight],
            min_x: center,
            min_val: T::zero(),
        }
    }

    fn eval(&self, x: T) -> T {
        let (lo, hi, sign) = if x >= self.min_x {
            (self.min_x, x, T::one())
        } else {
            (x, self.min_x, -T::one())
        };
        let mut acc = T::zero();
        for i in 0..self.slopes.len() {
            let left = if i == 0 {
                T::neg_infinity()
            } else {
                self.xs[i - 1]
            };
            let right = if i == self.xs.len() {
                T::infinity()
            } else {
                self.xs[i]
            };
            let overlap = right.min(hi) - left.max(lo);
            if overlap > T::zero() {
                acc += self.slopes[i] * overlap;
            }
        }
        self.min_val + sign * acc
    }

    /// self(x) += w |x - c|, re-anchoring at the new minimizer.
    fn add_abs(&mut self, w: T, c: T) {
        if !(w > T::zero()) {
            return;
        }
        let idx = self.xs.partition_point(|&x| x < c);
        let exists = idx < self.xs.len() && self.xs[idx] == c;
        let mut nxs = self.xs.clone();
        if !exists {
            nxs.insert(idx, c);
        }
        let mut nsl = Vec::with_capacity(nxs.len() + 1);
        for i in 0..=nxs.len() {
            let base = if exists || i <= idx {
                self.slopes[i.min(self.slopes.len() - 1)]
            } else {
                self.slopes[i - 1]
            };
            let shift = if i <= idx { -w } else { w };
            nsl.push(base + shift);
        }
        // New minimizer: the knot where the slope turns nonnegative.
        let j = nsl.partition_point(|&s| s < T::zero());
        let new_min_x = if j == 0 {
            nxs[0]
        } else {
            nxs[(j - 1).min(nxs.len() - 1)]
        };
        let new_min_val = self.eval(new_min_x) + w * (new_min_x - c).abs();
        self.xs = nxs;
        self.slopes = nsl;
        self.min_x = new_min_x;
        self.min_val = new_min_val;
    }

    /// Inf-convolution with a|.|: clamps slopes to [-a, a]. Preserves the
    /// minimum value and the anchor point.
    fn clip(&mut self, a: T) {
        let clamp = |s: T| s.max(-a).min(a);
        let mut nxs = Vec::with_capacity(self.xs.len());
        let mut nsl = Vec::with_capacity(self.slopes.len());
        nsl.push(clamp(self.slopes[0]));
        for i in 0..self.xs.len() {
            let s = clamp(self.slopes[i + 1]);
            if s != *nsl.last().unwrap() {
                nxs.push(self.xs[i]);
                nsl.push(s);
            }
        }
        if nxs.is_empty() {
            nxs.push(self.min_x);
            let s = nsl[0];
            nsl = vec![s, s];
        }
        self.xs = nxs;
        self.slopes = nsl;
    }
}

/// V(a) for a fixed norm split, by exact dynamic programming.
fn inner_value<T: Real>(xs: &[T], cum: &[T], a: T) -> T {
    let lip = T::one() - a;
    let mut f = Pwl::new_abs(a, T::zero());
    for i in 0..xs.len() - 1 {
        f.add_abs(lip * (xs[i + 1] - xs[i]), cum[i]);
        f.clip(a);
    }
    f.eval(T::zero()).max(T::zero())
}

fn thinned_sorted<T: Real>(sample: &EmpiricalSample<T>) -> Result<Vec<T>, StatsError> {
    if sample.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if sample.values().iter().any(|v| !v.is_finite()) {
        return Err(StatsError::Poisoned);
    }
    let mut v = sample.values().to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if v.len() <= BL_SUPPORT_CAP {
        return Ok(v);
    }
    let n = v.len();
    Ok((0..BL_SUPPORT_CAP)
        .map(|i| v[(i * n + n / 2) / BL_SUPPORT_CAP])
        .collect())
}

/// Merged support points and net masses c = p - q, equal values combined,
/// exact zeros dropped.
fn weighted_support<T: Real>(
    p: &EmpiricalSample<T>,
    q: &EmpiricalSample<T>,
) -> Result<(Vec<T>, Vec<T>), StatsError> {
    let pv = thinned_sorted(p)?;
    let qv = thinned_sorted(q)?;
    let wp = T::of_usize(pv.len()).recip();
    let wq = T::of_usize(qv.len()).recip();
    let mut xs = Vec::new();
    let mut cs: Vec<T> = Vec::new();
    let (mut i, mut j) = (0, 0);
    let push = |xs: &mut Vec<T>, cs: &mut Vec<T>, x: T, w: T| {
        if let Some(&last) = xs.last() {
            if last == x {
                let k = cs.len() - 1;
                cs[k] += w;
                return;
            }
        }
        xs.push(x);
        cs.push(w);
    };
    while i < pv.len() || j < qv.len() {
        let take_p = j >= qv.len() || (i < pv.len() && pv[i] <= qv[j]);
        if take_p {
            push(&mut xs, &mut cs, pv[i], wp);
            i += 1;
        } else {
            push(&mut xs, &mut cs, qv[j], -wq);
            j += 1;
        }
    }
    let mut fxs = Vec::with_capacity(xs.len());
    let mut fcs = Vec::with_capacity(cs.len());
    for (x, c) in xs.into_iter().zip(cs) {
        if c != T::zero() {
            fxs.push(x);
            fcs.push(c);
        }
    }
    Ok((fxs, fcs))
}

/// Exact dual bounded-Lipschitz distance between two empirical laws of
/// the same scalar functional. Always in [0, 2].
pub fn bl_distance<T: Real>(
    p: &EmpiricalSample<T>,
    q: &EmpiricalSample<T>,
) -> Result<T, StatsError> {
    let (xs, cs) = weighted_support(p, q)?;
    if xs.len() < 2 {
        return Ok(T::zero());
    }
    let mut cum = Vec::with_capacity(cs.len());
    let mut run = T::zero();
    for &c in &cs {
        run += c;
        cum.push(run);
    }
    let value = |a: T| inner_value(&xs, &cum, a);
    // V is concave on [0, 1] with V(0) = V(1) = 0; ternary search.
    let third = T::of(3.0).recip();
    let mut lo = T::zero();
    let mut hi = T::one();
    let mut best = value(T::of(0.5));
    for _ in 0..64 {
        let span = hi - lo;
        let m1 = lo + span * third;
        let m2 = hi - span * third;
        let v1 = value(m1);
        let v2 = value(m2);
        best = best.max(v1).max(v2);
        if v1 < v2 {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    Ok(best.min(T::of(2.0)))
}

/// Distance between a sample and the Dirac mass at `point`.
pub fn bl_distance_to_dirac<T: Real>(p: &EmpiricalSample<T>, point: T) -> Result<T, StatsError> {
    bl_distance(p, &EmpiricalSample::dirac(point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(values: &[f64]) -> EmpiricalSample<f64> {
        EmpiricalSample::from_values(values.to_vec())
    }

    #[test]
    fn identical_samples_are_at_distance_zero() {
        let p = sample(&[0.3, 1.1, 1.1, -2.0]);
        assert_eq!(bl_distance(&p, &p).unwrap(), 0.0);
        let q = sample(&[1.1, 0.3, -2.0, 1.1]);
        assert_eq!(bl_distance(&p, &q).unwrap(), 0.0);
    }

    #[test]
    fn two_diracs_match_the_closed_form() {
        for d in [0.1, 0.5, 1.0, 2.0, 7.5, 1e4] {
            let p = sample(&[0.0]);
            let q = sample(&[d]);
            let got = bl_distance(&p, &q).unwrap();
            let expect = 2.0 * d / (d + 2.0);
            assert!(
                (got - expect).abs() < 1e-9 * (1.0 + expect),
                "d {d}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn distance_is_at_most_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let p = sample(
                &(0..30)
                    .map(|_| rng.random::<f64>() * 1e6)
                    .collect::<Vec<_>>(),
            );
            let q = sample(
                &(0..30)
                    .map(|_| -rng.random::<f64>() * 1e6)
                    .collect::<Vec<_>>(),
            );
            let d = bl_distance(&p, &q).unwrap();
            assert!((0.0..=2.0 + 1e-12).contains(&d));
        }
    }

    #[test]
    fn translation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let pv: Vec<f64> = (0..12).map(|_| rng.random::<f64>() * 3.0).collect();
        let qv: Vec<f64> = (0..9).map(|_| rng.random::<f64>() * 3.0 - 1.0).collect();
        let base = bl_distance(&sample(&pv), &sample(&qv)).unwrap();
        for t in [-5.0, 0.25, 40.0] {
            let ps: Vec<f64> = pv.iter().map(|v| v + t).collect();
            let qs: Vec<f64> = qv.iter().map(|v| v + t).collect();
            let shifted = bl_distance(&sample(&ps), &sample(&qs)).unwrap();
            assert!((shifted - base).abs() < 1e-9, "t {t}: {shifted} vs {base}");
        }
    }

    #[test]
    fn empty_and_non_finite_inputs_error() {
        let empty = EmpiricalSample::<f64>::new();
        let p = sample(&[1.0]);
        assert_eq!(bl_distance(&empty, &p), Err(StatsError::EmptySample));
        assert_eq!(bl_distance(&p, &empty), Err(StatsError::EmptySample));
        let bad = sample(&[1.0, f64::NAN]);
        assert_eq!(bl_distance(&p, &bad), Err(StatsError::Poisoned));
    }

    #[test]
    fn dirac_helper_equals_explicit_construction() {
        let p = sample(&[0.4, 0.9, 1.3]);
        let a = bl_distance_to_dirac(&p, 0.2).unwrap();
        let b = bl_distance(&p, &sample(&[0.2])).unwrap();
        assert_eq!(a, b);
        assert!(a > 0.0);
    }

    #[test]
    fn thinning_is_deterministic_and_faithful() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let big: Vec<f64> = (0..5000)
            .map(|_| {
                let u1: f64 = rng.random::<f64>();
                let u2: f64 = rng.random::<f64>();
                (-2.0 * u1.max(1e-300).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        let p = sample(&big);
        let d1 = bl_distance_to_dirac(&p, 0.0).unwrap();
        let d2 = bl_distance_to_dirac(&p, 0.0).unwrap();
        assert_eq!(d1, d2);
        // Against its own first half: both laws are near-identical
        // Gaussians, so the distance must be small but measured exactly.
        let q = sample(&big[..2500]);
        let d = bl_distance(&p, &q).unwrap();
        assert!(d < 0.08, "self-similarity distance {d}");
    }

    // Exact small-support reference: the inner minimum is attained at a
    // vertex of the kink arrangement, each vertex gives a line in a, and
    // the outer maximum of the piecewise-linear concave envelope sits at
    // a line crossing or an endpoint. Enumerating everything is exact.
    fn oracle(xs: &[f64], cs: &[f64]) -> f64 {
        let k = xs.len();
        let d = k - 1;
        assert!((1..=3).contains(&d));
        // Kink hyperplanes, rows of (coeffs, rhs).
        let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
        for j in 0..d {
            let mut row = vec![0.0; d];
            row[j] = 1.0;
            planes.push((row, 0.0));
        }
        for step in 0..k {
            // c_{step} + g_{step+1} - g_{step} = 0 with g_0 = g_K = 0;
            // variables are g_1..g_{K-1} stored at indices 0..d.
            let mut row = vec![0.0; d];
            if step < d {
                row[step] += 1.0;
            }
            if step >= 1 {
                row[step - 1] -= 1.0;
            }
            planes.push((row, -cs[step]));
        }
        let mut candidates: Vec<Vec<f64>> = Vec::new();
        let idx: Vec<usize> = (0..planes.len()).collect();
        let mut choose = vec![0usize; d];
        fn rec(
            idx: &[usize],
            d: usize,
            start: usize,
            depth: usize,
            choose: &mut Vec<usize>,
            planes: &[(Vec<f64>, f64)],
            out: &mut Vec<Vec<f64>>,
        ) {
            if depth == d {
                let mut a = vec![vec![0.0; d + 1]; d];
                for (r, &pi) in choose.iter().enumerate() {
                    a[r][..d].copy_from_slice(&planes[pi].0);
                    a[r][d] = planes[pi].1;
                }
                if let Some(g) = solve_dense(&mut a) {
                    out.push(g);
                }
                return;
            }
            for s in start..idx.len() {
                choose[depth] = idx[s];
                rec(idx, d, s + 1, depth + 1, choose, planes, out);
            }
        }
        rec(&idx, d, 0, 0, &mut choose, &planes, &mut candidates);
        assert!(!candidates.is_empty());

        // Each candidate g yields the line a*A(g) + (1-a)*B(g).
        let lines: Vec<(f64, f64)> = candidates
            .iter()
            .map(|g| {
                let gf = |i: isize| -> f64 {
                    if i <= 0 || i as usize >= k {
                        0.0
                    } else {
                        g[i as usize - 1]
                    }
                };
                let mut a_coef = 0.0;
                for (step, &c) in cs.iter().enumerate().take(k) {
                    a_coef += (c + gf(step as isize + 1) - gf(step as isize)).abs();
                }
                let mut b_coef = 0.0;
                for j in 1..k {
                    b_coef += (xs[j] - xs[j - 1]) * g[j - 1].abs();
                }
                (a_coef, b_coef)
            })
            .collect();
        let envelope = |a: f64| -> f64 {
            lines
                .iter()
                .map(|&(ac, bc)| a * ac + (1.0 - a) * bc)
                .fold(f64::INFINITY, f64::min)
        };
        let mut probes = vec![0.0, 1.0];
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a1, b1) = lines[i];
                let (a2, b2) = lines[j];
                let denom = (a1 - b1) - (a2 - b2);
                if denom.abs() > 1e-14 {
                    let a = (b2 - b1) / denom;
                    if (0.0..=1.0).contains(&a) {
                        probes.push(a);
                    }
                }
            }
        }
        probes.into_iter().map(envelope).fold(0.0f64, f64::max)
    }

    /// Gaussian elimination on a d x (d+1) augmented system. Index loops
    /// keep the simultaneous row borrows readable.
    #[allow(clippy::needless_range_loop)]
    fn solve_dense(a: &mut [Vec<f64>]) -> Option<Vec<f64>> {
        let d = a.len();
        for col in 0..d {
            let pivot =
                (col..d).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
            if a[pivot][col].abs() < 1e-12 {
                return None;
            }
            a.swap(col, pivot);
            for row in 0..d {
                if row != col {
                    let f = a[row][col] / a[col][col];
                    for c in col..=d {
                        a[row][c] -= f * a[col][c];
                    }
                }
            }
        }
        Some((0..d).map(|i| a[i][d] / a[i][i]).collect())
    }

    #[test]
    fn matches_exact_small_support_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for case in 0..250 {
            let k = 2 + case % 3; // support sizes 2..4
            let mut xs: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            xs.dedup();
            if xs.len() < 2 {
                continue;
            }
            // Random counts on the support for each side.
            let np = 1 + rng.random_range(0..4usize);
            let nq = 1 + rng.random_range(0..4usize);
            let pv: Vec<f64> = (0..np).map(|_| xs[rng.random_range(0..xs.len())]).collect();
            let qv: Vec<f64> = (0..nq).map(|_| xs[rng.random_range(0..xs.len())]).collect();
            let got = bl_distance(&sample(&pv), &sample(&qv)).unwrap();

            // Build the reduced support the implementation sees.
            let (sx, sc) = weighted_support(&sample(&pv), &sample(&qv)).unwrap();
            if sx.len() < 2 {
                assert!(got == 0.0);
                continue;
            }
            let expect = oracle(&sx, &sc);
            assert!(
                (got - expect).abs() < 1e-8 * (1.0 + expect),
                "case {case}: {got} vs {expect} (support {sx:?} masses {sc:?})"
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn metric_properties(
            av in prop::collection::vec(-20i32..20, 1..10),
            bv in prop::collection::vec(-20i32..20, 1..10),
            cv in prop::collection::vec(-20i32..20, 1..10),
        ) {
            let to_sample = |v: &Vec<i32>| {
                sample(&v.iter().map(|&x| x as f64 / 4.0).collect::<Vec<_>>())
            };
            let (a, b, c) = (to_sample(&av), to_sample(&bv), to_sample(&cv));
            let dab = bl_distance(&a, &b).unwrap();
            let dba = bl_distance(&b, &a).unwrap();
            let dac = bl_distance(&a, &c).unwrap();
            let dbc = bl_distance(&b, &c).unwrap();
            prop_assert!((0.0..=2.0 + 1e-12).contains(&dab));
            prop_assert!((dab - dba).abs() < 1e-8);
            prop_assert!(bl_distance(&a, &a).unwrap() == 0.0);
            // Triangle inequality with solver slack.
            prop_assert!(dac <= dab + dbc + 1e-8);
        }
    }
}
