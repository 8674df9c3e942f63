//! Online moment accumulation for the tracked stationary-measure
//! functionals.
//!
//! Means and second moments use Welford updates; independent accumulators
//! (ensemble members, threads) combine with the parallel merge formula,
//! which is algebraically exact. Standard errors come from batch means so
//! that the strong autocorrelation of trajectory samples does not fake
//! precision: batches pair-merge as the run grows, targeting 32 batches.

use crate::model::{pairings, sobolev_norm_sq, ModelParams, State};
use crate::num::Real;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("need at least {needed} samples, have {have}")]
    TooFewSamples { needed: u64, have: u64 },
    #[error("accumulator was poisoned by a non-finite sample")]
    Poisoned,
}

/// Exponent cap for the exponential functional; exp of anything larger is
/// recorded at the cap and the sample is counted as saturated.
pub const EXP_OVERFLOW_GUARD: f64 = 700.0;

/// The scalar functionals every accumulator tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Functional {
    Norm0Sq,
    Norm1Sq,
    Norm2Sq,
    Norm3Sq,
    /// <A2 u, A1 u>, the enstrophy-flux pairing of the key bound.
    A2A1,
    /// <A3 u, u> with the configured variant and regime.
    A3U,
    /// <A3' u, u>, the stored-coefficient (primed) dissipation pairing.
    A3PrimeU,
    /// |||A1 u|||_0^2, the argument of the exponential moment.
    A1Norm0Sq,
    /// exp(kappa* nu |||A1 u|||_0^2), overflow-guarded.
    ExpMoment,
    /// |||u|||_2^2 + (1/nu) <A3 u, u>, the stationary-balance left side.
    BalanceLhs,
}

impl Functional {
    pub const ALL: [Functional; 10] = [
        Functional::Norm0Sq,
        Functional::Norm1Sq,
        Functional::Norm2Sq,
        Functional::Norm3Sq,
        Functional::A2A1,
        Functional::A3U,
        Functional::A3PrimeU,
        Functional::A1Norm0Sq,
        Functional::ExpMoment,
        Functional::BalanceLhs,
    ];

    /// Stable column/key name for serialized output.
    pub fn label(self) -> &'static str {
        match self {
            Functional::Norm0Sq => "norm0_sq",
            Functional::Norm1Sq => "norm1_sq",
            Functional::Norm2Sq => "norm2_sq",
            Functional::Norm3Sq => "norm3_sq",
            Functional::A2A1 => "a2_a1",
            Functional::A3U => "a3_u",
            Functional::A3PrimeU => "a3_prime_u",
            Functional::A1Norm0Sq => "a1_norm0_sq",
            Functional::ExpMoment => "exp_moment",
            Functional::BalanceLhs => "balance_lhs",
        }
    }
}

/// Count/mean/M2 triple with Welford updates and exact parallel merge.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct ScalarAccumulator<T> {
    pub count: u64,
    pub mean: T,
    pub m2: T,
}

impl<T: Real> ScalarAccumulator<T> {
    pub fn new() -> Self {
        Self {
            count: 0,
            mean: T::zero(),
            m2: T::zero(),
        }
    }

    pub fn push(&mut self, x: T) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / T::of_usize(self.count as usize);
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n1 = T::of_usize(self.count as usize);
        let n2 = T::of_usize(other.count as usize);
        let n = n1 + n2;
        let delta = other.mean - self.mean;
        self.mean += delta * n2 / n;
        self.m2 = self.m2 + other.m2 + delta * delta * n1 * n2 / n;
        self.count += other.count;
    }

    /// Unbiased sample variance; None below two samples.
    pub fn variance(&self) -> Option<T> {
        (self.count >= 2).then(|| self.m2 / T::of_usize(self.count as usize - 1))
    }

    /// sqrt(variance / n), valid for independent samples only.
    pub fn naive_standard_error(&self) -> Option<T> {
        self.variance()
            .map(|v| (v / T::of_usize(self.count as usize)).sqrt())
    }
}

const BATCH_TARGET: usize = 32;

/// Batch-means bookkeeping: means over contiguous sample blocks, used for
/// autocorrelation-aware standard errors. Completed batches pair-merge
/// once there are twice the target count.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BatchMeans<T> {
    batch_size: u64,
    completed: Vec<(u64, T)>,
    current_count: u64,
    current_mean: T,
}

impl<T: Real> BatchMeans<T> {
    fn new() -> Self {
        Self {
            batch_size: 1,
            completed: Vec::new(),
            current_count: 0,
            current_mean: T::zero(),
        }
    }

    fn push(&mut self, x: T) {
        self.current_count += 1;
        let delta = x - self.current_mean;
        self.current_mean += delta / T::of_usize(self.current_count as usize);
        if self.current_count == self.batch_size {
            self.completed.push((self.current_count, self.current_mean));
            self.current_count = 0;
            self.current_mean = T::zero();
            if self.completed.len() >= 2 * BATCH_TARGET {
                self.compact();
            }
        }
    }

    fn compact(&mut self) {
        let mut merged = Vec::with_capacity(self.completed.len().div_ceil(2));
        let mut iter = self.completed.chunks_exact(2);
        for pair in &mut iter {
            let (n1, m1) = pair[0];
            let (n2, m2) = pair[1];
            let n = n1 + n2;
            let w2 = T::of_usize(n2 as usize) / T::of_usize(n as usize);
            merged.push((n, m1 + (m2 - m1) * w2));
        }
        merged.extend(iter.remainder().iter().copied());
        self.completed = merged;
        self.batch_size *= 2;
    }

    fn merge(&mut self, other: &Self) {
        self.completed.extend(other.completed.iter().copied());
        if other.current_count > 0 {
            self.completed
                .push((other.current_count, other.current_mean));
        }
        self.batch_size = self.batch_size.max(other.batch_size);
        while self.completed.len() >= 2 * BATCH_TARGET {
            self.compact();
        }
    }

    pub fn batch_count(&self) -> usize {
        self.completed.len()
    }

    /// Standard error of the overall mean. Batches of width w are treated
    /// as independent with variance s/w for a common s, so unequal widths
    /// (from merges) are weighted correctly: SE^2 = s_hat / W with
    /// s_hat = sum w_b (m_b - mbar)^2 / (B - 1).
    pub fn standard_error(&self) -> Option<T> {
        if self.completed.len() < 2 {
            return None;
        }
        let total: u64 = self.completed.iter().map(|(n, _)| n).sum();
        let w_total = T::of_usize(total as usize);
        let mut mbar = T::zero();
        for &(n, m) in &self.completed {
            mbar += m * T::of_usize(n as usize) / w_total;
        }
        let mut s = T::zero();
        for &(n, m) in &self.completed {
            let d = m - mbar;
            s += T::of_usize(n as usize) * d * d;
        }
        let b = T::of_usize(self.completed.len() - 1);
        Some((s / b / w_total).sqrt())
    }
}

/// Running moments of all tracked functionals of the state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentAccumulator<T> {
    nu: T,
    /// kappa* nu, the coefficient in the exponential functional.
    exp_coeff: T,
    scalars: Vec<ScalarAccumulator<T>>,
    batches: Vec<BatchMeans<T>>,
    poisoned: bool,
    saturated: u64,
}

impl<T: Real> MomentAccumulator<T> {
    pub fn new(nu: T, kappa_star: T) -> Self {
        Self {
            nu,
            exp_coeff: kappa_star * nu,
            scalars: vec![ScalarAccumulator::new(); Functional::ALL.len()],
            batches: vec![BatchMeans::new(); Functional::ALL.len()],
            poisoned: false,
            saturated: 0,
        }
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn exp_coeff(&self) -> T {
        self.exp_coeff
    }

    /// Evaluates every tracked functional of `state` and pushes the values.
    /// A non-finite value poisons the accumulator and the sample is
    /// dropped; an oversized exponent saturates the exponential entry.
    pub fn record(&mut self, state: &State<T>, params: &ModelParams<T>) {
        let p = pairings(params, state);
        let guard = T::of(EXP_OVERFLOW_GUARD);
        let mut exponent = self.exp_coeff * p.a1_norm0_sq;
        if exponent > guard {
            exponent = guard;
            self.saturated += 1;
        }
        let norm2_sq =
            state.u1.weighted_energy(|lam| lam * lam) + state.u2.weighted_energy(|lam| lam * lam);
        let values = [
            sobolev_norm_sq(state, T::zero()),
            sobolev_norm_sq(state, T::one()),
            norm2_sq,
            sobolev_norm_sq(state, T::of(3.0)),
            p.a2_a1,
            p.a3_u,
            p.a3_prime_u,
            p.a1_norm0_sq,
            exponent.exp(),
            norm2_sq + p.a3_u / self.nu,
        ];
        if values.iter().any(|v| !v.is_finite()) {
            self.poisoned = true;
            return;
        }
        for (i, v) in values.into_iter().enumerate() {
            self.scalars[i].push(v);
            self.batches[i].push(v);
        }
    }

    /// Pushes externally computed values for a subset of functionals; used
    /// by tests that feed synthetic distributions.
    pub fn record_value(&mut self, f: Functional, value: T) {
        if !value.is_finite() {
            self.poisoned = true;
            return;
        }
        let i = Functional::ALL.iter().position(|&g| g == f).unwrap();
        self.scalars[i].push(value);
        self.batches[i].push(value);
    }

    /// Combines with an accumulator built over another sample stream.
    /// Both must have been constructed with the same nu and kappa*.
    pub fn merge(&mut self, other: &Self) {
        assert!(
            (self.nu - other.nu).abs() <= T::of(1e-15) * self.nu.abs()
                && (self.exp_coeff - other.exp_coeff).abs()
                    <= T::of(1e-15) * (self.exp_coeff.abs() + T::of(1e-300)),
            "merging accumulators with different coefficients"
        );
        for (a, b) in self.scalars.iter_mut().zip(&other.scalars) {
            a.merge(b);
        }
        for (a, b) in self.batches.iter_mut().zip(&other.batches) {
            a.merge(b);
        }
        self.poisoned |= other.poisoned;
        self.saturated += other.saturated;
    }

    fn slot(&self, f: Functional) -> &ScalarAccumulator<T> {
        let i = Functional::ALL.iter().position(|&g| g == f).unwrap();
        &self.scalars[i]
    }

    fn batch(&self, f: Functional) -> &BatchMeans<T> {
        let i = Functional::ALL.iter().position(|&g| g == f).unwrap();
        &self.batches[i]
    }

    pub fn count(&self) -> u64 {
        self.scalars[0].count
    }

    pub fn is_poisoned(&self) -> bool {
        self.poisoned
    }

    pub fn saturated_count(&self) -> u64 {
        self.saturated
    }

    pub fn mean(&self, f: Functional) -> Option<T> {
        let s = self.slot(f);
        (s.count > 0).then_some(s.mean)
    }

    pub fn variance(&self, f: Functional) -> Option<T> {
        self.slot(f).variance()
    }

    /// Batch-means standard error when enough batches exist, otherwise the
    /// independent-sample estimate.
    pub fn standard_error(&self, f: Functional) -> Option<T> {
        self.batch(f)
            .standard_error()
            .or_else(|| self.slot(f).naive_standard_error())
    }

    pub fn batch_count(&self, f: Functional) -> usize {
        self.batch(f).batch_count()
    }

    /// Empirical mean of exp(kappa* nu |||A1 u|||_0^2) plus the saturation
    /// flag; a saturated mean is a lower bound on the true one.
    pub fn exp_moment(&self) -> Result<(T, bool), StatsError> {
        if self.poisoned {
            return Err(StatsError::Poisoned);
        }
        self.mean(Functional::ExpMoment)
            .map(|m| (m, self.saturated > 0))
            .ok_or(StatsError::EmptySample)
    }
}

/// Stationary energy balance: empirical left side against the closed-form
/// input rate c2.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BalanceReport<T> {
    /// E |||u|||_2^2 + (1/nu) E <A3 u, u>.
    pub lhs: T,
    /// c2 = (1/(2 nu)) sum b_i^2 <A1^{-1} E_i, E_i>.
    pub rhs: T,
    pub residual: T,
    pub standard_error: T,
}

/// Compares the accumulated balance left side with a supplied c2.
pub fn balance_residual<T: Real>(
    acc: &MomentAccumulator<T>,
    c2: T,
) -> Result<BalanceReport<T>, StatsError> {
    if acc.is_poisoned() {
        return Err(StatsError::Poisoned);
    }
    let n = acc.count();
    if n < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, have: n });
    }
    let lhs = acc.mean(Functional::BalanceLhs).unwrap();
    let standard_error = acc.standard_error(Functional::BalanceLhs).unwrap();
    Ok(BalanceReport {
        lhs,
        rhs: c2,
        residual: lhs - c2,
        standard_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn welford_matches_two_pass_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..1000)
            .map(|_| rng.random::<f64>() * 10.0 - 5.0)
            .collect();
        let mut acc = ScalarAccumulator::new();
        for &x in &xs {
            acc.push(x);
        }
        let mean: f64 = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((acc.mean - mean).abs() < 1e-12);
        assert!((acc.variance().unwrap() - var).abs() < 1e-12 * var);
    }

    #[test]
    fn merge_matches_concatenated_stream() {
        // The merge formula is algebraically exact; floating point leaves
        // differences at rounding level only.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let xs: Vec<f64> = (0..501).map(|_| rng.random::<f64>()).collect();
        let mut whole = ScalarAccumulator::new();
        for &x in &xs {
            whole.push(x);
        }
        for split in [1, 137, 250, 500] {
            let mut a = ScalarAccumulator::new();
            let mut b = ScalarAccumulator::new();
            for &x in &xs[..split] {
                a.push(x);
            }
            for &x in &xs[split..] {
                b.push(x);
            }
            a.merge(&b);
            assert_eq!(a.count, whole.count);
            assert!((a.mean - whole.mean).abs() < 1e-13);
            assert!((a.m2 - whole.m2).abs() < 1e-12 * whole.m2);
        }
    }

    #[test]
    fn merge_is_order_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let parts: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..100).map(|_| rng.random::<f64>()).collect())
            .collect();
        let accs: Vec<ScalarAccumulator<f64>> = parts
            .iter()
            .map(|p| {
                let mut a = ScalarAccumulator::new();
                for &x in p {
                    a.push(x);
                }
                a
            })
            .collect();
        let mut fwd = accs[0];
        for a in &accs[1..] {
            fwd.merge(a);
        }
        let mut rev = accs[3];
        for a in accs[..3].iter().rev() {
            rev.merge(a);
        }
        assert!((fwd.mean - rev.mean).abs() < 1e-14);
        assert!((fwd.m2 - rev.m2).abs() < 1e-12 * fwd.m2.abs());
    }

    #[test]
    fn single_sample_has_mean_but_no_se() {
        let p = crate::model::ModelParams::new(1.0);
        let mut acc = MomentAccumulator::new(1.0, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = State::random(&mut rng, 3, 0.5);
        acc.record(&s, &p);
        assert_eq!(acc.count(), 1);
        assert!(acc.mean(Functional::Norm1Sq).is_some());
        assert!(acc.standard_error(Functional::Norm1Sq).is_none());
        assert!(acc.variance(Functional::Norm1Sq).is_none());
    }

    #[test]
    fn synthetic_distribution_mean_within_three_se() {
        // Exponential(1) values: mean 1. Feed 10^4 iid samples and check
        // the accumulator's own error bar.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut acc = MomentAccumulator::new(1.0, 0.0);
        for _ in 0..10_000 {
            let u: f64 = rng.random::<f64>();
            acc.record_value(Functional::Norm1Sq, -(1.0 - u).ln());
        }
        let mean = acc.mean(Functional::Norm1Sq).unwrap();
        let se = acc.standard_error(Functional::Norm1Sq).unwrap();
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean}, se {se}");
        assert!(se < 0.05);
    }

    #[test]
    fn batch_means_widen_se_for_correlated_samples() {
        // AR(1) with strong correlation: naive SE is far too small; batch
        // means should report close to the true SE of the mean.
        let phi: f64 = 0.95;
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut acc = MomentAccumulator::new(1.0, 0.0);
        let mut x = 0.0;
        let n = 200_000;
        for _ in 0..n {
            let z: f64 = {
                let u1: f64 = rng.random::<f64>();
                let u2: f64 = rng.random::<f64>();
                (-2.0 * u1.max(1e-300).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            };
            x = phi * x + z;
            acc.record_value(Functional::Norm0Sq, x);
        }
        // Var(x) = 1/(1-phi^2); SE of mean ~ sqrt(Var * (1+phi)/(1-phi) / n).
        let var = 1.0 / (1.0 - phi * phi);
        let truth = (var * (1.0 + phi) / (1.0 - phi) / n as f64).sqrt();
        let batch = acc.standard_error(Functional::Norm0Sq).unwrap();
        let naive = acc
            .slot(Functional::Norm0Sq)
            .naive_standard_error()
            .unwrap();
        assert!(naive < 0.45 * truth, "naive {naive} vs truth {truth}");
        assert!(
            batch > 0.55 * truth && batch < 1.8 * truth,
            "batch {batch} vs truth {truth}"
        );
    }

    #[test]
    fn moment_merge_matches_single_stream() {
        let p = crate::model::ModelParams::new(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let states: Vec<State<f64>> = (0..300).map(|_| State::random(&mut rng, 4, 0.7)).collect();
        let mut whole = MomentAccumulator::new(0.5, 0.2);
        for s in &states {
            whole.record(s, &p);
        }
        let mut a = MomentAccumulator::new(0.5, 0.2);
        let mut b = MomentAccumulator::new(0.5, 0.2);
        for s in &states[..120] {
            a.record(s, &p);
        }
        for s in &states[120..] {
            b.record(s, &p);
        }
        a.merge(&b);
        assert_eq!(a.count(), whole.count());
        for f in Functional::ALL {
            let m1 = a.mean(f).unwrap();
            let m2 = whole.mean(f).unwrap();
            assert!(
                (m1 - m2).abs() <= 1e-12 * (1.0 + m2.abs()),
                "{}: {m1} vs {m2}",
                f.label()
            );
        }
    }

    #[test]
    fn non_finite_sample_poisons() {
        let p = crate::model::ModelParams::new(1.0);
        let mut acc = MomentAccumulator::new(1.0, 0.1);
        let mut s = State::zeros(2);
        acc.record(&s, &p);
        s.u1.set(1, 0, num_complex::Complex::new(f64::NAN, 0.0));
        acc.record(&s, &p);
        assert!(acc.is_poisoned());
        assert_eq!(acc.count(), 1);
        assert_eq!(acc.exp_moment(), Err(StatsError::Poisoned));
    }

    #[test]
    fn exp_moment_saturates_instead_of_overflowing() {
        let p = crate::model::ModelParams::new(1.0);
        let mut acc = MomentAccumulator::<f64>::new(1.0, 1.0);
        let mut s = State::zeros(1);
        s.u1.set(1, 0, num_complex::Complex::new(100.0, 0.0));
        acc.record(&s, &p);
        let (m, saturated) = acc.exp_moment().unwrap();
        assert!(saturated);
        assert!(m.is_finite());
        assert_eq!(acc.saturated_count(), 1);
    }

    #[test]
    fn zero_state_exp_moment_is_one() {
        let p = crate::model::ModelParams::new(1.0);
        let mut acc = MomentAccumulator::new(1.0, 0.3);
        acc.record(&State::zeros(2), &p);
        let (m, saturated) = acc.exp_moment().unwrap();
        assert_eq!(m, 1.0);
        assert!(!saturated);
    }

    #[test]
    fn balance_lhs_combines_norm_and_dissipation() {
        let p = crate::model::ModelParams::new(0.25);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = State::random(&mut rng, 3, 0.5);
        let mut acc = MomentAccumulator::<f64>::new(0.25, 0.1);
        acc.record(&s, &p);
        acc.record(&s, &p);
        let lhs = acc.mean(Functional::BalanceLhs).unwrap();
        let expect =
            acc.mean(Functional::Norm2Sq).unwrap() + acc.mean(Functional::A3U).unwrap() / 0.25;
        assert!((lhs - expect).abs() < 1e-12 * (1.0 + expect.abs()));
        let report = balance_residual(&acc, 0.9).unwrap();
        assert_eq!(report.residual, report.lhs - 0.9);
    }

    #[test]
    fn balance_needs_two_samples() {
        let p = crate::model::ModelParams::new(1.0);
        let mut acc = MomentAccumulator::new(1.0, 0.1);
        assert!(matches!(
            balance_residual(&acc, 1.0),
            Err(StatsError::TooFewSamples { .. })
        ));
        acc.record(&State::zeros(2), &p);
        assert!(matches!(
            balance_residual(&acc, 1.0),
            Err(StatsError::TooFewSamples { .. })
        ));
    }
}
