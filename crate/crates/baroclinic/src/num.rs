//! Scalar abstraction for the numerical core.
//!
//! Everything downstream is generic over [`Real`], which bundles the float
//! capabilities the solver needs: num-traits arithmetic, FFT compatibility,
//! Gaussian sampling and serde round-tripping. It is implemented for `f32`
//! and `f64`; the crate root re-exports `f64` aliases of the main types.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fmt::{Display, LowerExp};
use std::iter::Sum;

pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + rustfft::FftNum
    + Sum<Self>
    + Display
    + LowerExp
    + Default
    + Serialize
    + DeserializeOwned
{
    /// Converts an `f64` literal or precomputed table entry.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 value representable in scalar type")
    }

    /// Converts a mode index or count.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize value representable in scalar type")
    }

    /// Draws one standard normal variate.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Real for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Real for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn literal_conversion_round_trips() {
        assert_eq!(<f64 as Real>::of(1.5), 1.5);
        assert_eq!(<f32 as Real>::of(1.5), 1.5f32);
        assert_eq!(<f64 as Real>::of_usize(42), 42.0);
    }

    #[test]
    fn standard_normal_draws_differ_between_scalars_but_share_moments() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 20_000;
        let mut sum = 0.0f64;
        let mut sum_sq = 0.0f64;
        for _ in 0..n {
            let x = f64::standard_normal(&mut rng);
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.03, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }
}
