//! Sampled scalar functionals of a trajectory, kept with their sampling
//! times so empirical laws (pushforwards of the stationary measure under
//! one functional) can be compared across runs.

use crate::num::Real;
use serde::{Deserialize, Serialize};

use super::accumulator::StatsError;

/// Values of one scalar functional sampled along a trajectory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSample<T> {
    values: Vec<T>,
    times: Vec<T>,
}

impl<T: Real> EmpiricalSample<T> {
    pub fn new() -> Self {
        Self {
            values: Vec::new(),
            times: Vec::new(),
        }
    }

    /// A sample with uninformative (index) times, for synthetic data.
    pub fn from_values(values: Vec<T>) -> Self {
        let times = (0..values.len()).map(T::of_usize).collect();
        Self { values, times }
    }

    /// A single-point sample: the empirical surrogate of a Dirac mass.
    pub fn dirac(point: T) -> Self {
        Self {
            values: vec![point],
            times: vec![T::zero()],
        }
    }

    pub fn push(&mut self, time: T, value: T) {
        self.times.push(time);
        self.values.push(value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn mean(&self) -> Result<T, StatsError> {
        if self.is_empty() {
            return Err(StatsError::EmptySample);
        }
        Ok(self.values.iter().copied().sum::<T>() / T::of_usize(self.len()))
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().map(|v| v.abs()).fold(T::zero(), T::max)
    }

    /// Empirical E(|x| 1_{|x| > r}), the uniform-integrability diagnostic.
    pub fn tail_expectation(&self, r: T) -> T {
        if self.is_empty() {
            return T::zero();
        }
        let mut total = T::zero();
        for &v in &self.values {
            let a = v.abs();
            if a > r {
                total += a;
            }
        }
        total / T::of_usize(self.len())
    }
}
