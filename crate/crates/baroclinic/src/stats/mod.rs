//! Empirical stationary-measure machinery: moment accumulators with
//! batch-means errors, balance residuals, exponential moments, dual
//! bounded-Lipschitz distances and tail diagnostics.

mod accumulator;
mod bl;
mod sample;

pub use accumulator::{
    balance_residual, BalanceReport, BatchMeans, Functional, MomentAccumulator, ScalarAccumulator,
    StatsError, EXP_OVERFLOW_GUARD,
};
pub use bl::{bl_distance, bl_distance_to_dirac, BL_SUPPORT_CAP};
pub use sample::EmpiricalSample;
