//! Closed-form linear oracles: exact stationary moments of the
//! nonlinearity-free system and a pathwise-exact kernel for measuring the
//! integrator's strong order.

mod order;
mod ou;

pub use order::{strong_order_check, StrongOrderReport};
pub use ou::{
    forced_modes, oracle_moments, ou_stationary_covariance, ExpMomentOracle, LinearMoments, ModeOU,
    OracleError,
};
