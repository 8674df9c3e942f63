//! The two-layer model: state, per-mode operators, nonlinearity, Sobolev
//! norms, stability thresholds and the named constants.

mod constants;
mod nonlinear;
mod norms;
mod operators;
mod params;
mod state;

pub use constants::{
    a3_a1_nonnegative, constants_report, constants_report_with_alpha1, k0_threshold,
    k0_threshold_closed_form, k0_threshold_infimum, per_mode_bound, stability_check,
    ConstantsError, ConstantsReport, StabilityCheck,
};
pub use nonlinear::b_nonlinear;
pub use norms::{pairings, sobolev_norm, sobolev_norm_sq, Pairings};
pub use operators::{a1_apply, a1_solve, dissipation_apply, PerModeOperators};
pub use params::{FrictionRegime, ModelParams, OperatorVariant};
pub use state::State;
