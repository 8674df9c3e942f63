//! Pseudospectral simulator and statistics engine for the stochastic
//! two-layer quasi-geostrophic (baroclinic Lorenz) model on the rotating
//! unit sphere.

// Validation guards are written as `!(x > 0)` on purpose: the negated
// form rejects NaN, the suggested `x <= 0` silently accepts it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod linalg;
pub mod model;
pub mod num;
pub mod oracle;
pub mod sde;
pub mod sphere;
pub mod stats;

pub use num::Real;

/// Default scalar used by the CLI and most tests.
pub type Scalar = f64;

pub type SphericalGrid64 = sphere::SphericalGrid<Scalar>;
pub type SpectralField64 = sphere::SpectralField<Scalar>;
pub type GridField64 = sphere::GridField<Scalar>;
pub type State64 = model::State<Scalar>;
pub type ModelParams64 = model::ModelParams<Scalar>;
pub type NoiseSpectrum64 = sde::NoiseSpectrum<Scalar>;
