//! Spectral machinery on the unit sphere: orthonormal spherical-harmonic
//! analysis/synthesis on a Gauss-Legendre x Fourier grid, the spherical
//! Laplacian, the advective Jacobian with dealiasing, area quadrature and
//! the planetary-vorticity (Coriolis) field.

mod field;
mod gauss;
mod grid;
mod legendre;

pub use field::{laplacian_eigenvalue, GridField, SpectralField};
pub use gauss::gauss_legendre;
pub use grid::{next_fast_len, SphereError, SphericalGrid};
