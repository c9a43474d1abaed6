//! Special functions and quadrature rules.

mod bessel;
mod hermite;
mod legendre;

pub use bessel::{bessel_j, bessel_j_table};
pub use hermite::GaussHermite;
pub use legendre::{integrate_adaptive, GaussLegendre, Integral};
