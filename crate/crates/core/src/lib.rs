//! Simulation core for polarization-gradient Mølmer-Sørensen gates on
//! trapped-ion chains.
//!
//! Everything here is `no_std` with `alloc`. File formats, configuration and
//! the command line live in the `pgate` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod calibration;
pub mod consts;
pub mod dynamics;
pub mod errorbudget;
pub mod fit;
pub mod focalfield;
pub mod ionchain;
pub mod modulation;
pub mod special;
pub mod stark;

mod error;

pub use error::{Error, Result};

/// Complex double used for fields and density matrices.
pub type C64 = num_complex::Complex64;
