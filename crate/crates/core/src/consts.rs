//! Physical constants (CODATA 2018, SI).

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Mass of a ¹⁷¹Yb⁺ ion in atomic mass units.
pub const YB171_MASS_AMU: f64 = 170.936_331_5;

/// ¹⁷¹Yb⁺ ground-state hyperfine splitting in Hz.
pub const YB171_HYPERFINE_HZ: f64 = 12.642_812_118e9;

pub const TAU: f64 = core::f64::consts::TAU;
