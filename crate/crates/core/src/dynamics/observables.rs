use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::require;
use crate::{Result, C64};

use super::state::DensityState;

/// Populations and parity after the analysis pulses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
    pub parity: f64,
}

/// [P00, P01, P10, P11] with the motion traced out.
pub fn spin_populations(rho: &DensityState) -> Result<[f64; 4]> {
    require(rho.n_spins() == 2, "rho", "must be a two-spin state")?;
    let r = rho.spin_reduced();
    Ok(core::array::from_fn(|i| r[i * 5].re))
}

// π/2 rotation about cos φ·x + sin φ·y.
fn analysis_pulse(phi: f64) -> [[C64; 2]; 2] {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let off = |sign: f64| C64::new(0.0, -s) * C64::from_polar(1.0, sign * phi);
    [[C64::new(s, 0.0), off(-1.0)], [off(1.0), C64::new(s, 0.0)]]
}

/// Observables after an ideal π/2 pulse with phase `phase` on each ion.
pub fn observables(rho: &DensityState, phase: f64) -> Result<Observables> {
    require(rho.n_spins() == 2, "rho", "must be a two-spin state")?;
    Ok(observables_spin(&rho.spin_reduced(), phase))
}

pub(crate) fn observables_spin(r: &[C64], phase: f64) -> Observables {
    let u = analysis_pulse(phase);
    let uu = |a: usize, b: usize| u[a >> 1][b >> 1] * u[a & 1][b & 1];
    let mut p = [0.0; 4];
    for (i, pi) in p.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..4 {
            let ua = uu(i, a);
            if ua.norm_sqr() == 0.0 {
                continue;
            }
            for b in 0..4 {
                acc += ua * r[a * 4 + b] * uu(i, b).conj();
            }
        }
        *pi = acc.re;
    }
    Observables { p00: p[0], p01: p[1], p10: p[2], p11: p[3], parity: p[0] + p[3] - p[1] - p[2] }
}

/// Amplitude of the cos(2φ) component of the parity, from 8 phases.
pub fn parity_contrast(rho: &DensityState) -> Result<f64> {
    require(rho.n_spins() == 2, "rho", "must be a two-spin state")?;
    Ok(parity_contrast_spin(&rho.spin_reduced()))
}

pub(crate) fn parity_contrast_spin(r: &[C64]) -> f64 {
    let samples: Vec<(f64, f64)> = (0..8).map(|k| {
        let phi = 2.0 * PI * k as f64 / 8.0;
        (phi, observables_spin(r, phi).parity)
    }).collect();
    let c: C64 = samples.iter().map(|(phi, p)| C64::from_polar(*p, -2.0 * phi)).sum();
    2.0 * c.norm() / 8.0
}

/// (P00 + P11 + contrast)/2.
pub fn bell_fidelity(p00: f64, p11: f64, contrast: f64) -> Result<f64> {
    for (name, v) in [("p00", p00), ("p11", p11), ("contrast", contrast)] {
        require((0.0..=1.0).contains(&v), name, "must lie in [0, 1]")?;
    }
    Ok(0.5 * (p00 + p11 + contrast))
}
