use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::error::{invalid, require};
use crate::{Result, C64};

use super::gate::GateSpec;

/// Closed-form spin-dependent-force solution of a carrier-free MS gate with a
/// thermal motional state.
///
/// Branch `s` labels the σx eigenbasis of both spins (ion 0 major; bit 0 ↔
/// σx = +1). Each branch is displaced by α_s(t) and picks up a phase
/// exp(−iΦ_s(t)).
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticMs {
    forces: [f64; 4],
    detuning: f64,
    nbar: f64,
}

pub fn analytic_ms(gate: &GateSpec, nbar: f64) -> Result<AnalyticMs> {
    gate.validate()?;
    require(nbar >= 0.0 && nbar.is_finite(), "nbar", "must be non-negative")?;
    if gate.carrier_rabi.iter().chain(&gate.cubic_rabi).any(|v| *v != 0.0) {
        return Err(invalid("gate", "the closed form needs zero carrier and third-order terms"));
    }
    let forces = core::array::from_fn(|s| {
        let s0 = if s & 2 == 0 { 1.0 } else { -1.0 };
        let s1 = if s & 1 == 0 { 1.0 } else { -1.0 };
        0.5 * (s0 * gate.sideband_rabi[0] + s1 * gate.sideband_rabi[1])
    });
    Ok(AnalyticMs { forces, detuning: gate.detuning, nbar })
}

impl AnalyticMs {
    /// Force amplitude F_s of branch `s` (rad/s).
    pub fn force(&self, branch: usize) -> f64 {
        self.forces[branch]
    }

    /// α_s(t) = −F_s·(1 − e^{−iδt})/δ, linear in t at δ = 0.
    pub fn displacement(&self, branch: usize, t: f64) -> C64 {
        let f = self.forces[branch];
        let x = self.detuning * t;
        if x.abs() < 1e-8 {
            // −F·t·i·e^{−ix/2}·sinc(x/2) to second order.
            return C64::new(0.0, -f * t) * C64::from_polar(1.0, -0.5 * x) * (1.0 - x * x / 24.0);
        }
        -(C64::new(1.0, 0.0) - C64::from_polar(1.0, -x)) * (f / self.detuning)
    }

    /// Φ_s(t) = F_s²·t²·(x − sin x)/x² with x = δt.
    pub fn geometric_phase(&self, branch: usize, t: f64) -> f64 {
        let f = self.forces[branch];
        let x = self.detuning * t;
        let shape = if x.abs() < 1e-2 {
            let x2 = x * x;
            x * (1.0 / 6.0 - x2 * (1.0 / 120.0 - x2 * (1.0 / 5040.0 - x2 / 362880.0)))
        } else {
            (x - x.sin()) / (x * x)
        };
        f * f * t * t * shape
    }

    /// Reduced spin density matrix (4×4, row-major, computational basis) at
    /// time t for the initial pure spin state `psi` (computational basis).
    pub fn spin_density_from(&self, psi: &[C64; 4], t: f64) -> Vec<C64> {
        let h = 0.5;
        // Two-qubit Hadamard is real symmetric with entries ±1/2.
        let had = |r: usize, c: usize| -> f64 { if (r & c).count_ones() % 2 == 0 { h } else { -h } };
        let c: [C64; 4] = core::array::from_fn(|s| (0..4).map(|k| psi[k] * had(s, k)).sum());
        let alpha: [C64; 4] = core::array::from_fn(|s| self.displacement(s, t));
        let phi: [f64; 4] = core::array::from_fn(|s| self.geometric_phase(s, t));
        let mut x = [[C64::new(0.0, 0.0); 4]; 4];
        for s in 0..4 {
            for q in 0..4 {
                let overlap = (alpha[q].conj() * alpha[s]).im;
                let damp = (-(alpha[s] - alpha[q]).norm_sqr() * (self.nbar + 0.5)).exp();
                x[s][q] = c[s] * c[q].conj() * C64::from_polar(damp, overlap - (phi[s] - phi[q]));
            }
        }
        let mut out = vec![C64::new(0.0, 0.0); 16];
        for r in 0..4 {
            for col in 0..4 {
                let mut acc = C64::new(0.0, 0.0);
                for s in 0..4 {
                    for q in 0..4 {
                        acc += x[s][q] * (had(r, s) * had(q, col));
                    }
                }
                out[r * 4 + col] = acc;
            }
        }
        out
    }

    /// Spin density from |00⟩.
    pub fn spin_density(&self, t: f64) -> Vec<C64> {
        let mut psi = [C64::new(0.0, 0.0); 4];
        psi[0] = C64::new(1.0, 0.0);
        self.spin_density_from(&psi, t)
    }

    /// [P00, P01, P10, P11] from |00⟩.
    pub fn populations(&self, t: f64) -> [f64; 4] {
        let rho = self.spin_density(t);
        core::array::from_fn(|i| rho[i * 5].re)
    }
}
