use alloc::format;
use alloc::vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::error::{invalid, require};
use crate::focalfield::ProfileShape;
use crate::ionchain::ModeSpectrum;
use crate::modulation::ToneRequest;
use crate::{Error, Result, C64};

use super::hamiltonian::{Coefficient, Hamiltonian, PhaseTerm, SpinBasis};
use super::operator::SparseOp;

/// Bichromatic MS drive on one mode of a two-ion pair. Frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSpec {
    pub ion_pair: (usize, usize),
    pub mode: usize,
    /// Addressed mode frequency ν.
    pub mode_freq: f64,
    /// Sideband detuning δ from the mode.
    pub detuning: f64,
    /// Sideband Rabi rates Ω_s per ion (signed by mode participation).
    pub sideband_rabi: [f64; 2],
    /// Residual carrier Rabi rates Ω(x0) per ion.
    pub carrier_rabi: [f64; 2],
    /// Third-order profile coefficients Ω'''(x0)·(x_ω b)³/6 per ion.
    pub cubic_rabi: [f64; 2],
    /// Seconds.
    pub gate_time: f64,
    pub loops: u32,
}

impl GateSpec {
    /// Ideal gate: δ·t_gate = 2πK and |Ω_s1·Ω_s2| = δ²/(4K), with the drive
    /// split between the ions in proportion to their participation.
    pub fn ideal(mode_freq: f64, gate_time: f64, loops: u32, participation: [f64; 2]) -> Result<Self> {
        require(gate_time > 0.0 && gate_time.is_finite(), "gate_time", "must be positive")?;
        require(loops >= 1, "loops", "must be at least 1")?;
        require(mode_freq > 0.0, "mode_freq", "must be positive")?;
        let prod = (participation[0] * participation[1]).abs();
        require(prod > 0.0, "participation", "both ions must take part in the mode")?;
        let delta = 2.0 * PI * loops as f64 / gate_time;
        let g = delta / (2.0 * (loops as f64 * prod).sqrt());
        Ok(Self {
            ion_pair: (0, 1),
            mode: 0,
            mode_freq,
            detuning: delta,
            sideband_rabi: [g * participation[0], g * participation[1]],
            carrier_rabi: [0.0; 2],
            cubic_rabi: [0.0; 2],
            gate_time,
            loops,
        })
    }

    /// Gate from a fitted Rabi profile and a mode spectrum. Ion `i` sits at
    /// `offsets[i]` from its beam center; the common drive power is chosen to
    /// meet the phase condition, and the carrier and third-order terms follow
    /// from the same profile.
    pub fn from_profile(
        shape: &ProfileShape,
        spectrum: &ModeSpectrum,
        ion_pair: (usize, usize),
        mode: usize,
        offsets: [f64; 2],
        gate_time: f64,
        loops: u32,
    ) -> Result<Self> {
        require(mode < spectrum.n_modes(), "mode", "index out of range")?;
        let n = spectrum.vectors.len();
        require(ion_pair.0 < n && ion_pair.1 < n && ion_pair.0 != ion_pair.1, "ion_pair", "must name two distinct ions")?;
        let ions = [ion_pair.0, ion_pair.1];
        let xw = spectrum.zero_point[mode];
        let b = ions.map(|i| spectrum.vectors[i][mode]);
        let raw = [0, 1].map(|k| shape.derivative(shape.x_center + offsets[k]) * xw * b[k]);
        let mut gate = Self::ideal(spectrum.frequencies[mode], gate_time, loops, [1.0, 1.0])?;
        let need = gate.detuning * gate.detuning / (4.0 * loops as f64);
        let have = (raw[0] * raw[1]).abs();
        if !(have > 0.0) {
            return Err(invalid("offsets", "an ion sits at a zero of the Rabi gradient"));
        }
        let s = (need / have).sqrt();
        gate.ion_pair = ion_pair;
        gate.mode = mode;
        gate.sideband_rabi = raw.map(|r| s * r);
        gate.carrier_rabi = [0, 1].map(|k| s * shape.value(shape.x_center + offsets[k]));
        gate.cubic_rabi = [0, 1].map(|k| s * shape.third_derivative(shape.x_center + offsets[k]) * (xw * b[k]).powi(3) / 6.0);
        Ok(gate)
    }

    pub fn validate(&self) -> Result<()> {
        require(self.gate_time > 0.0 && self.gate_time.is_finite(), "gate_time", "must be positive")?;
        require(self.loops >= 1, "loops", "must be at least 1")?;
        require(self.mode_freq > 0.0 && self.mode_freq.is_finite(), "mode_freq", "must be positive")?;
        require(self.detuning.is_finite(), "detuning", "must be finite")?;
        for v in self.sideband_rabi.iter().chain(&self.carrier_rabi).chain(&self.cubic_rabi) {
            require(v.is_finite(), "rabi", "rates must be finite")?;
        }
        Ok(())
    }

    /// δ·t_gate − 2πK.
    pub fn closure_error(&self) -> f64 {
        self.detuning * self.gate_time - 2.0 * PI * self.loops as f64
    }

    /// Ω_s1·Ω_s2·4K/δ² (±1 for an ideal gate).
    pub fn phase_condition(&self) -> f64 {
        self.sideband_rabi[0] * self.sideband_rabi[1] * 4.0 * self.loops as f64 / (self.detuning * self.detuning)
    }

    /// Every drive amplitude multiplied by `factor` (common-mode intensity noise).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            sideband_rabi: self.sideband_rabi.map(|v| v * factor),
            carrier_rabi: self.carrier_rabi.map(|v| v * factor),
            cubic_rabi: self.cubic_rabi.map(|v| v * factor),
            ..*self
        }
    }

    /// Largest phase-space displacement |α| over the gate at sideband detuning
    /// `detuning`.
    pub fn max_displacement(&self, detuning: f64) -> f64 {
        let f = 0.5 * (self.sideband_rabi[0].abs() + self.sideband_rabi[1].abs());
        let x = detuning * self.gate_time;
        if x.abs() >= PI {
            2.0 * f / detuning.abs()
        } else {
            // |1 − e^{-ix}|/|δ| = t·sinc(x/2) is increasing up to x = π.
            let half = 0.5 * x;
            let sinc = if half == 0.0 { 1.0 } else { half.sin() / half };
            f * self.gate_time * sinc.abs()
        }
    }

    /// Tone request for [`crate::modulation::tone_plan`], in Hz.
    pub fn tone_request(&self, sideband_amplitude: f64, balance: [f64; 2], resolution: f64) -> ToneRequest {
        ToneRequest {
            mode_freq: Some(self.mode_freq / (2.0 * PI)),
            gate_detuning: self.detuning / (2.0 * PI),
            carrier_amplitude: 0.0,
            sideband_amplitude,
            balance,
            sideband_phase: 0.0,
            resolution,
        }
    }
}

/// Motional noise and drive errors. Rates in SI units; `motional_t2 =
/// f64::INFINITY` disables dephasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Seconds.
    pub motional_t2: f64,
    /// Quanta per second.
    pub heating_rate: f64,
    /// Relative σ of the quasi-static common Rabi scale.
    pub rabi_sigma: f64,
    /// rad/s added to the gate detuning.
    pub detuning_error: f64,
    pub initial_nbar: f64,
}

impl NoiseModel {
    pub fn noiseless(initial_nbar: f64) -> Self {
        Self { motional_t2: f64::INFINITY, heating_rate: 0.0, rabi_sigma: 0.0, detuning_error: 0.0, initial_nbar }
    }

    pub fn validate(&self) -> Result<()> {
        require(self.motional_t2 > 0.0, "motional_t2", "must be positive (use infinity to disable)")?;
        require(self.heating_rate >= 0.0 && self.heating_rate.is_finite(), "heating_rate", "must be non-negative")?;
        require(self.rabi_sigma >= 0.0 && self.rabi_sigma.is_finite(), "rabi_sigma", "must be non-negative")?;
        require(self.detuning_error.is_finite(), "detuning_error", "must be finite")?;
        require(self.initial_nbar >= 0.0 && self.initial_nbar.is_finite(), "initial_nbar", "must be non-negative")?;
        Ok(())
    }
}

/// Fock cut that keeps both the thermal tail and the displaced wave packet
/// far below the truncation threshold.
pub fn default_fock_cut(nbar: f64, max_displacement: f64) -> usize {
    let base = (6.0 * nbar + 15.0).ceil() as usize;
    let tail = if nbar > 0.0 {
        // Smallest N whose thermal top-level population is ≤ 1e-8.
        let r = nbar / (nbar + 1.0);
        ((1e-8 * (nbar + 1.0)).ln() / r.ln()).ceil() as usize + 1
    } else {
        0
    };
    base.max(tail) + (4.0 * max_displacement * max_displacement).ceil() as usize
}

/// MS Hamiltonian in the interaction picture of qubit and mode, after the
/// rotating-wave approximation, written in the σx eigenbasis of both spins:
///
/// per ion, `σx_i ⊗ [(Ω_s/2)·a + (c3/2)·3a·n̂]·e^{iδ't} + h.c.` plus the
/// residual carrier `Ω(x0)·cos((ν+δ')t)·σx_i`, with δ' = δ + detuning error.
pub fn build_ms_hamiltonian(gate: &GateSpec, noise: &NoiseModel, fock: usize) -> Result<Hamiltonian> {
    gate.validate()?;
    noise.validate()?;
    require(fock >= 2, "fock", "must be at least 2")?;
    let detuning = gate.detuning + noise.detuning_error;
    let alpha = gate.max_displacement(detuning);
    let needed = 4.0 * (alpha * alpha + noise.initial_nbar);
    if (fock as f64) < needed {
        return Err(Error::InvalidParameter {
            name: "fock",
            reason: format!("cut {fock} is below 4·(|α|max² + n̄) = {needed:.1}"),
        });
    }
    let a = SparseOp::annihilation(fock);
    let n = SparseOp::number(fock);
    let a_n = a.matmul(&n).scale(C64::new(3.0, 0.0));
    let mut force = SparseOp::zero(4 * fock);
    let mut carrier_terms = vec![];
    for ion in 0..2 {
        // Bit of ion 0 is the major spin bit; bit value 0 ↔ σx = +1.
        let sx: [f64; 4] = core::array::from_fn(|s| if (s >> (1 - ion)) & 1 == 0 { 1.0 } else { -1.0 });
        let motion = a.scale(C64::new(0.5 * gate.sideband_rabi[ion], 0.0)).add(&a_n.scale(C64::new(0.5 * gate.cubic_rabi[ion], 0.0)));
        force = force.add(&SparseOp::diagonal(&sx).kron(&motion));
        if gate.carrier_rabi[ion] != 0.0 {
            carrier_terms.push(PhaseTerm {
                spin_diagonal: sx.to_vec(),
                amplitude: gate.carrier_rabi[ion],
                frequency: gate.mode_freq + detuning,
                phase: 0.0,
            });
        }
    }
    let mut h = Hamiltonian::new(2, fock, SpinBasis::X);
    if force.nnz() > 0 {
        let adj = force.adjoint();
        h.add_term(Coefficient::Rotating { amplitude: C64::new(1.0, 0.0), frequency: detuning }, force)?;
        h.add_term(Coefficient::Rotating { amplitude: C64::new(1.0, 0.0), frequency: -detuning }, adj)?;
    }
    for p in carrier_terms {
        h.add_phase_term(p)?;
    }
    Ok(h)
}
