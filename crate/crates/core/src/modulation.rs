//! Raman beam generation: EOM phase modulation, frequency doubling, the
//! unequal-arm AOM interferometer and the resulting two-photon drive.

use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::consts::HBAR;
use crate::error::require;
use crate::special::bessel_j_table;
use crate::{Error, Result, C64};

/// Smallest order cut with negligible discarded power for depth `beta`.
pub fn default_order_cut(beta: f64) -> usize {
    10usize.max((3.0 * beta.abs() + 10.0).ceil() as usize)
}

/// Comb lines `(n, amplitude)` for |n| ≤ cut, ascending in n.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub lines: Vec<(i32, f64)>,
    /// Power (amplitude²) not represented by `lines`.
    pub discarded_power: f64,
}

impl Spectrum {
    pub fn power(&self) -> f64 {
        self.lines.iter().map(|(_, a)| a * a).sum()
    }

    pub fn amplitude(&self, n: i32) -> Option<f64> {
        self.lines.iter().find(|(m, _)| *m == n).map(|(_, a)| *a)
    }
}

fn comb(depth: f64, cut: usize, scale: f64) -> Result<Spectrum> {
    require(cut >= 1, "order_cut", "must be at least 1")?;
    require(depth.is_finite(), "modulation_depth", "must be finite")?;
    let table = bessel_j_table(depth, cut);
    let mut lines = Vec::with_capacity(2 * cut + 1);
    for n in -(cut as i32)..=(cut as i32) {
        let m = n.unsigned_abs() as usize;
        let j = if n < 0 && m % 2 == 1 { -table[m] } else { table[m] };
        lines.push((n, scale * j));
    }
    // 1 - Σ J_n² summed from the tail outwards to limit cancellation.
    let tail: f64 = {
        let wide = bessel_j_table(depth, cut + default_order_cut(depth) + 20);
        wide[cut + 1..].iter().map(|j| 2.0 * j * j).sum()
    };
    Ok(Spectrum { lines, discarded_power: scale * scale * tail })
}

/// EOM phase-modulation comb, amplitudes J_n(β).
pub fn eom_spectrum(modulation_depth: f64, order_cut: usize) -> Result<Spectrum> {
    comb(modulation_depth, order_cut, 1.0)
}

/// Comb after second-harmonic generation: amplitudes η·J_n(2β), spacing ω_RF.
pub fn doubled_spectrum(config: &ModulationConfig, order_cut: usize) -> Result<Spectrum> {
    config.validate()?;
    comb(2.0 * config.modulation_depth, order_cut, config.shg_efficiency)
}

/// Interference factor `f(φ, β) = Σ_n J_n(2β)·J_{n-1}(2β)·exp(inφ)` with
/// φ = δk·Δx. Terms are summed in the pairs n ↔ 1−n, which cancel exactly at
/// φ = 0.
pub fn interference_factor(delay_phase: f64, modulation_depth: f64) -> C64 {
    let depth = 2.0 * modulation_depth;
    let cut = default_order_cut(depth) + 10;
    let j = bessel_j_table(depth, cut);
    let signed = |n: i32| -> f64 {
        let m = n.unsigned_abs() as usize;
        if n < 0 && m % 2 == 1 {
            -j[m]
        } else {
            j[m]
        }
    };
    let mut sum = C64::new(0.0, 0.0);
    for n in (1..=cut as i32).rev() {
        let w = signed(n) * signed(n - 1);
        let a = n as f64 * delay_phase;
        let b = (1 - n) as f64 * delay_phase;
        sum += C64::new(a.cos() - b.cos(), a.sin() - b.sin()) * w;
    }
    sum
}

/// Triangle-inequality bound `Σ |J_n(2β) J_{n-1}(2β)|` on |f|.
pub fn interference_bound(modulation_depth: f64) -> f64 {
    let depth = 2.0 * modulation_depth;
    let cut = default_order_cut(depth) + 10;
    let j = bessel_j_table(depth, cut);
    // |J_{-m}| = |J_m|, so n and 1-n contribute equally.
    (1..=cut).map(|n| 2.0 * (j[n] * j[n - 1]).abs()).sum()
}

/// Static Raman phase φ(x, Δx) = (δk_A1 + δk_A2)·x + δk_A2·Δx − δk·x.
pub fn raman_phase(dk_a1: f64, dk_a2: f64, dk: f64, x: f64, path_difference: f64) -> f64 {
    (dk_a1 + dk_a2) * x + dk_a2 * path_difference - dk * x
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationConfig {
    /// EOM drive frequency, Hz.
    pub eom_freq: f64,
    /// Phase-modulation depth, radians.
    pub modulation_depth: f64,
    /// First AOM frequency, Hz.
    pub aom1_freq: f64,
    /// Second AOM frequency, Hz (aom1 ± δ).
    pub aom2_freq: f64,
    /// δk·Δx, radians.
    pub delay_phase: f64,
    pub shg_efficiency: f64,
    /// Arm field amplitudes in field units.
    pub arm_amplitudes: [f64; 2],
    /// Hyperfine splitting, Hz.
    pub qubit_splitting: f64,
    /// Collapsed μ1μ2/(ħ²Δ) prefactor, rad/s per field-unit².
    pub coupling: f64,
    /// Static Raman phase φ(x, Δx), radians.
    pub static_phase: f64,
    /// Allowed mismatch of the resonance relation, Hz.
    pub resonance_tolerance: f64,
}

impl ModulationConfig {
    /// EOM frequency that makes the carrier resonant: ω_HF + 2·ω_AOM.
    pub fn resonant_eom_freq(qubit_splitting: f64, aom1_freq: f64) -> f64 {
        qubit_splitting + 2.0 * aom1_freq
    }

    pub fn validate(&self) -> Result<()> {
        require(self.shg_efficiency > 0.0 && self.shg_efficiency <= 1.0, "shg_efficiency", "must lie in (0, 1]")?;
        require(self.modulation_depth.is_finite(), "modulation_depth", "must be finite")?;
        for v in [self.eom_freq, self.aom1_freq, self.aom2_freq, self.qubit_splitting, self.delay_phase, self.coupling] {
            require(v.is_finite(), "modulation", "frequencies and phases must be finite")?;
        }
        require(self.arm_amplitudes.iter().all(|a| a.is_finite()), "arm_amplitudes", "must be finite")?;
        Ok(())
    }

    /// Mismatch ω_RF − (ω_HF + 2ω_AOM) in Hz.
    pub fn resonance_mismatch(&self) -> f64 {
        self.eom_freq - Self::resonant_eom_freq(self.qubit_splitting, self.aom1_freq)
    }
}

/// Dipole prefactor μ1μ2/(ħ²Δ) for dipoles in C·m and detuning in rad/s.
pub fn dipole_coupling(mu1: f64, mu2: f64, raman_detuning: f64) -> Result<f64> {
    require(raman_detuning != 0.0, "raman_detuning", "must be nonzero")?;
    Ok(mu1 * mu2 / (HBAR * HBAR * raman_detuning))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveRabi {
    /// rad/s.
    pub magnitude: f64,
    /// Two-photon detuning δ = f_AOM2 − f_AOM1, Hz.
    pub detuning: f64,
    /// arg f − φ(x, Δx), radians.
    pub phase: f64,
}

/// Two-photon drive `(E_A1·E_A2/4)·f(δkΔx, β)·exp[i(δt − φ)]` scaled by the
/// collapsed coupling.
pub fn effective_rabi(config: &ModulationConfig) -> Result<EffectiveRabi> {
    config.validate()?;
    let mismatch = config.resonance_mismatch();
    if mismatch.abs() > config.resonance_tolerance.abs() {
        return Err(Error::InvalidParameter {
            name: "eom_freq",
            reason: alloc::format!(
                "resonance requires eom_freq = qubit_splitting + 2·aom1_freq = {} Hz; off by {} Hz",
                ModulationConfig::resonant_eom_freq(config.qubit_splitting, config.aom1_freq),
                mismatch
            ),
        });
    }
    let f = interference_factor(config.delay_phase, config.modulation_depth);
    let [a1, a2] = config.arm_amplitudes;
    let drive = f * (config.coupling * a1 * a2 / 4.0);
    let phase = if drive.norm() > 0.0 { drive.arg() - config.static_phase } else { -config.static_phase };
    Ok(EffectiveRabi { magnitude: drive.norm(), detuning: config.aom2_freq - config.aom1_freq, phase })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToneLabel {
    Carrier,
    RedSideband,
    BlueSideband,
}

impl ToneLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Carrier => "carrier",
            Self::RedSideband => "red_sideband",
            Self::BlueSideband => "blue_sideband",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneSpec {
    pub label: ToneLabel,
    /// Offset of the second AOM drive from its carrier frequency, Hz.
    pub aom2_offset: f64,
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneRequest {
    /// Addressed mode frequency in Hz, or `None` for a bare carrier drive.
    pub mode_freq: Option<f64>,
    /// Gate detuning from the mode, Hz.
    pub gate_detuning: f64,
    pub carrier_amplitude: f64,
    pub sideband_amplitude: f64,
    /// Multiplicative (red, blue) calibration factors.
    pub balance: [f64; 2],
    pub sideband_phase: f64,
    /// Tones closer than this (Hz) are reported as colliding.
    pub resolution: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneCollision {
    pub first: ToneLabel,
    pub second: ToneLabel,
    pub separation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TonePlan {
    pub tones: Vec<ToneSpec>,
    pub collisions: Vec<ToneCollision>,
}

/// Carrier plus red/blue sideband tones at ∓(f_mode + δ) about resonance.
pub fn tone_plan(request: &ToneRequest) -> Result<TonePlan> {
    require(request.balance.iter().all(|b| b.is_finite() && *b >= 0.0), "balance", "must be non-negative")?;
    let mut tones = Vec::new();
    match request.mode_freq {
        None => tones.push(ToneSpec {
            label: ToneLabel::Carrier,
            aom2_offset: request.gate_detuning,
            amplitude: request.carrier_amplitude,
            phase: 0.0,
        }),
        Some(mode) => {
            require(mode > 0.0 && mode.is_finite(), "mode_freq", "must be positive")?;
            if request.carrier_amplitude != 0.0 {
                tones.push(ToneSpec { label: ToneLabel::Carrier, aom2_offset: 0.0, amplitude: request.carrier_amplitude, phase: 0.0 });
            }
            let offset = mode + request.gate_detuning;
            tones.push(ToneSpec {
                label: ToneLabel::RedSideband,
                aom2_offset: -offset,
                amplitude: request.sideband_amplitude * request.balance[0],
                phase: request.sideband_phase,
            });
            tones.push(ToneSpec {
                label: ToneLabel::BlueSideband,
                aom2_offset: offset,
                amplitude: request.sideband_amplitude * request.balance[1],
                phase: request.sideband_phase,
            });
        }
    }
    let mut collisions = Vec::new();
    for i in 0..tones.len() {
        for j in i + 1..tones.len() {
            let separation = (tones[i].aom2_offset - tones[j].aom2_offset).abs();
            if separation < request.resolution {
                collisions.push(ToneCollision { first: tones[i].label, second: tones[j].label, separation });
            }
        }
    }
    Ok(TonePlan { tones, collisions })
}
