//! Run configuration: a JSON document with unit-suffixed keys. Every section
//! and key is optional; missing values take the defaults below. Unknown keys
//! are rejected.

use std::f64::consts::PI;
use std::path::Path;

use pgate_core::consts::{ATOMIC_MASS_UNIT, ELEMENTARY_CHARGE, YB171_MASS_AMU};
use pgate_core::ionchain::ChainSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCHEMA: &str = include_str!("../schema/run_config.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub trap: Trap,
    pub optics: Optics,
    pub gate: Gate,
    pub noise: Noise,
    pub spam: Spam,
    pub profile: Profile,
    pub parity: Parity,
    pub stark: Stark,
    pub scan: Scan,
    pub tones: Tones,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            trap: Trap::default(),
            optics: Optics::default(),
            gate: Gate::default(),
            noise: Noise::default(),
            spam: Spam::default(),
            profile: Profile::default(),
            parity: Parity::default(),
            stark: Stark::default(),
            scan: Scan::default(),
            tones: Tones::default(),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Trap {
    pub com_freq_hz: f64,
    pub n_ions: usize,
    pub mass_amu: f64,
}

impl Default for Trap {
    fn default() -> Self {
        Self { com_freq_hz: 287e3, n_ions: 2, mass_amu: YB171_MASS_AMU }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldModel {
    RichardsWolf,
    Paraxial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Optics {
    pub na: f64,
    pub wavelength_nm: f64,
    pub power_mw: f64,
    /// Peak Rabi rate of the measured profile.
    pub peak_rabi_hz: f64,
    /// Field 1/e radius of the measured profile; the Richards-Wolf fit is
    /// used when absent.
    pub waist_um: Option<f64>,
    pub field_model: FieldModel,
}

impl Default for Optics {
    fn default() -> Self {
        Self {
            na: 0.4,
            wavelength_nm: 532.0,
            power_mw: 100.0,
            peak_rabi_hz: 75.3e3,
            waist_um: Some(0.813),
            field_model: FieldModel::RichardsWolf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Gate {
    pub ion_pair: [usize; 2],
    pub mode: usize,
    /// Sideband detuning; defaults to loops/gate time.
    pub detuning_hz: Option<f64>,
    /// Defaults to loops/detuning, or 367 µs when neither is set.
    pub gate_time_us: Option<f64>,
    pub loops: u32,
    pub alignment_offset_nm: f64,
    pub fock_cut: Option<usize>,
    pub trajectory_points: usize,
}

impl Default for Gate {
    fn default() -> Self {
        Self {
            ion_pair: [0, 1],
            mode: 1,
            detuning_hz: None,
            gate_time_us: None,
            loops: 1,
            alignment_offset_nm: 0.0,
            fock_cut: None,
            trajectory_points: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Noise {
    /// Motional coherence time; `null` disables dephasing.
    pub t2_ms: Option<f64>,
    pub heating_qps: f64,
    pub rabi_sigma: f64,
    pub detuning_err_hz: f64,
    pub nbar: f64,
    /// Residual carrier Ω(x0)/Ω_m.
    pub carrier_ratio: f64,
    /// Scale on the profile's third-order term.
    pub thermal_scale: f64,
}

impl Default for Noise {
    fn default() -> Self {
        Self {
            t2_ms: Some(108.0),
            heating_qps: 3.5,
            rabi_sigma: 0.01,
            detuning_err_hz: 30.0,
            nbar: 6.0,
            carrier_ratio: 1.0 / 15.0,
            thermal_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Spam {
    /// Readout fidelity per qubit.
    pub fidelity: Vec<f64>,
}

impl Default for Spam {
    fn default() -> Self {
        Self { fidelity: vec![0.993, 0.993] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Profile {
    pub span_um: f64,
    pub points: usize,
}

impl Default for Profile {
    fn default() -> Self {
        Self { span_um: 2.0, points: 81 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Parity {
    pub points: usize,
}

impl Default for Parity {
    fn default() -> Self {
        Self { points: 33 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineModel {
    Doublet,
    TwoLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Stark {
    pub na: f64,
    pub power_mw: f64,
    pub lines: LineModel,
    pub span_um: f64,
    pub points: usize,
}

impl Default for Stark {
    fn default() -> Self {
        Self { na: 0.3, power_mw: 100.0, lines: LineModel::Doublet, span_um: 3.0, points: 61 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scan {
    pub pulse_time_us: f64,
    pub span_um: f64,
    pub points: usize,
    pub shots: u32,
    pub alignment_offset_nm: f64,
}

impl Default for Scan {
    fn default() -> Self {
        Self { pulse_time_us: 7.0, span_um: 2.4, points: 41, shots: 200, alignment_offset_nm: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tones {
    pub sideband_amplitude: f64,
    pub carrier_amplitude: f64,
    pub balance: [f64; 2],
    pub resolution_hz: f64,
}

impl Default for Tones {
    fn default() -> Self {
        Self { sideband_amplitude: 1.0, carrier_amplitude: 0.0, balance: [1.0, 1.0], resolution_hz: 1e3 }
    }
}

fn check(cond: bool, key: &str, reason: &str) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::config(format!("{key}: {reason}")))
    }
}

fn positive(v: f64, key: &str) -> Result<(), CliError> {
    check(v > 0.0 && v.is_finite(), key, "must be positive")
}

fn non_negative(v: f64, key: &str) -> Result<(), CliError> {
    check(v >= 0.0 && v.is_finite(), key, "must be non-negative")
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let t = &self.trap;
        positive(t.com_freq_hz, "trap.com_freq_hz")?;
        positive(t.mass_amu, "trap.mass_amu")?;
        check((1..=64).contains(&t.n_ions), "trap.n_ions", "must lie in 1..=64")?;

        let o = &self.optics;
        check(o.na > 0.0 && o.na < 1.0, "optics.na", "must lie in (0, 1)")?;
        positive(o.wavelength_nm, "optics.wavelength_nm")?;
        positive(o.power_mw, "optics.power_mw")?;
        positive(o.peak_rabi_hz, "optics.peak_rabi_hz")?;
        if let Some(w) = o.waist_um {
            positive(w, "optics.waist_um")?;
        }

        let g = &self.gate;
        check(g.ion_pair[0] != g.ion_pair[1], "gate.ion_pair", "must name two distinct ions")?;
        check(g.ion_pair.iter().all(|&i| i < t.n_ions), "gate.ion_pair", "ion index out of range")?;
        check(g.mode < t.n_ions, "gate.mode", "mode index out of range")?;
        check(g.loops >= 1, "gate.loops", "must be at least 1")?;
        check(g.alignment_offset_nm.is_finite(), "gate.alignment_offset_nm", "must be finite")?;
        check(g.trajectory_points >= 2, "gate.trajectory_points", "must be at least 2")?;
        if let Some(d) = g.detuning_hz {
            positive(d, "gate.detuning_hz")?;
        }
        if let Some(tg) = g.gate_time_us {
            positive(tg, "gate.gate_time_us")?;
        }
        if let (Some(d), Some(tg)) = (g.detuning_hz, g.gate_time_us) {
            let k = g.loops as f64;
            check(
                (d * tg * 1e-6 - k).abs() <= 1e-9 * k,
                "gate.detuning_hz",
                "must equal loops / gate_time (closure); set only one of detuning_hz and gate_time_us",
            )?;
        }
        if let Some(f) = g.fock_cut {
            check(f >= 2, "gate.fock_cut", "must be at least 2")?;
        }

        let n = &self.noise;
        if let Some(t2) = n.t2_ms {
            positive(t2, "noise.t2_ms")?;
        }
        non_negative(n.heating_qps, "noise.heating_qps")?;
        non_negative(n.rabi_sigma, "noise.rabi_sigma")?;
        check(n.detuning_err_hz.is_finite(), "noise.detuning_err_hz", "must be finite")?;
        non_negative(n.nbar, "noise.nbar")?;
        non_negative(n.carrier_ratio, "noise.carrier_ratio")?;
        non_negative(n.thermal_scale, "noise.thermal_scale")?;

        check(self.spam.fidelity.len() == 2, "spam.fidelity", "needs one value per gate qubit (2)")?;
        check(self.spam.fidelity.iter().all(|f| *f > 0.5 && *f <= 1.0), "spam.fidelity", "must lie in (0.5, 1]")?;

        positive(self.profile.span_um, "profile.span_um")?;
        check(self.profile.points >= 7, "profile.points", "must be at least 7")?;
        check(self.parity.points >= 5, "parity.points", "must be at least 5")?;

        let s = &self.stark;
        check(s.na > 0.0 && s.na < 1.0, "stark.na", "must lie in (0, 1)")?;
        positive(s.power_mw, "stark.power_mw")?;
        positive(s.span_um, "stark.span_um")?;
        check(s.points >= 2, "stark.points", "must be at least 2")?;

        let sc = &self.scan;
        positive(sc.pulse_time_us, "scan.pulse_time_us")?;
        positive(sc.span_um, "scan.span_um")?;
        check(sc.points >= 7, "scan.points", "must be at least 7")?;
        check(sc.alignment_offset_nm.is_finite(), "scan.alignment_offset_nm", "must be finite")?;

        let tn = &self.tones;
        check(tn.sideband_amplitude.is_finite(), "tones.sideband_amplitude", "must be finite")?;
        check(tn.carrier_amplitude.is_finite(), "tones.carrier_amplitude", "must be finite")?;
        check(tn.balance.iter().all(|b| *b >= 0.0 && b.is_finite()), "tones.balance", "must be non-negative")?;
        non_negative(tn.resolution_hz, "tones.resolution_hz")?;
        Ok(())
    }

    /// Canonical JSON of the resolved configuration.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of [`RunConfig::canonical`], hex encoded.
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn chain(&self) -> ChainSpec {
        ChainSpec {
            n_ions: self.trap.n_ions,
            com_freq: 2.0 * PI * self.trap.com_freq_hz,
            mass: self.trap.mass_amu * ATOMIC_MASS_UNIT,
            charge: ELEMENTARY_CHARGE,
        }
    }

    pub fn mass(&self) -> f64 {
        self.trap.mass_amu * ATOMIC_MASS_UNIT
    }

    /// Gate time in seconds after closure.
    pub fn gate_time(&self) -> f64 {
        let g = &self.gate;
        match (g.gate_time_us, g.detuning_hz) {
            (Some(t), _) => t * 1e-6,
            (None, Some(d)) => g.loops as f64 / d,
            (None, None) => 367e-6,
        }
    }

    pub fn wavelength(&self) -> f64 {
        self.optics.wavelength_nm * 1e-9
    }
}

/// Symmetric grid of `points` samples over ±`half_span`.
pub fn grid(half_span: f64, points: usize) -> Vec<f64> {
    let step = 2.0 * half_span / (points - 1) as f64;
    (0..points).map(|i| -half_span + i as f64 * step).collect()
}
