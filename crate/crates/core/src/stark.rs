//! Light shifts from the addressing beam: ground-state Stark shift,
//! differential clock shift, tweezer confinement and combined mode frequency.
//!
//! Sign convention: Δ = ω_L − ω0, so red detuning gives a negative
//! (trapping) shift.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::consts::{HBAR, SPEED_OF_LIGHT, YB171_HYPERFINE_HZ};
use crate::error::{invalid, require};
use crate::focalfield::{FieldSource, FocalField, FocusParams};
use crate::{Error, Result};

/// One dipole transition contributing to the shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicLine {
    /// rad/s.
    pub transition_freq: f64,
    /// rad/s.
    pub linewidth: f64,
    /// Relative line strength (1 for a two-level model).
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicLineData {
    pub lines: Vec<AtomicLine>,
    /// rad/s.
    pub laser_freq: f64,
    /// rad/s.
    pub hyperfine_splitting: f64,
}

// Resonance within the rounding of optical frequencies.
fn is_resonant(delta: f64, offset: f64, optical: f64) -> bool {
    (delta - offset).abs() <= 1e-12 * optical.abs()
}

fn angular(wavelength: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / wavelength
}

/// ²S½ → ²P½ line of Yb⁺ at 369.5 nm.
pub const YB_D1: (f64, f64) = (369.5262e-9, 19.6e6);
/// ²S½ → ²P3/2 line of Yb⁺ at 328.9 nm.
pub const YB_D2: (f64, f64) = (328.9370e-9, 25.9e6);

impl AtomicLineData {
    /// Two-level model on the 369.5 nm line.
    pub fn yb171_two_level(laser_wavelength: f64) -> Self {
        Self {
            lines: alloc::vec![AtomicLine { transition_freq: angular(YB_D1.0), linewidth: 2.0 * PI * YB_D1.1, weight: 1.0 }],
            laser_freq: angular(laser_wavelength),
            hyperfine_splitting: 2.0 * PI * YB171_HYPERFINE_HZ,
        }
    }

    /// D1 + D2 doublet with the 1/3 : 2/3 strengths for linear polarization.
    pub fn yb171_doublet(laser_wavelength: f64) -> Self {
        Self {
            lines: alloc::vec![
                AtomicLine { transition_freq: angular(YB_D1.0), linewidth: 2.0 * PI * YB_D1.1, weight: 1.0 / 3.0 },
                AtomicLine { transition_freq: angular(YB_D2.0), linewidth: 2.0 * PI * YB_D2.1, weight: 2.0 / 3.0 },
            ],
            laser_freq: angular(laser_wavelength),
            hyperfine_splitting: 2.0 * PI * YB171_HYPERFINE_HZ,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require(!self.lines.is_empty(), "lines", "need at least one transition")?;
        for l in &self.lines {
            require(l.linewidth > 0.0, "linewidth", "must be positive")?;
            require(l.transition_freq > 0.0, "transition_freq", "must be positive")?;
            if is_resonant(self.laser_freq - l.transition_freq, 0.0, self.laser_freq) {
                return Err(Error::Singular("detuning: laser is resonant with a transition"));
            }
        }
        Ok(())
    }

    /// Δ = ω_L − ω0 of each line.
    pub fn detunings(&self) -> Vec<f64> {
        self.lines.iter().map(|l| self.laser_freq - l.transition_freq).collect()
    }

    fn shift_per_intensity(&self, level_offset: f64) -> Result<f64> {
        self.validate()?;
        let mut total = 0.0;
        for l in &self.lines {
            let delta = self.laser_freq - l.transition_freq - level_offset;
            if is_resonant(delta, 0.0, self.laser_freq) {
                return Err(Error::Singular("detuning: Δ equals the hyperfine splitting"));
            }
            total += l.weight * 3.0 * PI * SPEED_OF_LIGHT * SPEED_OF_LIGHT / (2.0 * l.transition_freq.powi(3)) * (l.linewidth / delta);
        }
        Ok(total / HBAR)
    }
}

/// Ground-state shift U_T = Σ w·(3πc²/2ω0³)(Γ/Δ)·I, returned in rad/s.
pub fn stark_shift(lines: &AtomicLineData, intensity: f64) -> Result<f64> {
    require(intensity >= 0.0 && intensity.is_finite(), "intensity", "must be non-negative")?;
    Ok(lines.shift_per_intensity(0.0)? * intensity)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferentialShift {
    /// U·ω_HF/(Δ − ω_HF) summed over lines, rad/s.
    pub exact: f64,
    /// U·ω_HF/Δ summed over lines, rad/s.
    pub approx: f64,
    /// Set when some |Δ| < 100·ω_HF, where the approximation is poor.
    pub approximation_warning: bool,
}

/// Differential shift between the clock states for a total shift `ground_shift`
/// produced by `lines`. The split across lines follows their share of the shift.
pub fn differential_shift(ground_shift: f64, lines: &AtomicLineData) -> Result<DifferentialShift> {
    let per_i = lines.shift_per_intensity(0.0)?;
    if per_i == 0.0 {
        return Err(invalid("lines", "total line strength is zero"));
    }
    let intensity = ground_shift / per_i;
    let w_hf = lines.hyperfine_splitting;
    let mut exact = 0.0;
    let mut approx = 0.0;
    let mut warn = false;
    for l in &lines.lines {
        let delta = lines.laser_freq - l.transition_freq;
        if is_resonant(delta, w_hf, lines.laser_freq) {
            return Err(Error::Singular("detuning: Δ equals the hyperfine splitting"));
        }
        let single = AtomicLineData { lines: alloc::vec![*l], laser_freq: lines.laser_freq, hyperfine_splitting: w_hf };
        let u = single.shift_per_intensity(0.0)? * intensity;
        exact += u * w_hf / (delta - w_hf);
        approx += u * w_hf / delta;
        warn |= delta.abs() < 100.0 * w_hf.abs();
    }
    Ok(DifferentialShift { exact, approx, approximation_warning: warn })
}

/// ω_T = √(4ħ|U_T(0)|/(M·w0T²)) with w0T the intensity 1/e radius.
pub fn tweezer_frequency(ground_shift: f64, waist: f64, mass: f64) -> Result<f64> {
    require(waist > 0.0 && waist.is_finite(), "waist", "must be positive")?;
    require(mass > 0.0, "mass", "must be positive")?;
    Ok((4.0 * HBAR * ground_shift.abs() / (mass * waist * waist)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedFrequency {
    /// √(ω_P² + ω_T²).
    pub exact: f64,
    /// ω_P + ω_T²/(2ω_P).
    pub approx: f64,
}

pub fn combined_mode_frequency(trap_freq: f64, tweezer_freq: f64) -> Result<CombinedFrequency> {
    require(trap_freq > 0.0, "trap_freq", "must be positive")?;
    Ok(CombinedFrequency {
        exact: trap_freq.hypot(tweezer_freq),
        approx: trap_freq + tweezer_freq * tweezer_freq / (2.0 * trap_freq),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftSample {
    pub x: f64,
    /// Shift of the lower clock state, rad/s.
    pub level0: f64,
    /// Shift of the upper clock state, rad/s.
    pub level1: f64,
    /// level1 − level0, rad/s.
    pub differential: f64,
}

/// Per-level light shifts along the focal-plane x axis.
pub fn shift_map(focus: &FocusParams, lines: &AtomicLineData, grid: &[f64]) -> Result<Vec<ShiftSample>> {
    let field = FocalField::new(focus, FieldSource::RichardsWolf)?;
    let k0 = lines.shift_per_intensity(0.0)?;
    let k1 = lines.shift_per_intensity(lines.hyperfine_splitting)?;
    let mut out = Vec::with_capacity(grid.len());
    for &x in grid {
        let i = field.sample(x)?.intensity();
        let (l0, l1) = (k0 * i, k1 * i);
        out.push(ShiftSample { x, level0: l0, level1: l1, differential: l1 - l0 });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftReport {
    /// Peak intensity, W/m².
    pub peak_intensity: f64,
    /// rad/s.
    pub ground_shift: f64,
    pub differential: DifferentialShift,
    /// Intensity 1/e radius used for the tweezer, meters.
    pub tweezer_waist: f64,
    /// rad/s.
    pub tweezer: f64,
    pub combined: CombinedFrequency,
}

/// Light-shift summary at the beam center for a mode at `trap_freq`.
pub fn shift_report(focus: &FocusParams, lines: &AtomicLineData, mass: f64, trap_freq: f64) -> Result<ShiftReport> {
    let field = FocalField::new(focus, FieldSource::RichardsWolf)?;
    let peak_intensity = field.sample(0.0)?.intensity();
    let ground_shift = stark_shift(lines, peak_intensity)?;
    let differential = differential_shift(ground_shift, lines)?;
    let tweezer_waist = field.intensity_radius()?;
    let tweezer = tweezer_frequency(ground_shift, tweezer_waist, mass)?;
    let combined = combined_mode_frequency(trap_freq, tweezer)?;
    Ok(ShiftReport { peak_intensity, ground_shift, differential, tweezer_waist, tweezer, combined })
}
