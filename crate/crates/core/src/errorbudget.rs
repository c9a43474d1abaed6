//! Per-channel and joint MS-gate infidelity budget.
//!
//! Deterministic channels run the master equation and report the infidelity
//! relative to a noise-free run on the same Fock space, which removes the
//! common truncation and integration floor. Quasi-static Rabi noise is
//! sampled shot by shot with the closed-form gate solution.

use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dynamics::{
    analytic_ms, build_ms_hamiltonian, default_fock_cut, evolve_with, parity_contrast_spin, DensityState,
    EvolveOptions, GateSpec, NoiseModel,
};
use crate::error::require;
use crate::focalfield::ProfileShape;
use crate::ionchain::ModeSpectrum;
use crate::special::GaussHermite;
use crate::{Error, Result, C64};

const MC_BATCH: usize = 256;
const MC_MAX_SHOTS: usize = 65_536;
const MC_REL_STDERR: f64 = 0.1;
const JOINT_RABI_NODES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    MisSetDetuning,
    MotionalDephasing,
    Heating,
    RabiFluctuation,
    CarrierExcitation,
    ThermalErrors,
}

impl Channel {
    pub const ALL: [Channel; 6] = [
        Channel::MisSetDetuning,
        Channel::MotionalDephasing,
        Channel::Heating,
        Channel::RabiFluctuation,
        Channel::CarrierExcitation,
        Channel::ThermalErrors,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Channel::MisSetDetuning => "Mis-set Detuning",
            Channel::MotionalDephasing => "Motional Dephasing",
            Channel::Heating => "Heating",
            Channel::RabiFluctuation => "Rabi Frequency Fluctuation",
            Channel::CarrierExcitation => "Carrier Excitation",
            Channel::ThermalErrors => "Thermal Errors",
        }
    }

    /// Unit of the channel magnitude.
    pub fn unit(self) -> &'static str {
        match self {
            Channel::MisSetDetuning => "rad/s",
            Channel::MotionalDephasing => "1/s (1/T2)",
            Channel::Heating => "quanta/s",
            Channel::RabiFluctuation => "relative sigma",
            Channel::CarrierExcitation => "Omega(x0)/Omega_m",
            Channel::ThermalErrors => "scale",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Deterministic,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Deterministic => "deterministic",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelResult {
    pub infidelity: f64,
    pub stderr: f64,
    pub method: Method,
    /// Monte-Carlo shots used (0 for deterministic channels).
    pub shots: usize,
}

/// Everything a budget needs. `gate` must be carrier-free and third-order
/// free; the carrier and thermal channels add those terms themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetInputs {
    pub gate: GateSpec,
    pub noise: NoiseModel,
    /// Peak Rabi rate Ω_m at the gate's drive power (rad/s).
    pub peak_rabi: f64,
    /// Residual carrier Ω(x0)/Ω_m on both ions.
    pub carrier_ratio: f64,
    /// Third-order coefficients at unit thermal scale (rad/s).
    pub cubic_rabi: [f64; 2],
    pub thermal_scale: f64,
    /// Fock cut; chosen from n̄ and the displacement when `None`.
    pub fock: Option<usize>,
    pub evolve: EvolveOptions,
}

impl BudgetInputs {
    /// Inputs for a gate driven through a fitted profile. The carrier and
    /// third-order terms of the profile gate are moved into the budget.
    #[allow(clippy::too_many_arguments)]
    pub fn from_profile(
        shape: &ProfileShape,
        spectrum: &ModeSpectrum,
        ion_pair: (usize, usize),
        mode: usize,
        offsets: [f64; 2],
        gate_time: f64,
        loops: u32,
        noise: NoiseModel,
        carrier_ratio: f64,
        thermal_scale: f64,
    ) -> Result<Self> {
        let full = GateSpec::from_profile(shape, spectrum, ion_pair, mode, offsets, gate_time, loops)?;
        let x0 = shape.x_center + offsets[0];
        let unit = shape.derivative(x0) * spectrum.zero_point[mode] * spectrum.vectors[ion_pair.0][mode];
        let drive = (full.sideband_rabi[0] / unit).abs();
        Ok(Self {
            gate: GateSpec { carrier_rabi: [0.0; 2], cubic_rabi: [0.0; 2], ..full },
            noise,
            peak_rabi: drive * shape.peak_rabi(),
            carrier_ratio,
            cubic_rabi: full.cubic_rabi,
            thermal_scale,
            fock: None,
            evolve: EvolveOptions::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.gate.validate()?;
        self.noise.validate()?;
        require(
            self.gate.carrier_rabi == [0.0; 2] && self.gate.cubic_rabi == [0.0; 2],
            "gate",
            "must be carrier-free; use carrier_ratio and cubic_rabi",
        )?;
        require(self.peak_rabi >= 0.0 && self.peak_rabi.is_finite(), "peak_rabi", "must be non-negative")?;
        require(self.carrier_ratio >= 0.0 && self.carrier_ratio.is_finite(), "carrier_ratio", "must be non-negative")?;
        require(self.thermal_scale >= 0.0 && self.thermal_scale.is_finite(), "thermal_scale", "must be non-negative")?;
        require(self.cubic_rabi.iter().all(|c| c.is_finite()), "cubic_rabi", "must be finite")?;
        Ok(())
    }

    /// Current magnitude of `channel`, in the units of [`Channel::unit`].
    pub fn magnitude(&self, channel: Channel) -> f64 {
        match channel {
            Channel::MisSetDetuning => self.noise.detuning_error,
            Channel::MotionalDephasing => {
                if self.noise.motional_t2.is_finite() {
                    1.0 / self.noise.motional_t2
                } else {
                    0.0
                }
            }
            Channel::Heating => self.noise.heating_rate,
            Channel::RabiFluctuation => self.noise.rabi_sigma,
            Channel::CarrierExcitation => self.carrier_ratio,
            Channel::ThermalErrors => self.thermal_scale,
        }
    }

    fn fock_cut(&self) -> usize {
        self.fock.unwrap_or_else(|| {
            let sigma = self.noise.rabi_sigma;
            let alpha = self.gate.max_displacement(self.gate.detuning) * (1.0 + 3.0 * sigma).max(1.2);
            default_fock_cut(self.noise.initial_nbar, alpha)
        })
    }

    // Gate and noise with only `channel` active at `magnitude` (or every
    // channel at its configured magnitude when `channel` is None).
    fn configure(&self, channel: Option<(Channel, f64)>) -> (GateSpec, NoiseModel) {
        let m = |c: Channel| match channel {
            Some((active, v)) => {
                if active == c {
                    v
                } else {
                    0.0
                }
            }
            None => self.magnitude(c),
        };
        let dephasing = m(Channel::MotionalDephasing);
        let noise = NoiseModel {
            motional_t2: if dephasing > 0.0 { 1.0 / dephasing } else { f64::INFINITY },
            heating_rate: m(Channel::Heating),
            rabi_sigma: m(Channel::RabiFluctuation),
            detuning_error: m(Channel::MisSetDetuning),
            initial_nbar: self.noise.initial_nbar,
        };
        let carrier = m(Channel::CarrierExcitation) * self.peak_rabi;
        let thermal = m(Channel::ThermalErrors);
        let gate = GateSpec { carrier_rabi: [carrier; 2], cubic_rabi: self.cubic_rabi.map(|c| c * thermal), ..self.gate };
        (gate, noise)
    }
}

/// 1 − (P00 + P11 + contrast)/2 from a 4×4 spin density matrix.
pub(crate) fn spin_infidelity(rho: &[C64]) -> f64 {
    let p = [rho[0].re, rho[15].re];
    let contrast = parity_contrast_spin(rho);
    1.0 - 0.5 * (p[0] + p[1] + contrast)
}

fn master_infidelity(gate: &GateSpec, noise: &NoiseModel, fock: usize, opts: &EvolveOptions) -> Result<f64> {
    let h = build_ms_hamiltonian(gate, noise, fock)?;
    let rho0 = DensityState::thermal_basis(2, 0, fock, noise.initial_nbar)?;
    let ev = evolve_with(&h, noise, &rho0, &[0.0, gate.gate_time], opts)?;
    Ok(spin_infidelity(&ev.states[1].spin_reduced()))
}

// Closed-form infidelity of a carrier-free gate with mis-set detuning.
fn analytic_infidelity(gate: &GateSpec, detuning_error: f64, nbar: f64) -> Result<f64> {
    let g = GateSpec { detuning: gate.detuning + detuning_error, ..*gate };
    Ok(spin_infidelity(&analytic_ms(&g, nbar)?.spin_density(gate.gate_time)))
}

fn rabi_monte_carlo(inputs: &BudgetInputs, sigma: f64, seed: u64) -> Result<ChannelResult> {
    if sigma == 0.0 {
        return Ok(ChannelResult { infidelity: 0.0, stderr: 0.0, method: Method::MonteCarlo, shots: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nbar = inputs.noise.initial_nbar;
    let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
    loop {
        for _ in 0..MC_BATCH {
            let z: f64 = StandardNormal.sample(&mut rng);
            let gate = inputs.gate.scaled(1.0 + sigma * z);
            let x = analytic_infidelity(&gate, 0.0, nbar)?;
            n += 1;
            let d = x - mean;
            mean += d / n as f64;
            m2 += d * (x - mean);
        }
        let stderr = (m2 / ((n - 1) as f64 * n as f64)).sqrt();
        if stderr < MC_REL_STDERR * mean.abs() || stderr == 0.0 {
            return Ok(ChannelResult { infidelity: mean, stderr, method: Method::MonteCarlo, shots: n });
        }
        if n >= MC_MAX_SHOTS {
            return Err(Error::MonteCarlo { mean, stderr, shots: n });
        }
    }
}

/// Shared state of a budget evaluation: Fock cut and noise-free floor.
struct Context<'a> {
    inputs: &'a BudgetInputs,
    fock: usize,
    floor: Option<f64>,
}

impl<'a> Context<'a> {
    fn new(inputs: &'a BudgetInputs) -> Result<Self> {
        inputs.validate()?;
        Ok(Self { inputs, fock: inputs.fock_cut(), floor: None })
    }

    fn floor(&mut self) -> Result<f64> {
        if let Some(f) = self.floor {
            return Ok(f);
        }
        let (gate, noise) = self.inputs.configure(Some((Channel::Heating, 0.0)));
        let f = master_infidelity(&gate, &noise, self.fock, &self.inputs.evolve)?;
        self.floor = Some(f);
        Ok(f)
    }

    fn channel(&mut self, channel: Channel, magnitude: f64, seed: u64) -> Result<ChannelResult> {
        require(magnitude.is_finite(), "magnitude", "must be finite")?;
        if channel != Channel::MisSetDetuning {
            require(magnitude >= 0.0, "magnitude", "must be non-negative")?;
        }
        let deterministic = |x: f64| ChannelResult { infidelity: x, stderr: 0.0, method: Method::Deterministic, shots: 0 };
        match channel {
            Channel::MisSetDetuning => {
                Ok(deterministic(analytic_infidelity(&self.inputs.gate, magnitude, self.inputs.noise.initial_nbar)?))
            }
            Channel::RabiFluctuation => rabi_monte_carlo(self.inputs, magnitude, seed),
            _ => {
                if magnitude == 0.0 {
                    return Ok(deterministic(0.0));
                }
                let floor = self.floor()?;
                let (gate, noise) = self.inputs.configure(Some((channel, magnitude)));
                let x = master_infidelity(&gate, &noise, self.fock, &self.inputs.evolve)?;
                Ok(deterministic(x - floor))
            }
        }
    }

    // All channels together; the Rabi scale is averaged by Gauss-Hermite
    // quadrature over full master-equation runs.
    fn joint(&mut self) -> Result<f64> {
        let floor = self.floor()?;
        let (gate, noise) = self.inputs.configure(None);
        let sigma = noise.rabi_sigma;
        let run = |g: &GateSpec| master_infidelity(g, &NoiseModel { rabi_sigma: 0.0, ..noise }, self.fock, &self.inputs.evolve);
        let total = if sigma == 0.0 {
            run(&gate)?
        } else {
            let gh = GaussHermite::new(JOINT_RABI_NODES);
            let mut acc = 0.0;
            for (z, w) in gh.nodes().iter().zip(gh.weights()) {
                acc += w * run(&gate.scaled(1.0 + sigma * z))?;
            }
            acc
        };
        Ok(total - floor)
    }
}

/// Infidelity with only `channel` active at `magnitude`.
pub fn channel_infidelity(channel: Channel, magnitude: f64, inputs: &BudgetInputs, seed: u64) -> Result<ChannelResult> {
    Context::new(inputs)?.channel(channel, magnitude, seed)
}

/// [`channel_infidelity`] over several magnitudes, sharing the noise-free
/// floor. Every point uses the same seed.
pub fn sweep(channel: Channel, magnitudes: &[f64], inputs: &BudgetInputs, seed: u64) -> Result<Vec<(f64, ChannelResult)>> {
    let mut ctx = Context::new(inputs)?;
    magnitudes.iter().map(|&m| Ok((m, ctx.channel(channel, m, seed)?))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetRow {
    pub channel: Channel,
    pub magnitude: f64,
    pub result: ChannelResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetReport {
    pub rows: Vec<BudgetRow>,
    pub channel_sum: f64,
    pub joint_total: f64,
    /// (joint − sum)/sum; zero when both vanish.
    pub discrepancy: f64,
    /// Noise-free infidelity of the numerical model, subtracted from every
    /// master-equation result.
    pub numerical_floor: f64,
    pub fock: usize,
}

impl BudgetReport {
    /// Aligned text table with the channel labels.
    pub fn to_table(&self) -> String {
        use core::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "{:<28} {:>12} {:>10}", "Error Source", "Simulated", "Stderr");
        for r in &self.rows {
            let _ = writeln!(s, "{:<28} {:>12.3e} {:>10.1e}", r.channel.label(), r.result.infidelity, r.result.stderr);
        }
        let _ = writeln!(s, "{:<28} {:>12.3e}", "Total Error (sum)", self.channel_sum);
        let _ = writeln!(s, "{:<28} {:>12.3e}", "Total Error (joint)", self.joint_total);
        s
    }
}

/// Every channel at its configured magnitude, plus the joint total.
pub fn full_budget(inputs: &BudgetInputs, seed: u64) -> Result<BudgetReport> {
    let mut ctx = Context::new(inputs)?;
    let mut rows = Vec::with_capacity(Channel::ALL.len());
    for c in Channel::ALL {
        let magnitude = inputs.magnitude(c);
        let result = ctx.channel(c, magnitude, seed)?;
        rows.push(BudgetRow { channel: c, magnitude, result });
    }
    let channel_sum: f64 = rows.iter().map(|r| r.result.infidelity).sum();
    let joint_total = ctx.joint()?;
    let discrepancy = if channel_sum == 0.0 && joint_total == 0.0 { 0.0 } else { (joint_total - channel_sum) / channel_sum };
    let numerical_floor = ctx.floor()?;
    Ok(BudgetReport { rows, channel_sum, joint_total, discrepancy, numerical_floor, fock: ctx.fock })
}
