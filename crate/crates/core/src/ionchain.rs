//! Linear ion chains: equilibrium positions, axial normal modes, sideband
//! couplings and the AOD frequency-to-position map.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::consts::{HBAR, VACUUM_PERMITTIVITY};
use crate::error::require;
use crate::focalfield::{profile_gradient, RabiProfile};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec {
    pub n_ions: usize,
    /// Axial COM frequency, rad/s.
    pub com_freq: f64,
    /// Ion mass, kg.
    pub mass: f64,
    /// Ion charge, C.
    pub charge: f64,
}

impl ChainSpec {
    pub fn validate(&self) -> Result<()> {
        require(self.n_ions >= 1, "n_ions", "must be at least 1")?;
        require(self.com_freq > 0.0 && self.com_freq.is_finite(), "com_freq", "must be positive")?;
        require(self.mass > 0.0 && self.mass.is_finite(), "mass", "must be positive")?;
        require(self.charge != 0.0 && self.charge.is_finite(), "charge", "must be nonzero")?;
        Ok(())
    }

    /// ℓ = (q²/(4πε₀·M·ω²))^{1/3}.
    pub fn length_scale(&self) -> f64 {
        (self.charge * self.charge / (4.0 * PI * VACUUM_PERMITTIVITY * self.mass * self.com_freq * self.com_freq)).cbrt()
    }
}

const GRADIENT_TOLERANCE: f64 = 1e-12;

fn energy(u: &[f64]) -> f64 {
    let mut e = 0.0;
    for i in 0..u.len() {
        e += 0.5 * u[i] * u[i];
        for j in i + 1..u.len() {
            e += 1.0 / (u[j] - u[i]).abs();
        }
    }
    e
}

fn gradient(u: &[f64]) -> DVector<f64> {
    let n = u.len();
    DVector::from_fn(n, |i, _| {
        let mut g = u[i];
        for j in 0..n {
            if j != i {
                let d = u[i] - u[j];
                g -= d.signum() / (d * d);
            }
        }
        g
    })
}

/// Dimensionless Hessian of Σu²/2 + Σ 1/|u_i − u_j|.
pub fn dimensionless_hessian(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = 1.0;
        for j in 0..n {
            if j != i {
                let c = 2.0 / (u[i] - u[j]).abs().powi(3);
                h[(i, i)] += c;
                h[(i, j)] = -c;
            }
        }
    }
    h
}

/// Dimensionless equilibrium positions (units of ℓ), ascending.
pub fn dimensionless_equilibrium(n: usize) -> Result<Vec<f64>> {
    require(n >= 1, "n_ions", "must be at least 1")?;
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let spacing = 2.018 / (n as f64).powf(0.559);
    let mut u: Vec<f64> = (0..n).map(|i| (i as f64 - 0.5 * (n - 1) as f64) * spacing).collect();
    let mut g = gradient(&u);
    for _ in 0..200 {
        if g.norm() < GRADIENT_TOLERANCE {
            break;
        }
        let h = dimensionless_hessian(&u);
        let step = h.cholesky().map(|c| c.solve(&(-&g))).unwrap_or_else(|| -&g);
        let e0 = energy(&u);
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let ordered = trial.windows(2).all(|w| w[0] < w[1]);
            if ordered && energy(&trial) <= e0 + 1e-14 * e0.abs() {
                u = trial;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                return Err(Error::NonConvergence("equilibrium line search stalled".into()));
            }
        }
        g = gradient(&u);
    }
    // Enforce the reflection symmetry of the exact solution.
    let sym: Vec<f64> = (0..n).map(|i| 0.5 * (u[i] - u[n - 1 - i])).collect();
    let gn = gradient(&sym).norm();
    if !(gn < GRADIENT_TOLERANCE) {
        return Err(Error::NonConvergence(format!("equilibrium gradient norm {gn:e} after Newton iteration")));
    }
    Ok(sym)
}

/// Equilibrium positions in meters.
pub fn equilibrium_positions(chain: &ChainSpec) -> Result<Vec<f64>> {
    chain.validate()?;
    let l = chain.length_scale();
    Ok(dimensionless_equilibrium(chain.n_ions)?.into_iter().map(|u| u * l).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    /// rad/s, ascending.
    pub frequencies: Vec<f64>,
    /// `vectors[i][m]`: participation of ion i in mode m.
    pub vectors: Vec<Vec<f64>>,
    /// Ground-state size √(ħ/(2Mω_m)) per mode, meters.
    pub zero_point: Vec<f64>,
}

impl ModeSpectrum {
    pub fn n_modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn participation(&self, ion: usize, mode: usize) -> f64 {
        self.vectors[ion][mode]
    }
}

/// Axial normal modes from the Hessian at equilibrium.
pub fn axial_modes(chain: &ChainSpec) -> Result<ModeSpectrum> {
    axial_modes_with_confinement(chain, &vec![0.0; chain.n_ions])
}

/// Axial modes with an additional per-ion harmonic confinement, given as
/// angular frequencies (e.g. optical tweezers). Equilibrium is unchanged for
/// confinement centered on each ion.
pub fn axial_modes_with_confinement(chain: &ChainSpec, extra: &[f64]) -> Result<ModeSpectrum> {
    chain.validate()?;
    require(extra.len() == chain.n_ions, "extra", "needs one entry per ion")?;
    let u = dimensionless_equilibrium(chain.n_ions)?;
    let mut h = dimensionless_hessian(&u);
    for (i, w) in extra.iter().enumerate() {
        h[(i, i)] += (w / chain.com_freq).powi(2);
    }
    let n = chain.n_ions;
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut frequencies = Vec::with_capacity(n);
    let mut vectors = vec![vec![0.0; n]; n];
    for (m, &k) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[k];
        if !(lambda > 0.0) {
            return Err(Error::Instability(format!("mode {m} has non-positive curvature {lambda:e}")));
        }
        frequencies.push(chain.com_freq * lambda.sqrt());
        let col = eig.eigenvectors.column(k);
        let pivot = (0..n).rev().find(|&i| col[i].abs() > 1e-9).unwrap_or(0);
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[i][m] = sign * col[i];
        }
    }
    let zero_point = frequencies.iter().map(|w| (HBAR / (2.0 * chain.mass * w)).sqrt()).collect();
    Ok(ModeSpectrum { frequencies, vectors, zero_point })
}

/// Ω_s(i, m) = Ω'(x0)·x_ω[m]·b[i][m].
pub fn sideband_rate(profile: &RabiProfile, spectrum: &ModeSpectrum, ion: usize, mode: usize, x0_offset: f64) -> Result<f64> {
    require(ion < spectrum.vectors.len(), "ion", "index out of range")?;
    require(mode < spectrum.n_modes(), "mode", "index out of range")?;
    let grad = profile_gradient(profile, x0_offset)?;
    Ok(grad * spectrum.zero_point[mode] * spectrum.vectors[ion][mode])
}

/// Affine AOD map x = slope·(f − center_freq).
#[derive(Debug, Clone, PartialEq)]
pub struct AddressingMap {
    /// Meters per Hz.
    pub slope: f64,
    /// AOD frequency that puts the spot at x = 0, Hz.
    pub center_freq: f64,
    /// (ion index, AOD frequency in Hz).
    pub spot_assignments: Vec<(usize, f64)>,
}

impl AddressingMap {
    pub fn new(slope: f64, center_freq: f64) -> Result<Self> {
        require(slope != 0.0 && slope.is_finite(), "slope", "must be nonzero and finite")?;
        require(center_freq.is_finite(), "center_freq", "must be finite")?;
        Ok(Self { slope, center_freq, spot_assignments: Vec::new() })
    }

    /// Assign each ion the AOD frequency that centers the spot on it.
    pub fn assign(&mut self, positions: &[f64]) {
        self.spot_assignments = positions.iter().enumerate().map(|(i, x)| (i, position_to_aod(self, *x))).collect();
    }
}

pub fn aod_to_position(map: &AddressingMap, freq: f64) -> f64 {
    map.slope * (freq - map.center_freq)
}

pub fn position_to_aod(map: &AddressingMap, position: f64) -> f64 {
    map.center_freq + position / map.slope
}
