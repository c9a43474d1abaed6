//! Simulation and fitting of the calibration measurements: beam-position
//! scans, carrier suppression, sideband balancing, SPAM correction, parity
//! fringes and Ramsey decay.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::consts::HBAR;
use crate::error::{invalid, require};
use crate::fit::{levenberg_marquardt, LmOptions};
use crate::focalfield::{ProfileShape, RabiProfile};
use crate::special::GaussHermite;
use crate::{Error, Result};

const THERMAL_NODES: usize = 32;

/// Thermal motion of the ion along the scan axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalMotion {
    pub nbar: f64,
    /// rad/s.
    pub mode_freq: f64,
    /// kg.
    pub mass: f64,
}

impl ThermalMotion {
    pub fn validate(&self) -> Result<()> {
        require(self.nbar >= 0.0 && self.nbar.is_finite(), "nbar", "must be non-negative")?;
        require(self.mode_freq > 0.0 && self.mode_freq.is_finite(), "mode_freq", "must be positive")?;
        require(self.mass > 0.0 && self.mass.is_finite(), "mass", "must be positive")?;
        Ok(())
    }

    /// Ground-state extent x_ω = √(ħ/2mω).
    pub fn zero_point(&self) -> f64 {
        (HBAR / (2.0 * self.mass * self.mode_freq)).sqrt()
    }

    /// Thermal position spread x_ω·√(2n̄+1).
    pub fn spread(&self) -> f64 {
        self.zero_point() * (2.0 * self.nbar + 1.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    /// Beam position relative to the ion (meters).
    pub position: f64,
    pub p1: f64,
    pub shots: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanDataset {
    pub points: Vec<ScanPoint>,
    /// Seconds.
    pub pulse_time: f64,
}

impl ScanDataset {
    pub fn validate(&self) -> Result<()> {
        require(self.pulse_time > 0.0 && self.pulse_time.is_finite(), "pulse_time", "must be positive")?;
        for p in &self.points {
            require((0.0..=1.0).contains(&p.p1), "p1", "must lie in [0, 1]")?;
            require(p.shots >= 1, "shots", "must be at least 1")?;
            require(p.position.is_finite(), "position", "must be finite")?;
        }
        Ok(())
    }
}

/// ⟨sin²(Ω(x+ξ)τ/2)⟩ over ξ ~ N(0, spread).
fn thermal_excitation<F: FnMut(f64) -> f64>(gh: &GaussHermite, x: f64, spread: f64, tau: f64, mut omega: F) -> f64 {
    gh.expect(x, spread, |y| {
        let s = (0.5 * omega(y) * tau).sin();
        s * s
    })
}

/// Excitation probability after a pulse of length `pulse_time` with the beam
/// at `position`, averaged over the thermal position distribution.
pub fn scan_excitation(profile: &RabiProfile, motion: &ThermalMotion, pulse_time: f64, position: f64) -> Result<f64> {
    motion.validate()?;
    let gh = GaussHermite::new(THERMAL_NODES);
    let mut err = None;
    let p = thermal_excitation(&gh, position, motion.spread(), pulse_time, |y| match profile.value(y) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(p),
    }
}

/// Beam scan with binomial shot noise. `shots = 0` returns the exact
/// probabilities with the shot count recorded as 1.
pub fn simulate_beam_scan(
    profile: &RabiProfile,
    motion: &ThermalMotion,
    pulse_time: f64,
    positions: &[f64],
    shots: u32,
    seed: u64,
) -> Result<ScanDataset> {
    require(pulse_time > 0.0 && pulse_time.is_finite(), "pulse_time", "must be positive")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(positions.len());
    for &x in positions {
        let p = scan_excitation(profile, motion, pulse_time, x)?.clamp(0.0, 1.0);
        let point = if shots == 0 {
            ScanPoint { position: x, p1: p, shots: 1 }
        } else {
            let k = Binomial::new(shots as u64, p).map_err(|_| invalid("p1", "not a probability"))?.sample(&mut rng);
            ScanPoint { position: x, p1: k as f64 / shots as f64, shots }
        };
        points.push(point);
    }
    Ok(ScanDataset { points, pulse_time })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierSuppression {
    /// Peak Rabi rate Ω_m (rad/s).
    pub peak_rabi: f64,
    /// √⟨Ω²⟩ at the beam center over the thermal distribution (rad/s).
    pub effective_rate: f64,
    /// Ω_m / effective_rate.
    pub ratio: f64,
    /// Central P1 after `pulse_time`.
    pub central_p1: f64,
}

/// Carrier suppression at the beam center. The effective rate is the
/// short-time growth rate of P1 ≈ ⟨Ω²⟩τ²/4.
pub fn carrier_suppression(shape: &ProfileShape, motion: &ThermalMotion, pulse_time: f64) -> Result<CarrierSuppression> {
    motion.validate()?;
    require(pulse_time > 0.0 && pulse_time.is_finite(), "pulse_time", "must be positive")?;
    let gh = GaussHermite::new(THERMAL_NODES);
    let spread = motion.spread();
    let mean_sq = gh.expect(shape.x_center, spread, |y| shape.value(y).powi(2));
    let effective_rate = mean_sq.sqrt();
    let peak_rabi = shape.peak_rabi();
    let central_p1 = thermal_excitation(&gh, shape.x_center, spread, pulse_time, |y| shape.value(y));
    let ratio = if effective_rate > 0.0 { peak_rabi / effective_rate } else { f64::INFINITY };
    Ok(CarrierSuppression { peak_rabi, effective_rate, ratio, central_p1 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanFit {
    pub shape: ProfileShape,
    pub x_center: f64,
    pub x_center_sigma: f64,
    pub peak_rabi: f64,
    pub peak_rabi_sigma: f64,
    pub w0: f64,
    pub w0_sigma: f64,
    /// Covariance of (x_center, Ω_m, w0) from the binomial weights.
    pub covariance: [[f64; 3]; 3],
    pub chi2: f64,
    pub dof: usize,
}

fn binomial_sigma(p: f64, shots: u32) -> f64 {
    // Laplace-smoothed so that P1 = 0 or 1 keeps a finite weight.
    let n = shots as f64;
    let q = (p * n + 0.5) / (n + 1.0);
    (q * (1.0 - q) / n).sqrt()
}

/// Weighted fit of the thermally broadened scan model. The thermal spread
/// is taken from `motion`, not fitted.
pub fn fit_scan_position(data: &ScanDataset, motion: &ThermalMotion) -> Result<ScanFit> {
    data.validate()?;
    motion.validate()?;
    let pts = &data.points;
    if pts.len() < 7 {
        return Err(Error::FitFailure(format!("need at least 7 scan points, got {}", pts.len())));
    }
    let tau = data.pulse_time;
    let gh = GaussHermite::new(THERMAL_NODES);
    let spread = motion.spread();
    let sigmas: Vec<f64> = pts.iter().map(|p| binomial_sigma(p.p1, p.shots)).collect();
    let guess = guess_scan(pts, tau, spread, &gh)?;
    let scales = [guess.w0, guess.peak_rabi(), guess.w0];
    let fit = levenberg_marquardt(
        |p, r| {
            let shape = ProfileShape::from_peak(p[1], p[2], p[0]);
            for ((ri, pt), s) in r.iter_mut().zip(pts).zip(&sigmas) {
                *ri = (pt.p1 - thermal_excitation(&gh, pt.position, spread, tau, |y| shape.value(y))) / s;
            }
            Ok(())
        },
        pts.len(),
        &[guess.x_center, guess.peak_rabi(), guess.w0],
        &scales,
        &LmOptions::default(),
    )?;
    let mut covariance = [[0.0; 3]; 3];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = fit.covariance[(i, j)];
        }
    }
    let (xc, peak, w0) = (fit.params[0], fit.params[1].abs(), fit.params[2].abs());
    Ok(ScanFit {
        shape: ProfileShape::from_peak(peak, w0, xc),
        x_center: xc,
        x_center_sigma: fit.sigma(0),
        peak_rabi: peak,
        peak_rabi_sigma: fit.sigma(1),
        w0,
        w0_sigma: fit.sigma(2),
        covariance,
        chi2: fit.chi2,
        dof: fit.dof,
    })
}

fn guess_scan(pts: &[ScanPoint], tau: f64, spread: f64, gh: &GaussHermite) -> Result<ProfileShape> {
    let pmax = pts.iter().map(|p| p.p1).fold(f64::NEG_INFINITY, f64::max);
    let pmin = pts.iter().map(|p| p.p1).fold(f64::INFINITY, f64::min);
    if !(pmax - pmin > 1e-3) {
        return Err(Error::FitFailure("scan data are flat; position is not identifiable".into()));
    }
    let xlo = pts.iter().map(|p| p.position).fold(f64::INFINITY, f64::min);
    let xhi = pts.iter().map(|p| p.position).fold(f64::NEG_INFINITY, f64::max);
    let span = xhi - xlo;
    let wsum: f64 = pts.iter().map(|p| p.p1).sum();
    let xc = pts.iter().map(|p| p.position * p.p1).sum::<f64>() / wsum;
    let half = 0.5 * pmax;
    if !(pts.iter().any(|p| p.position < xc && p.p1 > half) && pts.iter().any(|p| p.position > xc && p.p1 > half)) {
        return Err(Error::FitFailure("scan covers a single lobe".into()));
    }
    let mut best = (f64::INFINITY, ProfileShape::from_peak(1.0, span / 4.0, xc));
    for iw in 0..40 {
        let w0 = span / 40.0 * 40.0.powf(iw as f64 / 39.0);
        for ia in 1..=40 {
            let area = 3.0 * ia as f64 / 40.0;
            let shape = ProfileShape::from_peak(2.0 * area / tau, w0, xc);
            let chi2: f64 = pts
                .iter()
                .map(|p| (p.p1 - thermal_excitation(gh, p.position, spread, tau, |y| shape.value(y))).powi(2))
                .sum();
            if chi2 < best.0 {
                best = (chi2, shape);
            }
        }
    }
    Ok(best.1)
}

/// Per-qubit readout confusion matrices `C[measured][true]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpamMatrix {
    qubits: Vec<[[f64; 2]; 2]>,
}

impl SpamMatrix {
    pub fn new(qubits: Vec<[[f64; 2]; 2]>) -> Result<Self> {
        require(!qubits.is_empty(), "qubits", "need at least one qubit")?;
        for c in &qubits {
            for col in 0..2 {
                require(c[0][col] >= 0.0 && c[1][col] >= 0.0 && c[0][col] <= 1.0 && c[1][col] <= 1.0, "spam", "entries must lie in [0, 1]")?;
                require((c[0][col] + c[1][col] - 1.0).abs() < 1e-12, "spam", "columns must sum to 1")?;
            }
        }
        Ok(Self { qubits })
    }

    /// Symmetric readout with the given per-qubit fidelities.
    pub fn from_fidelities(fidelities: &[f64]) -> Result<Self> {
        Self::new(fidelities.iter().map(|f| [[*f, 1.0 - f], [1.0 - f, *f]]).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    /// Full tensor-product matrix, qubit 0 as the most significant bit.
    pub fn full(&self) -> DMatrix<f64> {
        let mut m = DMatrix::from_element(1, 1, 1.0);
        for c in &self.qubits {
            m = m.kronecker(&DMatrix::from_row_slice(2, 2, &[c[0][0], c[0][1], c[1][0], c[1][1]]));
        }
        m
    }
}

/// Raw populations a detector with confusion `spam` reports for `truth`.
pub fn spam_apply(truth: &[f64], spam: &SpamMatrix) -> Result<Vec<f64>> {
    let c = spam.full();
    require(truth.len() == c.nrows(), "populations", "length must be 2^n_qubits")?;
    Ok((c * DVector::from_column_slice(truth)).iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpamCorrection {
    /// C⁻¹·raw.
    pub inverted: Vec<f64>,
    /// Euclidean projection of `inverted` onto the probability simplex.
    pub clipped: Vec<f64>,
}

pub fn spam_correct(raw: &[f64], spam: &SpamMatrix) -> Result<SpamCorrection> {
    let c = spam.full();
    require(raw.len() == c.nrows(), "populations", "length must be 2^n_qubits")?;
    for q in &spam.qubits {
        let det = q[0][0] * q[1][1] - q[0][1] * q[1][0];
        if det.abs() < 1e-12 {
            return Err(Error::Singular("SPAM confusion matrix"));
        }
    }
    let lu = c.lu();
    let inverted: Vec<f64> = lu.solve(&DVector::from_column_slice(raw)).ok_or(Error::Singular("SPAM confusion matrix"))?.iter().copied().collect();
    let clipped = project_simplex(&inverted);
    Ok(SpamCorrection { inverted, clipped })
}

fn project_simplex(v: &[f64]) -> Vec<f64> {
    if v.iter().all(|x| *x >= 0.0) && (v.iter().sum::<f64>() - 1.0).abs() < 1e-12 {
        return v.to_vec();
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityFit {
    /// |A|.
    pub contrast: f64,
    pub contrast_sigma: f64,
    /// φ0 in A·sin(2φ + φ0), radians.
    pub phase_offset: f64,
    pub phase_sigma: f64,
    /// Constant term C.
    pub offset: f64,
    pub chi2: f64,
}

/// Weighted fit of `C + A·sin(2φ + φ0)`. The model is linear in
/// (C, A cos φ0, A sin φ0).
pub fn fit_parity(phases: &[f64], parity: &[f64], errors: &[f64]) -> Result<ParityFit> {
    let n = phases.len();
    require(parity.len() == n && errors.len() == n, "parity", "phases, values and errors must have equal length")?;
    if n < 5 {
        return Err(Error::FitFailure(format!("need at least 5 phase points, got {n}")));
    }
    let lo = phases.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = phases.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < PI * (1.0 - 2.0 / n as f64) {
        return Err(Error::FitFailure("phases do not span a parity period".into()));
    }
    require(errors.iter().all(|e| *e > 0.0 && e.is_finite()), "errors", "must be positive")?;
    let mut a = DMatrix::zeros(n, 3);
    let mut b = DVector::zeros(n);
    for i in 0..n {
        let w = 1.0 / errors[i];
        a[(i, 0)] = w;
        a[(i, 1)] = w * (2.0 * phases[i]).sin();
        a[(i, 2)] = w * (2.0 * phases[i]).cos();
        b[i] = w * parity[i];
    }
    let ata = a.transpose() * &a;
    let cov = ata.try_inverse().ok_or_else(|| Error::FitFailure("parity design matrix is singular".into()))?;
    let sol = &cov * (a.transpose() * &b);
    let resid = &a * &sol - &b;
    let (c, s1, c1) = (sol[0], sol[1], sol[2]);
    let contrast = s1.hypot(c1);
    let phase_offset = c1.atan2(s1);
    // Gradient propagation; at A = 0 fall back to the mean component σ.
    let (sc, ss) = (cov[(1, 1)], cov[(2, 2)]);
    let contrast_sigma = if contrast > 0.0 {
        let (gs, gc) = (s1 / contrast, c1 / contrast);
        (gs * gs * sc + gc * gc * ss + 2.0 * gs * gc * cov[(1, 2)]).max(0.0).sqrt()
    } else {
        (0.5 * (sc + ss)).sqrt()
    };
    let phase_sigma = if contrast > 0.0 {
        let r2 = contrast * contrast;
        let (gs, gc) = (-c1 / r2, s1 / r2);
        (gs * gs * sc + gc * gc * ss + 2.0 * gs * gc * cov[(1, 2)]).max(0.0).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(ParityFit { contrast, contrast_sigma, phase_offset, phase_sigma, offset: c, chi2: resid.norm_squared() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayEnvelope {
    /// exp(−(t/T2)²).
    Gaussian,
    /// exp(−t/T2).
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamseyOptions {
    pub envelope: DecayEnvelope,
    /// Fringe frequency guess (rad/s); found from a periodogram if absent.
    pub frequency_guess: Option<f64>,
}

impl Default for RamseyOptions {
    fn default() -> Self {
        Self { envelope: DecayEnvelope::Gaussian, frequency_guess: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamseyFit {
    /// Seconds; a lower bound when `lower_bound` is set.
    pub t2: f64,
    pub t2_sigma: f64,
    /// No decay resolved: κ is within 2σ of zero.
    pub lower_bound: bool,
    pub amplitude: f64,
    /// rad/s.
    pub frequency: f64,
    pub phase: f64,
    /// Decay rate parameter: 1/T2² (Gaussian) or 1/T2 (exponential).
    pub kappa: f64,
    pub kappa_sigma: f64,
}

fn envelope(kind: DecayEnvelope, kappa: f64, t: f64) -> f64 {
    match kind {
        DecayEnvelope::Gaussian => (-kappa * t * t).exp(),
        DecayEnvelope::Exponential => (-kappa * t).exp(),
    }
}

/// Fit `P(t) = 1/2 + (A/2)·env(t)·cos(ωt + φ)` to Ramsey fringes. `errors`
/// may be empty, in which case the covariance is scaled by the reduced χ².
pub fn fit_ramsey_t2(wait_times: &[f64], data: &[f64], errors: &[f64], opts: &RamseyOptions) -> Result<RamseyFit> {
    let n = wait_times.len();
    require(data.len() == n, "data", "must match wait_times in length")?;
    require(errors.is_empty() || errors.len() == n, "errors", "must be empty or match wait_times")?;
    require(errors.iter().all(|e| *e > 0.0), "errors", "must be positive")?;
    if n < 5 {
        return Err(Error::FitFailure(format!("need at least 5 wait times, got {n}")));
    }
    let tmax = wait_times.iter().cloned().fold(0.0, f64::max);
    require(tmax > 0.0, "wait_times", "must include a positive time")?;
    let omega0 = match opts.frequency_guess {
        Some(w) => w,
        None => periodogram_peak(wait_times, data)?,
    };
    // Amplitude and phase guesses from the linear fit at ω0 and κ = 0.
    let (a0, phi0) = linear_fringe(wait_times, data, omega0).unwrap_or((1.0, 0.0));
    let kappa_scale = match opts.envelope {
        DecayEnvelope::Gaussian => 1.0 / (tmax * tmax),
        DecayEnvelope::Exponential => 1.0 / tmax,
    };
    let weights: Vec<f64> = if errors.is_empty() { vec![1.0; n] } else { errors.iter().map(|e| 1.0 / e).collect() };
    let kind = opts.envelope;
    let mut best: Option<crate::fit::LmFit> = None;
    // A few decay-rate starting points guard against the flat direction at κ ≫ 1/t².
    for k0 in [0.1, 1.0, 3.0] {
        let fit = levenberg_marquardt(
            |p, r| {
                for i in 0..n {
                    let t = wait_times[i];
                    let model = 0.5 + 0.5 * p[0] * envelope(kind, p[3], t) * (p[1] * t + p[2]).cos();
                    r[i] = (data[i] - model) * weights[i];
                }
                Ok(())
            },
            n,
            &[a0.max(1e-3), omega0, phi0, k0 * kappa_scale],
            &[1.0, omega0.abs().max(1.0 / tmax), 1.0, kappa_scale],
            &LmOptions::default(),
        );
        if let Ok(f) = fit {
            if best.as_ref().map_or(true, |b| f.chi2 < b.chi2) {
                best = Some(f);
            }
        }
    }
    let fit = best.ok_or_else(|| Error::NonConvergence("Ramsey fit failed from every starting point".into()))?;
    let cov = if errors.is_empty() { fit.scaled_covariance() } else { fit.covariance.clone() };
    let (mut amplitude, frequency, mut phase, kappa) = (fit.params[0], fit.params[1], fit.params[2], fit.params[3]);
    if amplitude < 0.0 {
        amplitude = -amplitude;
        phase += PI;
    }
    phase = num_traits::Euclid::rem_euclid(&phase, &(2.0 * PI));
    let kappa_sigma = cov[(3, 3)].max(0.0).sqrt();
    let lower_bound = kappa <= 2.0 * kappa_sigma;
    let (t2, t2_sigma) = if lower_bound {
        let k = kappa.max(0.0) + 2.0 * kappa_sigma;
        let t = match kind {
            DecayEnvelope::Gaussian => 1.0 / k.sqrt(),
            DecayEnvelope::Exponential => 1.0 / k,
        };
        (if k > 0.0 { t } else { f64::INFINITY }, f64::NAN)
    } else {
        match kind {
            DecayEnvelope::Gaussian => (1.0 / kappa.sqrt(), 0.5 * kappa.powf(-1.5) * kappa_sigma),
            DecayEnvelope::Exponential => (1.0 / kappa, kappa_sigma / (kappa * kappa)),
        }
    };
    Ok(RamseyFit { t2, t2_sigma, lower_bound, amplitude, frequency, phase, kappa, kappa_sigma })
}

// Least-squares a·cos(ωt) + b·sin(ωt) on P − 1/2; returns (A, φ) with
// A/2·cos(ωt + φ).
fn linear_fringe(t: &[f64], p: &[f64], omega: f64) -> Option<(f64, f64)> {
    let n = t.len();
    let mut a = DMatrix::zeros(n, 2);
    let mut b = DVector::zeros(n);
    for i in 0..n {
        a[(i, 0)] = (omega * t[i]).cos();
        a[(i, 1)] = (omega * t[i]).sin();
        b[i] = p[i] - 0.5;
    }
    let sol = (a.transpose() * &a).try_inverse()? * (a.transpose() * b);
    Some((2.0 * sol[0].hypot(sol[1]), (-sol[1]).atan2(sol[0])))
}

fn periodogram_peak(t: &[f64], p: &[f64]) -> Result<f64> {
    let n = t.len();
    let mut sorted = t.to_vec();
    sorted.sort_by(f64::total_cmp);
    let span = sorted[n - 1] - sorted[0];
    let min_dt = sorted.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
    if !(span > 0.0 && min_dt.is_finite()) {
        return Err(Error::FitFailure("wait times must span a nonzero interval".into()));
    }
    let w_max = PI / min_dt;
    let dw = PI / (4.0 * span);
    let steps = ((w_max / dw).ceil() as usize).clamp(16, 200_000);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 1..=steps {
        let w = w_max * k as f64 / steps as f64;
        let (mut c, mut s) = (0.0, 0.0);
        for i in 0..n {
            c += (p[i] - 0.5) * (w * t[i]).cos();
            s += (p[i] - 0.5) * (w * t[i]).sin();
        }
        let power = c * c + s * s;
        if power > best.0 {
            best = (power, w);
        }
    }
    Ok(best.1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandBalance {
    /// Multiplicative amplitude corrections (red, blue).
    pub corrections: [f64; 2],
    /// Corrected amplitudes (red, blue).
    pub amplitudes: [f64; 2],
}

/// Corrections that equalize the measured red and blue sideband rates,
/// keeping the weaker tone unchanged. Rates scale linearly with amplitude.
pub fn balance_sidebands(rsb_amp: f64, bsb_amp: f64, rates: [f64; 2]) -> Result<SidebandBalance> {
    require(rates.iter().all(|r| *r > 0.0 && r.is_finite()), "rates", "measured rates must be positive")?;
    require(rsb_amp.is_finite() && bsb_amp.is_finite(), "amplitude", "must be finite")?;
    let floor = rates[0].min(rates[1]);
    let corrections = rates.map(|r| floor / r);
    Ok(SidebandBalance { corrections, amplitudes: [rsb_amp * corrections[0], bsb_amp * corrections[1]] })
}
