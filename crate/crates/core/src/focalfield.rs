//! Vectorial focal field of a linearly polarized Gaussian beam, the
//! polarization-gradient Rabi profile it produces, and fits of that profile.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{E, PI};
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::consts::{SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::error::{invalid, require};
use crate::fit::{levenberg_marquardt, LmOptions};
use crate::special::{bessel_j_table, integrate_adaptive};
use crate::{Error, Result, C64};

/// Relative tolerance of the focal-field quadrature.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;
/// Hard cap on quadrature nodes per integral.
pub const QUADRATURE_MAX_NODES: usize = 20 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    LinearX,
}

/// How a waist value is to be read. For a Gaussian field `exp(-x²/w²)` the
/// field 1/e radius and the intensity 1/e² radius are the same number; the
/// intensity 1/e radius is smaller by √2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaistConvention {
    FieldOneOverE,
    IntensityOneOverE2,
}

impl WaistConvention {
    pub fn to_field_radius(self, w: f64) -> f64 {
        match self {
            Self::FieldOneOverE | Self::IntensityOneOverE2 => w,
        }
    }
}

/// Intensity 1/e radius of a Gaussian with field 1/e radius `w_field`.
pub fn intensity_one_over_e_radius(w_field: f64) -> f64 {
    w_field / 2f64.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusParams {
    pub numerical_aperture: f64,
    /// Meters.
    pub wavelength: f64,
    /// Watts.
    pub power: f64,
    pub polarization: Polarization,
    pub waist_convention: WaistConvention,
    /// Optional paraxial waist override in meters, read with `waist_convention`.
    pub waist: Option<f64>,
}

impl FocusParams {
    pub fn new(numerical_aperture: f64, wavelength: f64, power: f64) -> Result<Self> {
        let f = Self {
            numerical_aperture,
            wavelength,
            power,
            polarization: Polarization::LinearX,
            waist_convention: WaistConvention::FieldOneOverE,
            waist: None,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn with_waist(mut self, waist: f64, convention: WaistConvention) -> Result<Self> {
        self.waist = Some(waist);
        self.waist_convention = convention;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let na = self.numerical_aperture;
        require(na > 0.0 && na < 1.0, "numerical_aperture", "must lie in (0, 1)")?;
        require(self.wavelength > 0.0 && self.wavelength.is_finite(), "wavelength", "must be positive")?;
        require(self.power >= 0.0 && self.power.is_finite(), "power", "must be non-negative")?;
        if let Some(w) = self.waist {
            require(w > 0.0 && w.is_finite(), "waist", "must be positive")?;
        }
        Ok(())
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn max_angle(&self) -> f64 {
        self.numerical_aperture.asin()
    }

    /// Ellipticity coefficient of the paraxial form, (π/4)·NA.
    pub fn beta(&self) -> f64 {
        PI / 4.0 * self.numerical_aperture
    }

    /// The paraxial approximation is only claimed below NA 0.5.
    pub fn paraxial_valid(&self) -> bool {
        self.numerical_aperture < 0.5
    }

    /// Field 1/e radius used by the paraxial form. Without an override it is
    /// taken from the second moment of the apodized pupil, which is exact for
    /// an untruncated Gaussian pupil.
    pub fn paraxial_waist(&self) -> Result<f64> {
        if let Some(w) = self.waist {
            return Ok(self.waist_convention.to_field_radius(w));
        }
        let na = self.numerical_aperture;
        let moments = integrate_adaptive(
            |theta: f64| {
                let w = apodization(theta, na) * theta.sin() * (1.0 + theta.cos());
                let s = theta.sin();
                [w, w * s * s]
            },
            0.0,
            self.max_angle(),
            QUADRATURE_TOLERANCE,
            QUADRATURE_MAX_NODES,
        )?;
        let mean_s2 = moments.value[1] / moments.value[0];
        Ok(2.0 / (self.wavenumber() * mean_s2.sqrt()))
    }
}

fn apodization(theta: f64, na: f64) -> f64 {
    let s = theta.sin() / na;
    (-s * s).exp() * theta.cos().sqrt()
}

/// Field components on the focal-plane x axis, in V/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub x: f64,
    pub ex: C64,
    pub ez: C64,
}

impl FieldSample {
    /// Cycle-averaged intensity in W/m².
    pub fn intensity(&self) -> f64 {
        0.5 * SPEED_OF_LIGHT * VACUUM_PERMITTIVITY * (self.ex.norm_sqr() + self.ez.norm_sqr())
    }

    /// Unscaled Rabi rate from the circular decomposition, Ω₊² − Ω₋² = 4AB
    /// with A the x amplitude and B the in-quadrature z amplitude.
    pub fn rabi_product(&self) -> f64 {
        -4.0 * (self.ex * self.ez.conj()).im
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSource {
    RichardsWolf,
    Paraxial,
}

/// A focus with its power normalization resolved.
#[derive(Debug, Clone, Copy)]
pub struct FocalField {
    focus: FocusParams,
    source: FieldSource,
    amplitude: f64,
    waist: f64,
}

impl FocalField {
    pub fn new(focus: &FocusParams, source: FieldSource) -> Result<Self> {
        focus.validate()?;
        let waist = focus.paraxial_waist()?;
        let eta = 0.5 * SPEED_OF_LIGHT * VACUUM_PERMITTIVITY;
        let amplitude = match source {
            FieldSource::RichardsWolf => {
                let k = focus.wavenumber();
                let na = focus.numerical_aperture;
                // Hankel-Parseval: ∫|f|²ρdρ = (1/k²)∫|G(s)|² s ds with s = sinθ.
                let pupil = integrate_adaptive(
                    |theta: f64| {
                        let (s, c) = theta.sin_cos();
                        let a = apodization(theta, na);
                        let gx = a * (1.0 + c) / c;
                        let gz = a * s / c;
                        let jac = s * c;
                        [gx * gx * jac, gz * gz * jac]
                    },
                    0.0,
                    focus.max_angle(),
                    QUADRATURE_TOLERANCE,
                    QUADRATURE_MAX_NODES,
                )?;
                let unit_power = eta / (k * k) * (2.0 * PI * pupil.value[0] + 4.0 * PI * pupil.value[1]);
                (focus.power / unit_power).sqrt()
            }
            FieldSource::Paraxial => {
                let beta = focus.beta();
                let unit_power = eta * PI * waist * waist / 2.0 * (1.0 + beta * beta / 4.0);
                (focus.power / unit_power).sqrt()
            }
        };
        Ok(Self { focus: *focus, source, amplitude, waist })
    }

    pub fn focus(&self) -> &FocusParams {
        &self.focus
    }

    pub fn source(&self) -> FieldSource {
        self.source
    }

    /// Field 1/e radius of the paraxial form.
    pub fn paraxial_waist(&self) -> f64 {
        self.waist
    }

    pub fn sample(&self, x: f64) -> Result<FieldSample> {
        if !x.is_finite() {
            return Err(invalid("x", "must be finite"));
        }
        match self.source {
            FieldSource::RichardsWolf => {
                let (ix, iz) = richards_wolf_integrals(&self.focus, x)?;
                Ok(FieldSample { x, ex: C64::new(self.amplitude * ix, 0.0), ez: C64::new(0.0, 2.0 * self.amplitude * iz) })
            }
            FieldSource::Paraxial => {
                let u = x / self.waist;
                let env = self.amplitude * (-u * u).exp();
                Ok(FieldSample { x, ex: C64::new(env, 0.0), ez: C64::new(0.0, self.focus.beta() * u * env) })
            }
        }
    }

    /// Intensity 1/e radius along x, located by bisection.
    pub fn intensity_radius(&self) -> Result<f64> {
        let peak = self.sample(0.0)?.intensity();
        if !(peak > 0.0) {
            return Err(invalid("power", "zero intensity has no radius"));
        }
        let target = peak / E;
        let mut lo = 0.0;
        let mut hi = self.waist;
        while self.sample(hi)?.intensity() > target {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.sample(mid)?.intensity() > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-13 * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// The two focal-plane integrals, without normalization.
fn richards_wolf_integrals(focus: &FocusParams, x: f64) -> Result<(f64, f64)> {
    let k = focus.wavenumber();
    let na = focus.numerical_aperture;
    let r = integrate_adaptive(
        |theta: f64| {
            let (s, c) = theta.sin_cos();
            let a = apodization(theta, na);
            let j = bessel_j_table(k * x * s, 1);
            [a * s * (1.0 + c) * j[0], a * s * s * j[1]]
        },
        0.0,
        focus.max_angle(),
        QUADRATURE_TOLERANCE,
        QUADRATURE_MAX_NODES,
    )?;
    Ok((r.value[0], r.value[1]))
}

/// Richards-Wolf focal-plane field at transverse offset `x`, normalized to
/// the focus power.
pub fn richards_wolf_field(focus: &FocusParams, x: f64) -> Result<FieldSample> {
    FocalField::new(focus, FieldSource::RichardsWolf)?.sample(x)
}

/// Closed-form paraxial field `E0·exp(-x²/w0²)·(x̂ + iβ(x/w0)ẑ)` with
/// β = (π/4)·NA. Check [`FocusParams::paraxial_valid`] above NA 0.5.
pub fn paraxial_field(focus: &FocusParams, x: f64) -> Result<FieldSample> {
    FocalField::new(focus, FieldSource::Paraxial)?.sample(x)
}

/// How the unscaled 4AB product is turned into rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RabiScale {
    /// Pin the peak of |Ω| to this value (rad/s).
    PeakRabi(f64),
    /// Multiply 4AB (in (V/m)²) by this coupling (rad/s per (V/m)²).
    FieldCoupling(f64),
}

/// Gradient profile `Ω_w·u·exp(-2u²)` with `u = (x - x_center)/w0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileShape {
    /// rad/s.
    pub omega_w: f64,
    /// Meters.
    pub w0: f64,
    /// Meters.
    pub x_center: f64,
}

impl ProfileShape {
    /// Shape whose peak |Ω| is `peak_rabi`.
    pub fn from_peak(peak_rabi: f64, w0: f64, x_center: f64) -> Self {
        Self { omega_w: 2.0 * E.sqrt() * peak_rabi, w0, x_center }
    }

    /// Ω_m = Ω_w/(2√e), reached at x_center ± w0/2.
    pub fn peak_rabi(&self) -> f64 {
        self.omega_w.abs() / (2.0 * E.sqrt())
    }

    fn u(&self, x: f64) -> (f64, f64) {
        let u = (x - self.x_center) / self.w0;
        (u, (-2.0 * u * u).exp())
    }

    pub fn value(&self, x: f64) -> f64 {
        let (u, e) = self.u(x);
        self.omega_w * u * e
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let (u, e) = self.u(x);
        self.omega_w / self.w0 * (1.0 - 4.0 * u * u) * e
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        let (u, e) = self.u(x);
        self.omega_w / (self.w0 * self.w0) * (16.0 * u * u * u - 12.0 * u) * e
    }

    pub fn third_derivative(&self, x: f64) -> f64 {
        let (u, e) = self.u(x);
        let u2 = u * u;
        self.omega_w / (self.w0 * self.w0 * self.w0) * (-64.0 * u2 * u2 + 96.0 * u2 - 12.0) * e
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RabiProfile {
    /// (x in meters, Ω in rad/s), sorted by x.
    pub samples: Vec<(f64, f64)>,
    pub fitted: Option<ProfileShape>,
}

impl RabiProfile {
    pub fn from_shape(shape: ProfileShape) -> Self {
        Self { samples: Vec::new(), fitted: Some(shape) }
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        match &self.fitted {
            Some(s) => Ok(s.value(x)),
            None => interpolate(&self.samples, x, 0),
        }
    }
}

/// Sample Ω(x) on `grid` (meters, ascending) from the chosen field model.
pub fn rabi_profile(focus: &FocusParams, grid: &[f64], source: FieldSource, scale: RabiScale) -> Result<RabiProfile> {
    if grid.is_empty() {
        return Err(invalid("grid", "must not be empty"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) || grid.iter().any(|x| !x.is_finite()) {
        return Err(invalid("grid", "must be finite and strictly ascending"));
    }
    let field = FocalField::new(focus, source)?;
    let factor = match scale {
        RabiScale::FieldCoupling(c) => c,
        RabiScale::PeakRabi(peak) => {
            require(peak.is_finite() && peak >= 0.0, "peak_rabi", "must be non-negative")?;
            let raw_peak = peak_rabi_product(&field)?;
            if !(raw_peak > 0.0) {
                return Err(invalid("power", "zero field cannot be pinned to a peak Rabi rate"));
            }
            peak / raw_peak
        }
    };
    let mut samples = Vec::with_capacity(grid.len());
    for &x in grid {
        samples.push((x, factor * field.sample(x)?.rabi_product()));
    }
    let fitted = match (source, scale) {
        (FieldSource::Paraxial, _) => {
            // 4AB of the paraxial field is exactly the gradient profile shape.
            let e0 = field.amplitude;
            let omega_w = factor * 4.0 * e0 * e0 * focus.beta();
            Some(ProfileShape { omega_w, w0: field.waist, x_center: 0.0 })
        }
        _ => None,
    };
    Ok(RabiProfile { samples, fitted })
}

/// Maximum of 4AB on the positive-x lobe, by golden-section search.
fn peak_rabi_product(field: &FocalField) -> Result<f64> {
    let f = |x: f64| -> Result<f64> { Ok(field.sample(x)?.rabi_product()) };
    let w = field.waist;
    let (mut a, mut b) = (0.05 * w, 1.5 * w);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a) > 1e-9 * w {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(fc.max(fd))
}

/// Input to [`fit_profile`].
#[derive(Debug, Clone, Copy)]
pub enum ProfileData<'a> {
    /// (x, Ω) pairs.
    Rabi(&'a [(f64, f64)]),
    /// (x, P1) pairs with P1 = sin²(Ω(x)τ/2) for a known pulse time τ.
    Excitation { samples: &'a [(f64, f64)], pulse_time: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileFit {
    pub shape: ProfileShape,
    /// Covariance of (Ω_w, w0, x_center), scaled by the reduced χ².
    pub covariance: [[f64; 3]; 3],
    pub residual_rms: f64,
    /// RMS residual over the peak |data| value.
    pub normalized_residual: f64,
}

impl ProfileFit {
    pub fn sigma(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.covariance[i][i].max(0.0).sqrt())
    }
}

/// Least-squares fit of the gradient profile shape to Rabi samples or excitation data.
pub fn fit_profile(data: ProfileData<'_>) -> Result<ProfileFit> {
    let (samples, tau) = match data {
        ProfileData::Rabi(s) => (s, None),
        ProfileData::Excitation { samples, pulse_time } => {
            require(pulse_time > 0.0 && pulse_time.is_finite(), "pulse_time", "must be positive")?;
            (samples, Some(pulse_time))
        }
    };
    if samples.len() < 5 {
        return Err(Error::FitFailure(format!("need at least 5 samples, got {}", samples.len())));
    }
    if samples.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::FitFailure("non-finite sample".into()));
    }
    let guess = match tau {
        None => guess_from_rabi(samples)?,
        Some(t) => guess_from_excitation(samples, t)?,
    };
    let model = move |shape: &ProfileShape, x: f64| -> f64 {
        let omega = shape.value(x);
        match tau {
            None => omega,
            Some(t) => {
                let s = (0.5 * omega * t).sin();
                s * s
            }
        }
    };
    let scales = [guess.omega_w.abs(), guess.w0, guess.w0];
    let fit = levenberg_marquardt(
        |p, r| {
            let shape = ProfileShape { omega_w: p[0], w0: p[1], x_center: p[2] };
            for (ri, (x, y)) in r.iter_mut().zip(samples) {
                *ri = y - model(&shape, *x);
            }
            Ok(())
        },
        samples.len(),
        &[guess.omega_w, guess.w0, guess.x_center],
        &scales,
        &LmOptions::default(),
    )?;
    let mut shape = ProfileShape { omega_w: fit.params[0], w0: fit.params[1].abs(), x_center: fit.params[2] };
    if tau.is_some() {
        shape.omega_w = shape.omega_w.abs();
    }
    let cov = fit.scaled_covariance();
    let mut covariance = [[0.0; 3]; 3];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = cov[(i, j)];
        }
    }
    let residual_rms = (fit.chi2 / samples.len() as f64).sqrt();
    let peak = samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max);
    Ok(ProfileFit { shape, covariance, residual_rms, normalized_residual: residual_rms / peak })
}

fn guess_from_rabi(samples: &[(f64, f64)]) -> Result<ProfileShape> {
    let (mut imax, mut imin) = (0, 0);
    for (i, s) in samples.iter().enumerate() {
        if s.1 > samples[imax].1 {
            imax = i;
        }
        if s.1 < samples[imin].1 {
            imin = i;
        }
    }
    let hi = samples[imax].1;
    let lo = samples[imin].1;
    let peak = hi.max(-lo);
    if !(peak > 0.0) {
        return Err(Error::FitFailure("all Rabi samples are zero".into()));
    }
    if hi < 0.05 * peak || -lo < 0.05 * peak {
        return Err(Error::FitFailure("samples cover a single lobe; the center and waist are not identifiable".into()));
    }
    let (xmax, xmin) = (samples[imax].0, samples[imin].0);
    let sign = if xmax > xmin { 1.0 } else { -1.0 };
    Ok(ProfileShape::from_peak(0.5 * (hi - lo), (xmax - xmin).abs(), 0.5 * (xmax + xmin)).with_sign(sign))
}

fn guess_from_excitation(samples: &[(f64, f64)], tau: f64) -> Result<ProfileShape> {
    let pmax = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let pmin = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    if !(pmax - pmin > 1e-3) {
        return Err(Error::FitFailure("excitation data are flat".into()));
    }
    let xlo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let xhi = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let span = xhi - xlo;
    // The P1 pattern is symmetric about the center: take the weighted centroid.
    let wsum: f64 = samples.iter().map(|s| s.1).sum();
    let xc = if wsum > 0.0 { samples.iter().map(|s| s.0 * s.1).sum::<f64>() / wsum } else { 0.5 * (xlo + xhi) };
    let half = 0.5 * pmax;
    let left = samples.iter().any(|s| s.0 < xc && s.1 > half);
    let right = samples.iter().any(|s| s.0 > xc && s.1 > half);
    if !(left && right) {
        return Err(Error::FitFailure("excitation data cover a single lobe".into()));
    }
    let mut best = (f64::INFINITY, ProfileShape::from_peak(1.0, span / 4.0, xc));
    for iw in 0..48 {
        let w0 = span / 40.0 * (40.0f64).powf(iw as f64 / 47.0);
        for ia in 1..=60 {
            let area = 3.0 * ia as f64 / 60.0;
            let shape = ProfileShape::from_peak(2.0 * area / tau, w0, xc);
            let chi2: f64 = samples
                .iter()
                .map(|(x, p)| {
                    let s = (0.5 * shape.value(*x) * tau).sin();
                    let d = p - s * s;
                    d * d
                })
                .sum();
            if chi2 < best.0 {
                best = (chi2, shape);
            }
        }
    }
    Ok(best.1)
}

impl ProfileShape {
    fn with_sign(mut self, sign: f64) -> Self {
        self.omega_w *= sign;
        self
    }
}

/// Ω'(x0) in rad/s per meter: analytic for a fitted profile, otherwise a
/// finite-difference derivative of the interpolating polynomial through the
/// nearest samples.
pub fn profile_gradient(profile: &RabiProfile, x0: f64) -> Result<f64> {
    if let Some(s) = &profile.fitted {
        return Ok(s.derivative(x0));
    }
    interpolate(&profile.samples, x0, 1)
}

// Value (`order` 0) or derivative (`order` 1) at x of the Lagrange polynomial
// through up to five samples nearest to x.
fn interpolate(samples: &[(f64, f64)], x: f64, order: usize) -> Result<f64> {
    let n = samples.len();
    if n < 3 {
        return Err(invalid("profile", "needs a fit or at least 3 samples"));
    }
    let (lo, hi) = (samples[0].0, samples[n - 1].0);
    if !(x >= lo && x <= hi) {
        return Err(Error::OutOfRange { what: "x0", value: x, lo, hi });
    }
    let pos = samples.partition_point(|s| s.0 < x);
    let width = 5.min(n);
    let start = pos.saturating_sub(width / 2).min(n - width);
    let pts = &samples[start..start + width];
    let mut total = 0.0;
    for (j, (xj, yj)) in pts.iter().enumerate() {
        let denom: f64 = pts.iter().enumerate().filter(|(m, _)| *m != j).map(|(_, (xm, _))| xj - xm).product();
        let basis = if order == 0 {
            pts.iter().enumerate().filter(|(m, _)| *m != j).map(|(_, (xm, _))| x - xm).product::<f64>()
        } else {
            let mut d = 0.0;
            for i in (0..pts.len()).filter(|i| *i != j) {
                d += pts
                    .iter()
                    .enumerate()
                    .filter(|(m, _)| *m != j && *m != i)
                    .map(|(_, (xm, _))| x - xm)
                    .product::<f64>();
            }
            d
        };
        total += yj * basis / denom;
    }
    Ok(total)
}
