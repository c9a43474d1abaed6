use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::error::{invalid, require};
use crate::{Error, Result, C64};

use super::gate::NoiseModel;
use super::hamiltonian::{Coefficient, Hamiltonian, SpinBasis};
use super::operator::SparseOp;
use super::state::{hadamard_all, DensityState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest tolerated population in the top Fock level.
    pub truncation_threshold: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-10, truncation_threshold: 1e-6, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvolveStats {
    pub rhs_evaluations: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub states: Vec<DensityState>,
    pub stats: EvolveStats,
}

/// Lindblad evolution of `rho0` (given at `t_grid[0]`, computational basis)
/// under `h` and the motional noise channels of `noise`; one state per grid
/// time, in the computational basis.
pub fn evolve(h: &Hamiltonian, noise: &NoiseModel, rho0: &DensityState, t_grid: &[f64]) -> Result<Vec<DensityState>> {
    Ok(evolve_with(h, noise, rho0, t_grid, &EvolveOptions::default())?.states)
}

struct Generator {
    d: usize,
    fock: usize,
    spins: usize,
    terms: Vec<(Coefficient, SparseOp)>,
    damping: SparseOp,
    jumps: Vec<(f64, SparseOp)>,
    a: Vec<C64>,
    y: Vec<C64>,
    yd: Vec<C64>,
    evaluations: usize,
}

impl Generator {
    fn new(h: &Hamiltonian, noise: &NoiseModel) -> Result<Self> {
        let fock = h.fock();
        let spins = 1usize << h.n_spins();
        let id = SparseOp::identity(spins);
        let mut jumps = Vec::new();
        if noise.motional_t2.is_finite() {
            jumps.push((2.0 / noise.motional_t2, id.kron(&SparseOp::number(fock))));
        }
        if noise.heating_rate > 0.0 {
            jumps.push((noise.heating_rate, id.kron(&SparseOp::annihilation(fock))));
            jumps.push((noise.heating_rate, id.kron(&SparseOp::creation(fock))));
        }
        let d = h.dim();
        let mut damping = SparseOp::zero(d);
        for (g, l) in &jumps {
            damping = damping.add(&l.adjoint().matmul(l).scale(C64::new(-0.5 * g, 0.0)));
        }
        let minus_i = C64::new(0.0, -1.0);
        let terms = h
            .terms()
            .iter()
            .map(|t| {
                let c = match t.coefficient {
                    Coefficient::Constant(c) => Coefficient::Constant(c * minus_i),
                    Coefficient::Rotating { amplitude, frequency } => Coefficient::Rotating { amplitude: amplitude * minus_i, frequency },
                };
                (c, t.op.clone())
            })
            .collect();
        let z = C64::new(0.0, 0.0);
        Ok(Self { d, fock, spins, terms, damping, jumps, a: vec![z; d * d], y: vec![z; d * d], yd: vec![z; d * d], evaluations: 0 })
    }

    // dρ/dt = A + A† + Σ g·L(Lρ)†  with  A = −iHρ − ½Σ g L†Lρ.
    fn rhs(&mut self, t: f64, rho: &[C64], out: &mut [C64]) {
        self.evaluations += 1;
        let d = self.d;
        let zero = C64::new(0.0, 0.0);
        self.a.fill(zero);
        for (c, op) in &self.terms {
            op.apply_left(rho, &mut self.a, c.at(t));
        }
        self.damping.apply_left(rho, &mut self.a, C64::new(1.0, 0.0));
        add_adjoint(&self.a, out, d);
        for (g, l) in &self.jumps {
            self.y.fill(zero);
            l.apply_left(rho, &mut self.y, C64::new(1.0, 0.0));
            adjoint_into(&self.y, &mut self.yd, d);
            l.apply_left(&self.yd, out, C64::new(*g, 0.0));
        }
    }

    fn top_population(&self, rho: &[C64]) -> f64 {
        let n = self.fock - 1;
        (0..self.spins).map(|s| rho[(s * self.fock + n) * self.d + s * self.fock + n].re).sum()
    }
}

const BLOCK: usize = 32;

// out = a + a†
fn add_adjoint(a: &[C64], out: &mut [C64], d: usize) {
    for bi in (0..d).step_by(BLOCK) {
        for bj in (0..d).step_by(BLOCK) {
            for i in bi..(bi + BLOCK).min(d) {
                for j in bj..(bj + BLOCK).min(d) {
                    out[i * d + j] = a[i * d + j] + a[j * d + i].conj();
                }
            }
        }
    }
}

fn adjoint_into(a: &[C64], out: &mut [C64], d: usize) {
    for bi in (0..d).step_by(BLOCK) {
        for bj in (0..d).step_by(BLOCK) {
            for i in bi..(bi + BLOCK).min(d) {
                for j in bj..(bj + BLOCK).min(d) {
                    out[i * d + j] = a[j * d + i].conj();
                }
            }
        }
    }
}

// Multiply ρ_(a,n),(b,m) by exp(i·sign·(θ_a − θ_b)).
fn apply_phase(rho: &mut [C64], theta: &[f64], fock: usize, sign: f64) {
    if theta.iter().all(|t| *t == 0.0) {
        return;
    }
    let s = theta.len();
    let d = s * fock;
    for a in 0..s {
        for b in 0..s {
            if a == b {
                continue;
            }
            let ph = C64::from_polar(1.0, sign * (theta[a] - theta[b]));
            for n in 0..fock {
                let row = &mut rho[(a * fock + n) * d + b * fock..(a * fock + n) * d + (b + 1) * fock];
                for v in row.iter_mut() {
                    *v *= ph;
                }
            }
        }
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// As [`evolve`], with explicit tolerances and integration statistics.
pub fn evolve_with(h: &Hamiltonian, noise: &NoiseModel, rho0: &DensityState, t_grid: &[f64], opts: &EvolveOptions) -> Result<Evolution> {
    noise.validate()?;
    require(!t_grid.is_empty(), "t_grid", "must not be empty")?;
    require(t_grid.iter().all(|t| t.is_finite()), "t_grid", "must be finite")?;
    require(t_grid.windows(2).all(|w| w[0] <= w[1]), "t_grid", "must be ascending")?;
    if rho0.n_spins() != h.n_spins() || rho0.fock() != h.fock() {
        return Err(invalid("rho0", "dimensions do not match the Hamiltonian"));
    }
    let tr = rho0.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-9 || rho0.hermiticity_error() > 1e-12 {
        return Err(invalid("rho0", "must be a unit-trace Hermitian matrix"));
    }

    let t0 = t_grid[0];
    let top = rho0.top_level_population();
    if top > opts.truncation_threshold {
        return Err(Error::Truncation { population: top, time: t0, cut: h.fock() });
    }

    let hadamard = hadamard_all(h.n_spins());
    let to_frame = |rho: &DensityState| -> DensityState {
        match h.basis() {
            SpinBasis::Z => rho.clone(),
            SpinBasis::X => rho.conjugate_spins_real(&hadamard),
        }
    };
    let mut gen = Generator::new(h, noise)?;
    let d = gen.d;
    let fock = h.fock();
    let n_spins = h.n_spins();

    let mut y = to_frame(rho0).data().to_vec();
    apply_phase(&mut y, &h.phase_integrals(t0), fock, 1.0);

    let emit = |y: &[C64], t: f64| -> Result<DensityState> {
        let mut data = y.to_vec();
        apply_phase(&mut data, &h.phase_integrals(t), fock, -1.0);
        let s = DensityState::from_matrix(n_spins, fock, data)?;
        Ok(to_frame(&s))
    };

    let z = C64::new(0.0, 0.0);
    let mut k: Vec<Vec<C64>> = (0..7).map(|_| vec![z; d * d]).collect();
    let mut stage = vec![z; d * d];
    let mut y_new = vec![z; d * d];

    let mut times = vec![t0];
    let mut states = vec![emit(&y, t0)?];
    let mut stats = EvolveStats::default();
    let span = t_grid[t_grid.len() - 1] - t0;
    if span == 0.0 {
        for &t in &t_grid[1..] {
            times.push(t);
            states.push(states[0].clone());
        }
        return Ok(Evolution { times, states, stats });
    }

    let mut t = t0;
    {
        let (first, _) = k.split_at_mut(1);
        gen.rhs(t, &y, &mut first[0]);
    }
    let mut h_step = initial_step(&mut gen, t, &y, &k[0], span, opts);
    let norm = |e: &[C64], a: &[C64], b: &[C64]| -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..e.len() {
            let sc = opts.abs_tol + opts.rel_tol * a[i].norm().max(b[i].norm());
            worst = worst.max(e[i].norm() / sc);
        }
        worst
    };

    for &target in &t_grid[1..] {
        while t < target {
            let remaining = target - t;
            let clipped = h_step >= remaining;
            let hh = if clipped { remaining } else { h_step };
            for s in 1..7 {
                for i in 0..d * d {
                    let mut acc = y[i];
                    for j in 0..s {
                        let a = A[s][j];
                        if a != 0.0 {
                            acc += k[j][i] * (hh * a);
                        }
                    }
                    stage[i] = acc;
                }
                // The last stage evaluates at the 5th-order solution (FSAL).
                let (_, tail) = k.split_at_mut(s);
                gen.rhs(t + C[s] * hh, &stage, &mut tail[0]);
                if s == 6 {
                    y_new.copy_from_slice(&stage);
                }
            }
            for i in 0..d * d {
                let mut e = z;
                for j in 0..7 {
                    if E[j] != 0.0 {
                        e += k[j][i] * (hh * E[j]);
                    }
                }
                stage[i] = e;
            }
            let err = norm(&stage, &y, &y_new);
            if !err.is_finite() {
                return Err(Error::Integration { time: t, reason: "non-finite error estimate".into() });
            }
            if err <= 1.0 {
                stats.accepted_steps += 1;
                t = if clipped { target } else { t + hh };
                core::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                let top = gen.top_population(&y);
                if top > opts.truncation_threshold {
                    return Err(Error::Truncation { population: top, time: t, cut: fock });
                }
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let proposal = hh * fac;
                h_step = if clipped { proposal.max(h_step) } else { proposal };
            } else {
                stats.rejected_steps += 1;
                h_step = hh * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
            if h_step < 1e-14 * span {
                return Err(Error::Integration { time: t, reason: format!("step size underflow ({h_step:e} s)") });
            }
            if stats.accepted_steps + stats.rejected_steps > opts.max_steps {
                return Err(Error::Integration { time: t, reason: format!("exceeded {} steps", opts.max_steps) });
            }
        }
        times.push(target);
        states.push(emit(&y, target)?);
    }
    stats.rhs_evaluations = gen.evaluations;
    Ok(Evolution { times, states, stats })
}

// Hairer-Wanner starting step for a 5th-order method.
fn initial_step(gen: &mut Generator, t: f64, y: &[C64], f0: &[C64], span: f64, opts: &EvolveOptions) -> f64 {
    let sc: Vec<f64> = y.iter().map(|v| opts.abs_tol + opts.rel_tol * v.norm()).collect();
    let rms = |v: &[C64]| -> f64 { (v.iter().zip(&sc).map(|(a, s)| a.norm_sqr() / (s * s)).sum::<f64>() / v.len() as f64).sqrt() };
    let d0 = rms(y);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { (0.01 * d0 / d1).min(span) };
    let y1: Vec<C64> = y.iter().zip(f0).map(|(a, b)| a + b * h0).collect();
    let mut f1 = vec![C64::new(0.0, 0.0); y.len()];
    gen.rhs(t + h0, &y1, &mut f1);
    let diff: Vec<C64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (1e-6 * span).max(h0 * 1e-3) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(span)
}
