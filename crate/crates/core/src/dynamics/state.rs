use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::error::{invalid, require};
use crate::{Result, C64};

/// Density operator on `2^n_spins ⊗ fock`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    n_spins: usize,
    fock: usize,
    data: Vec<C64>,
}

impl DensityState {
    pub fn from_matrix(n_spins: usize, fock: usize, data: Vec<C64>) -> Result<Self> {
        require(fock >= 1, "fock", "must be at least 1")?;
        let d = (1usize << n_spins) * fock;
        require(data.len() == d * d, "data", "length must be dim²")?;
        Ok(Self { n_spins, fock, data })
    }

    /// `|ψ⟩⟨ψ| ⊗ ρ_th(n̄)` with the Boltzmann occupation truncated to `fock`
    /// levels and renormalized.
    pub fn thermal(spin_state: &[C64], fock: usize, nbar: f64) -> Result<Self> {
        require(fock >= 1, "fock", "must be at least 1")?;
        require(nbar >= 0.0 && nbar.is_finite(), "nbar", "must be non-negative")?;
        let s = spin_state.len();
        require(s.is_power_of_two() && s >= 1, "spin_state", "length must be a power of two")?;
        let norm: f64 = spin_state.iter().map(|c| c.norm_sqr()).sum();
        require(norm > 0.0, "spin_state", "must be nonzero")?;
        let n_spins = s.trailing_zeros() as usize;
        let ratio = nbar / (nbar + 1.0);
        let mut p: Vec<f64> = (0..fock).map(|n| ratio.powi(n as i32)).collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
        let d = s * fock;
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for a in 0..s {
            for b in 0..s {
                let c = spin_state[a] * spin_state[b].conj() / norm;
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                for (n, pn) in p.iter().enumerate() {
                    data[(a * fock + n) * d + b * fock + n] = c * pn;
                }
            }
        }
        Ok(Self { n_spins, fock, data })
    }

    /// Computational basis state `|index⟩ ⊗ ρ_th(n̄)`.
    pub fn thermal_basis(n_spins: usize, index: usize, fock: usize, nbar: f64) -> Result<Self> {
        let s = 1usize << n_spins;
        if index >= s {
            return Err(invalid("index", "spin basis index out of range"));
        }
        let mut psi = vec![C64::new(0.0, 0.0); s];
        psi[index] = C64::new(1.0, 0.0);
        Self::thermal(&psi, fock, nbar)
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn spin_dim(&self) -> usize {
        1 << self.n_spins
    }

    pub fn fock(&self) -> usize {
        self.fock
    }

    pub fn dim(&self) -> usize {
        self.spin_dim() * self.fock
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }


    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> C64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i]).sum()
    }

    pub fn purity(&self) -> f64 {
        // tr ρ² = Σ |ρ_ij|² for Hermitian ρ.
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.data[i * d + j] - self.data[j * d + i].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let m = DMatrix::from_fn(d, d, |i, j| 0.5 * (self.data[i * d + j] + self.data[j * d + i].conj()));
        SymmetricEigen::new(m).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Checks trace, Hermiticity and positivity within the contract tolerances.
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-9 {
            return Err(invalid("rho", alloc::format!("trace {tr} differs from 1")));
        }
        let h = self.hermiticity_error();
        if h > 1e-12 {
            return Err(invalid("rho", alloc::format!("not Hermitian (max deviation {h:e})")));
        }
        let e = self.min_eigenvalue();
        if e < -1e-9 {
            return Err(invalid("rho", alloc::format!("not positive semidefinite (eigenvalue {e:e})")));
        }
        Ok(())
    }

    /// Population of the highest retained Fock level, summed over spins.
    pub fn top_level_population(&self) -> f64 {
        let n = self.fock - 1;
        (0..self.spin_dim()).map(|s| self.get(s * self.fock + n, s * self.fock + n).re).sum()
    }

    pub fn mean_phonon(&self) -> f64 {
        let mut total = 0.0;
        for s in 0..self.spin_dim() {
            for n in 0..self.fock {
                let i = s * self.fock + n;
                total += n as f64 * self.get(i, i).re;
            }
        }
        total
    }

    /// Motion traced out: row-major `spin_dim × spin_dim` matrix.
    pub fn spin_reduced(&self) -> Vec<C64> {
        let s = self.spin_dim();
        let f = self.fock;
        let mut out = vec![C64::new(0.0, 0.0); s * s];
        for a in 0..s {
            for b in 0..s {
                out[a * s + b] = (0..f).map(|n| self.get(a * f + n, b * f + n)).sum();
            }
        }
        out
    }

    /// Apply a real symmetric involution `u` (spin_dim × spin_dim) on the spin
    /// index: ρ → (u ⊗ 1) ρ (u ⊗ 1).
    pub(crate) fn conjugate_spins_real(&self, u: &[f64]) -> Self {
        let s = self.spin_dim();
        let f = self.fock;
        let d = self.dim();
        let mut tmp = vec![C64::new(0.0, 0.0); d * d];
        for a in 0..s {
            for c in 0..s {
                let w = u[a * s + c];
                if w == 0.0 {
                    continue;
                }
                for n in 0..f {
                    let src = &self.data[(c * f + n) * d..(c * f + n + 1) * d];
                    let dst = &mut tmp[(a * f + n) * d..(a * f + n + 1) * d];
                    for (o, v) in dst.iter_mut().zip(src) {
                        *o += v * w;
                    }
                }
            }
        }
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        for row in 0..d {
            for b in 0..s {
                for c in 0..s {
                    let w = u[c * s + b];
                    if w == 0.0 {
                        continue;
                    }
                    for m in 0..f {
                        out[row * d + b * f + m] += tmp[row * d + c * f + m] * w;
                    }
                }
            }
        }
        Self { n_spins: self.n_spins, fock: self.fock, data: out }
    }
}

/// Hadamard on every spin, as a dense real matrix.
pub(crate) fn hadamard_all(n_spins: usize) -> Vec<f64> {
    let s = 1usize << n_spins;
    let norm = (s as f64).sqrt().recip();
    let mut u = vec![0.0; s * s];
    for a in 0..s {
        for b in 0..s {
            let sign = if (a & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            u[a * s + b] = sign * norm;
        }
    }
    u
}
