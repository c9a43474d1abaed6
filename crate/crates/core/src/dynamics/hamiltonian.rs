use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::error::{invalid, require};
use crate::{Result, C64};

use super::operator::SparseOp;

/// Time dependence of a Hamiltonian term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    Constant(C64),
    /// `amplitude · exp(i·frequency·t)`.
    Rotating { amplitude: C64, frequency: f64 },
}

impl Coefficient {
    pub fn at(&self, t: f64) -> C64 {
        match *self {
            Self::Constant(c) => c,
            Self::Rotating { amplitude, frequency } => amplitude * C64::from_polar(1.0, frequency * t),
        }
    }
}

/// `coefficient(t) · op` on the full space.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: Coefficient,
    pub op: SparseOp,
}

/// `amplitude · cos(frequency·t + phase) · diag(spin_diagonal) ⊗ 1`.
///
/// Such terms commute with everything else in the Hamiltonian and are
/// integrated exactly as phases instead of being stepped numerically.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTerm {
    pub spin_diagonal: Vec<f64>,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl PhaseTerm {
    /// ∫₀ᵗ amplitude·cos(ωτ + φ) dτ.
    pub fn integral(&self, t: f64) -> f64 {
        if self.frequency == 0.0 {
            self.amplitude * t * self.phase.cos()
        } else {
            self.amplitude * ((self.frequency * t + self.phase).sin() - self.phase.sin()) / self.frequency
        }
    }
}

/// Spin basis in which the Hamiltonian's operators are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinBasis {
    /// Computational (σz) basis.
    Z,
    /// σx eigenbasis of every spin (Hadamard frame); index bit 0 ↔ σx = +1.
    X,
}

/// Hermitian, time-dependent generator on `2^n_spins ⊗ fock`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n_spins: usize,
    fock: usize,
    basis: SpinBasis,
    terms: Vec<Term>,
    phase_terms: Vec<PhaseTerm>,
}

impl Hamiltonian {
    pub fn new(n_spins: usize, fock: usize, basis: SpinBasis) -> Self {
        Self { n_spins, fock, basis, terms: Vec::new(), phase_terms: Vec::new() }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn fock(&self) -> usize {
        self.fock
    }

    pub fn dim(&self) -> usize {
        (1 << self.n_spins) * self.fock
    }

    pub fn basis(&self) -> SpinBasis {
        self.basis
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn phase_terms(&self) -> &[PhaseTerm] {
        &self.phase_terms
    }

    /// Add a term. The caller is responsible for adding Hermitian conjugates.
    pub fn add_term(&mut self, coefficient: Coefficient, op: SparseOp) -> Result<()> {
        require(op.dim() == self.dim(), "op", "dimension does not match the Hamiltonian")?;
        if !self.phase_terms.is_empty() && !spin_diagonal(&op, self.fock) {
            return Err(invalid("op", "must be spin-diagonal when phase terms are present"));
        }
        self.terms.push(Term { coefficient, op });
        Ok(())
    }

    pub fn add_phase_term(&mut self, term: PhaseTerm) -> Result<()> {
        require(term.spin_diagonal.len() == 1 << self.n_spins, "spin_diagonal", "needs one entry per spin basis state")?;
        if self.terms.iter().any(|t| !spin_diagonal(&t.op, self.fock)) {
            return Err(invalid("phase term", "other terms are not spin-diagonal, so the phase does not commute"));
        }
        self.phase_terms.push(term);
        Ok(())
    }

    /// Accumulated phase θ_s(t) per spin basis state from the phase terms.
    pub fn phase_integrals(&self, t: f64) -> Vec<f64> {
        let mut theta = vec![0.0; 1 << self.n_spins];
        for p in &self.phase_terms {
            let i = p.integral(t);
            for (th, d) in theta.iter_mut().zip(&p.spin_diagonal) {
                *th += i * d;
            }
        }
        theta
    }

    /// Dense H(t), including phase terms; for tests and diagnostics.
    pub fn dense_at(&self, t: f64) -> Vec<C64> {
        let d = self.dim();
        let mut m = vec![C64::new(0.0, 0.0); d * d];
        for term in &self.terms {
            let c = term.coefficient.at(t);
            for (r, k, v) in term.op.entries() {
                m[r * d + k] += c * v;
            }
        }
        for p in &self.phase_terms {
            let a = p.amplitude * (p.frequency * t + p.phase).cos();
            for (s, v) in p.spin_diagonal.iter().enumerate() {
                for n in 0..self.fock {
                    let i = s * self.fock + n;
                    m[i * d + i] += a * v;
                }
            }
        }
        m
    }

    /// Largest |H − H†| entry at time t.
    pub fn hermiticity_error_at(&self, t: f64) -> f64 {
        let d = self.dim();
        let m = self.dense_at(t);
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((m[i * d + j] - m[j * d + i].conj()).norm());
            }
        }
        worst
    }
}

fn spin_diagonal(op: &SparseOp, fock: usize) -> bool {
    op.entries().iter().all(|(r, c, _)| r / fock == c / fock)
}
