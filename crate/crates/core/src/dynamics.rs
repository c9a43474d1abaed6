//! Spin ⊗ motion dynamics of gradient-coupled Mølmer-Sørensen gates.
//!
//! States live on `2^n_spins ⊗ fock` with the spin index as the major index
//! and ion 0 as the most significant spin bit. Spin basis state `0` is the
//! qubit ground state `|0⟩`.

mod analytic;
mod gate;
mod hamiltonian;
mod master;
mod observables;
mod operator;
mod state;

pub use analytic::{analytic_ms, AnalyticMs};
pub use gate::{build_ms_hamiltonian, default_fock_cut, GateSpec, NoiseModel};
pub use hamiltonian::{Coefficient, Hamiltonian, PhaseTerm, SpinBasis, Term};
pub use master::{evolve, evolve_with, EvolveOptions, EvolveStats, Evolution};
pub use observables::{bell_fidelity, observables, parity_contrast, spin_populations, Observables};
pub(crate) use observables::parity_contrast_spin;
pub use operator::SparseOp;
pub use state::DensityState;
