use core::f64::consts::PI;

use pgate_core::dynamics::{
    analytic_ms, bell_fidelity, build_ms_hamiltonian, default_fock_cut, evolve, evolve_with, observables, parity_contrast,
    spin_populations, DensityState, EvolveOptions, GateSpec, Hamiltonian, NoiseModel, SparseOp, SpinBasis,
};
use pgate_core::{Error, C64};
use proptest::prelude::*;

const GATE_TIME: f64 = 367e-6;
const MODE: f64 = 2.0 * PI * 1.1e6;

fn ideal_gate() -> GateSpec {
    GateSpec::ideal(MODE, GATE_TIME, 1, [1.0, 1.0]).unwrap()
}

fn grid(n: usize, t_end: f64) -> Vec<f64> {
    (0..=n).map(|i| t_end * i as f64 / n as f64).collect()
}

fn spin_state(amps: [C64; 4], fock: usize, nbar: f64) -> DensityState {
    DensityState::thermal(&amps, fock, nbar).unwrap()
}

fn bell_state() -> DensityState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    spin_state([C64::new(s, 0.0), z, z, C64::new(0.0, s)], 1, 0.0)
}

#[test]
fn zero_hamiltonian_leaves_state_unchanged() {
    let h = Hamiltonian::new(2, 16, SpinBasis::Z);
    let rho0 = spin_state([C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0), C64::new(0.0, 0.0)], 16, 0.3);
    let out = evolve(&h, &NoiseModel::noiseless(0.0), &rho0, &grid(4, 1e-3)).unwrap();
    for s in &out {
        let worst = s.data().iter().zip(rho0.data()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(worst < 1e-14, "{worst}");
    }
}

#[test]
fn ideal_gate_from_ground_state_is_maximally_entangling() {
    let gate = ideal_gate();
    assert!(gate.closure_error().abs() < 1e-12);
    assert!((gate.phase_condition() - 1.0).abs() < 1e-12);
    let fock = default_fock_cut(0.0, gate.max_displacement(gate.detuning));
    let noise = NoiseModel::noiseless(0.0);
    let h = build_ms_hamiltonian(&gate, &noise, fock).unwrap();
    let rho0 = DensityState::thermal_basis(2, 0, fock, 0.0).unwrap();
    let out = evolve(&h, &noise, &rho0, &[0.0, GATE_TIME]).unwrap();
    let p = spin_populations(&out[1]).unwrap();
    assert!((p[0] - 0.5).abs() < 1e-6 && (p[3] - 0.5).abs() < 1e-6, "{p:?}");
    assert!(p[1].abs() < 1e-6 && p[2].abs() < 1e-6, "{p:?}");
    assert!((parity_contrast(&out[1]).unwrap() - 1.0).abs() < 1e-6);
    // Motion is disentangled again: the spin state is pure.
    let r = out[1].spin_reduced();
    let purity: f64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| (r[i * 4 + j] * r[j * 4 + i]).re).sum();
    assert!((purity - 1.0).abs() < 1e-6);
}

#[test]
fn heating_raises_mean_phonon_number_linearly() {
    let fock = 40;
    let rate = 800.0;
    let h = Hamiltonian::new(2, fock, SpinBasis::Z);
    let noise = NoiseModel { heating_rate: rate, ..NoiseModel::noiseless(0.5) };
    let rho0 = DensityState::thermal_basis(2, 0, fock, 0.5).unwrap();
    let t = grid(5, 1e-3);
    let out = evolve(&h, &noise, &rho0, &t).unwrap();
    let n0 = out[0].mean_phonon();
    for (s, ti) in out.iter().zip(&t) {
        assert!((s.mean_phonon() - n0 - rate * ti).abs() < 1e-6, "{} vs {}", s.mean_phonon() - n0, rate * ti);
    }
}

#[test]
fn analytic_displacement_matches_direct_quadrature() {
    let gate = GateSpec { detuning: 2.0 * PI / GATE_TIME * 1.3, ..ideal_gate() };
    let a = analytic_ms(&gate, 0.0).unwrap();
    // Independent: α(t) = −i ∫₀ᵗ F e^{−iδτ} dτ by the midpoint rule.
    for branch in 0..4 {
        let f = a.force(branch);
        let t = 0.7 * GATE_TIME;
        let n = 200_000;
        let dt = t / n as f64;
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..n {
            acc += C64::from_polar(f * dt, -gate.detuning * (k as f64 + 0.5) * dt);
        }
        let oracle = C64::new(0.0, -1.0) * acc;
        assert!((a.displacement(branch, t) - oracle).norm() < 1e-8 * (1.0 + oracle.norm()));
    }
}

#[test]
fn analytic_phase_matches_coherent_state_integral() {
    // A coherent state e^{iχ}|α⟩ driven by F(a e^{iδt} + h.c.) has
    // χ' = −Re(F e^{iδt} α), so Φ = −χ = ∫ Re(F e^{iδτ} α(τ)) dτ.
    for detuning in [2.0 * PI / GATE_TIME, 3.7e4, 1e-3] {
        let gate = GateSpec { detuning, ..ideal_gate() };
        let a = analytic_ms(&gate, 0.0).unwrap();
        let f = a.force(0);
        let t = 0.83 * GATE_TIME;
        let n = 100_000;
        let dt = t / n as f64;
        let mut phase = 0.0;
        for k in 0..n {
            let tau = (k as f64 + 0.5) * dt;
            phase += (C64::from_polar(f, detuning * tau) * a.displacement(0, tau)).re * dt;
        }
        let got = a.geometric_phase(0, t);
        assert!((got - phase).abs() < 1e-7 * phase.abs().max(1e-3), "{got} vs {phase}");
    }
}

#[test]
fn analytic_loop_closure_and_bell_populations() {
    let gate = ideal_gate();
    let a = analytic_ms(&gate, 6.0).unwrap();
    for b in 0..4 {
        assert!(a.displacement(b, GATE_TIME).norm() < 1e-12);
    }
    let p = a.populations(GATE_TIME);
    assert!((p[0] + p[3] - 1.0).abs() < 1e-12);
    assert!((p[0] - 0.5).abs() < 1e-12);
    // Same for two loops.
    let g2 = GateSpec::ideal(MODE, GATE_TIME, 2, [1.0, 1.0]).unwrap();
    let p2 = analytic_ms(&g2, 6.0).unwrap().populations(GATE_TIME);
    assert!((p2[0] - 0.5).abs() < 1e-12 && (p2[3] - 0.5).abs() < 1e-12);
}

#[test]
fn analytic_rejects_carrier() {
    let gate = GateSpec { carrier_rabi: [1.0, 1.0], ..ideal_gate() };
    assert!(matches!(analytic_ms(&gate, 0.0), Err(Error::InvalidParameter { .. })));
}

fn max_deviation(gate: &GateSpec, nbar: f64, fock: usize, points: usize) -> f64 {
    let noise = NoiseModel::noiseless(nbar);
    let h = build_ms_hamiltonian(gate, &noise, fock).unwrap();
    let rho0 = DensityState::thermal_basis(2, 0, fock, nbar).unwrap();
    let t = grid(points, gate.gate_time);
    let out = evolve(&h, &noise, &rho0, &t).unwrap();
    let a = analytic_ms(gate, nbar).unwrap();
    let mut worst: f64 = 0.0;
    for (s, ti) in out.iter().zip(&t) {
        let num = spin_populations(s).unwrap();
        let ana = a.populations(*ti);
        for k in 0..4 {
            worst = worst.max((num[k] - ana[k]).abs());
        }
    }
    worst
}

#[test]
fn numeric_and_analytic_agree_on_thermal_gate() {
    let gate = ideal_gate();
    let nbar = 2.0;
    let fock = default_fock_cut(nbar, gate.max_displacement(gate.detuning));
    let worst = max_deviation(&gate, nbar, fock, 24);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn numeric_and_analytic_agree_on_unbalanced_detuned_gate() {
    let gate = GateSpec { detuning: 1.2 * ideal_gate().detuning, sideband_rabi: [0.8 * ideal_gate().sideband_rabi[0], -1.1 * ideal_gate().sideband_rabi[1]], ..ideal_gate() };
    let fock = default_fock_cut(0.5, gate.max_displacement(gate.detuning));
    let worst = max_deviation(&gate, 0.5, fock, 16);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn too_small_fock_cut_is_reported() {
    let gate = ideal_gate();
    let noise = NoiseModel::noiseless(6.0);
    assert!(matches!(build_ms_hamiltonian(&gate, &noise, 10), Err(Error::InvalidParameter { name: "fock", .. })));
    // Meets the precondition but the thermal tail breaches the top level.
    let fock = 30;
    let h = build_ms_hamiltonian(&gate, &noise, fock).unwrap();
    let rho0 = DensityState::thermal_basis(2, 0, fock, 6.0).unwrap();
    assert!(matches!(evolve(&h, &noise, &rho0, &[0.0, GATE_TIME]), Err(Error::Truncation { .. })));
}

#[test]
fn hamiltonian_is_hermitian_with_carrier_and_cubic_terms() {
    let gate = GateSpec { carrier_rabi: [1e4, 2e4], cubic_rabi: [30.0, -20.0], ..ideal_gate() };
    let h = build_ms_hamiltonian(&gate, &NoiseModel::noiseless(0.0), 12).unwrap();
    for t in [0.0, 1e-5, 2.2e-4] {
        assert!(h.hermiticity_error_at(t) < 1e-9, "{}", h.hermiticity_error_at(t));
    }
}

#[test]
fn dephasing_lowers_purity_and_keeps_trace() {
    let gate = ideal_gate();
    let noise = NoiseModel { motional_t2: 5e-3, heating_rate: 50.0, ..NoiseModel::noiseless(0.0) };
    let fock = 20;
    let h = build_ms_hamiltonian(&gate, &noise, fock).unwrap();
    let rho0 = DensityState::thermal_basis(2, 0, fock, 0.0).unwrap();
    let out = evolve(&h, &noise, &rho0, &grid(10, GATE_TIME)).unwrap();
    let mut last = 1.0 + 1e-12;
    for s in &out {
        assert!((s.trace() - C64::new(1.0, 0.0)).norm() < 1e-8);
        assert!(s.hermiticity_error() < 1e-10);
        let p = s.purity();
        assert!(p <= last + 1e-10, "{p} > {last}");
        last = p;
    }
    s_valid(&out[out.len() - 1]);
}

fn s_valid(s: &DensityState) {
    s.validate().unwrap();
}

#[test]
fn noise_free_evolution_keeps_purity() {
    let gate = GateSpec { carrier_rabi: [3e3, 3e3], ..ideal_gate() };
    let noise = NoiseModel::noiseless(0.0);
    let fock = 16;
    let h = build_ms_hamiltonian(&gate, &noise, fock).unwrap();
    let rho0 = DensityState::thermal_basis(2, 1, fock, 0.0).unwrap();
    let ev = evolve_with(&h, &noise, &rho0, &grid(6, GATE_TIME), &EvolveOptions::default()).unwrap();
    for s in &ev.states {
        assert!((s.purity() - 1.0).abs() < 1e-8);
    }
    assert!(ev.stats.accepted_steps > 0);
}

#[test]
fn bell_state_parity_contrast_is_one() {
    let s = bell_state();
    assert!((parity_contrast(&s).unwrap() - 1.0).abs() < 1e-12);
    // Parity oscillates as cos(2φ + const) between ±1.
    let ps: Vec<f64> = (0..16).map(|k| observables(&s, PI * k as f64 / 16.0).unwrap().parity).collect();
    let max = ps.iter().cloned().fold(f64::MIN, f64::max);
    let min = ps.iter().cloned().fold(f64::MAX, f64::min);
    assert!(max > 0.98 && min < -0.98);
}

#[test]
fn maximally_mixed_state_has_no_parity() {
    let mut data = vec![C64::new(0.0, 0.0); 16];
    for i in 0..4 {
        data[i * 5] = C64::new(0.25, 0.0);
    }
    let s = DensityState::from_matrix(2, 1, data).unwrap();
    for k in 0..8 {
        let o = observables(&s, 0.4 * k as f64).unwrap();
        assert!(o.parity.abs() < 1e-15);
        assert!((o.p00 - 0.25).abs() < 1e-15);
    }
}

#[test]
fn fidelity_examples() {
    assert!((bell_fidelity(0.5, 0.5, 1.0).unwrap() - 1.0).abs() < 1e-15);
    assert!((bell_fidelity(0.25, 0.25, 0.0).unwrap() - 0.25).abs() < 1e-15);
    let f = bell_fidelity(0.4925, 0.4925, 0.9887).unwrap();
    assert!((f - 0.987).abs() < 5e-4, "{f}");
    assert!(bell_fidelity(1.1, 0.0, 0.0).is_err());
}

#[test]
fn sparse_operators_compose() {
    let a = SparseOp::annihilation(5);
    let n = SparseOp::number(5);
    let ad = SparseOp::creation(5);
    let diff = ad.matmul(&a).add(&n.scale(C64::new(-1.0, 0.0)));
    assert!(diff.entries().iter().all(|(_, _, v)| v.norm() < 1e-15));
}

fn random_spin_density(re: &[f64], im: &[f64]) -> DensityState {
    // ρ = M M† / tr.
    let m: Vec<C64> = re.iter().zip(im).map(|(a, b)| C64::new(*a, *b)).collect();
    let mut r = vec![C64::new(0.0, 0.0); 16];
    for i in 0..4 {
        for j in 0..4 {
            r[i * 4 + j] = (0..4).map(|k| m[i * 4 + k] * m[j * 4 + k].conj()).sum();
        }
    }
    let tr: f64 = (0..4).map(|i| r[i * 5].re).sum();
    r.iter_mut().for_each(|v| *v /= tr);
    DensityState::from_matrix(2, 1, r).unwrap()
}

proptest! {
    #[test]
    fn parity_is_periodic_and_bounded(re in prop::collection::vec(-1.0..1.0f64, 16), im in prop::collection::vec(-1.0..1.0f64, 16), phi in 0.0..6.3f64) {
        prop_assume!(re.iter().chain(&im).map(|v| v * v).sum::<f64>() > 1e-2);
        let s = random_spin_density(&re, &im);
        let a = observables(&s, phi).unwrap();
        let b = observables(&s, phi + 2.0 * PI).unwrap();
        prop_assert!((a.parity - b.parity).abs() < 1e-12);
        prop_assert!(a.parity.abs() <= 1.0 + 1e-12);
        prop_assert!((a.p00 + a.p01 + a.p10 + a.p11 - 1.0).abs() < 1e-12);
        let c = parity_contrast(&s).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&c));
    }

    #[test]
    fn analytic_populations_sum_to_one(t in 0.0..1.0f64, nbar in 0.0..7.0f64, ratio in 0.5..2.0f64) {
        let gate = GateSpec { sideband_rabi: [ideal_gate().sideband_rabi[0] * ratio, ideal_gate().sideband_rabi[1]], ..ideal_gate() };
        let p = analytic_ms(&gate, nbar).unwrap().populations(t * GATE_TIME);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|v| *v >= -1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]
    #[test]
    fn lindblad_evolution_preserves_trace(t2 in 1e-3..1.0f64, rate in 0.0..500.0f64, scale in 0.3..1.5f64) {
        let gate = ideal_gate().scaled(scale);
        let noise = NoiseModel { motional_t2: t2, heating_rate: rate, ..NoiseModel::noiseless(0.0) };
        let fock = 18;
        let h = build_ms_hamiltonian(&gate, &noise, fock).unwrap();
        let rho0 = DensityState::thermal_basis(2, 0, fock, 0.0).unwrap();
        let out = evolve(&h, &noise, &rho0, &grid(3, GATE_TIME)).unwrap();
        let mut last = 1.0 + 1e-12;
        for s in &out {
            prop_assert!((s.trace() - C64::new(1.0, 0.0)).norm() < 1e-8);
            prop_assert!(s.purity() <= last + 1e-10);
            last = s.purity();
        }
    }
}
