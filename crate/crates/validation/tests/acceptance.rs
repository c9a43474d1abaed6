//! Acceptance run: one PASS/FAIL line per criterion with the numbers behind
//! it. Exits non-zero when any criterion fails.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use pgate::commands::{budget_inputs, measured_shape};
use pgate::config::RunConfig;
use pgate::output::Format;
use pgate::{run_command, Command};
use pgate_core::calibration::{
    carrier_suppression, fit_parity, fit_ramsey_t2, fit_scan_position, simulate_beam_scan, RamseyOptions, ThermalMotion,
};
use pgate_core::consts::{ATOMIC_MASS_UNIT, ELEMENTARY_CHARGE, YB171_MASS_AMU};
use pgate_core::dynamics::{
    analytic_ms, build_ms_hamiltonian, default_fock_cut, evolve_with, parity_contrast, spin_populations, DensityState,
    EvolveOptions, GateSpec, NoiseModel,
};
use pgate_core::focalfield::{fit_profile, ProfileData, ProfileShape, RabiProfile};
use pgate_core::ionchain::{axial_modes, ChainSpec};
use pgate_core::modulation::interference_factor;
use pgate_core::stark::combined_mode_frequency;
use serde_json::Value;

struct Ledger {
    failed: usize,
}

impl Ledger {
    fn report(&mut self, label: &str, pass: bool, detail: String) {
        if !pass {
            self.failed += 1;
        }
        println!("{} {label}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value / target - 1.0).abs() <= rel
}

fn within_factor(value: f64, target: f64, factor: f64) -> bool {
    value >= target / factor && value <= target * factor
}

fn profile_shape(ledger: &mut Ledger) {
    let start = Instant::now();
    let art = run_command(Command::Profile, &RunConfig::default()).expect("profile runs");
    let secs = start.elapsed().as_secs_f64();
    let fit = &art.summary["fit"];
    let resid = fit["normalized_residual"].as_f64().unwrap();
    let w0 = fit["w0_m"].as_f64().unwrap();
    let pass = resid < 0.05 && within(w0, 0.813e-6, 0.10) && secs < 10.0;
    ledger.report(
        "criterion 1 (profile shape)",
        pass,
        format!("normalized residual {:.2}% (< 5%), w0 {:.3} µm vs 0.813 µm ± 10% ({:+.1}%), {secs:.1} s", 100.0 * resid, w0 * 1e6, 100.0 * (w0 / 0.813e-6 - 1.0)),
    );
}

struct GateCheck {
    p00: f64,
    p11: f64,
    contrast: f64,
    oracle_dev: f64,
    secs: f64,
}

// Noise-free closure gate at n̄ = 6 on `fock` levels, compared with the
// closed-form solution over the whole trajectory.
fn exact_gate(gate: &GateSpec, fock: usize) -> Result<GateCheck, String> {
    let start = Instant::now();
    let noise = NoiseModel::noiseless(6.0);
    let h = build_ms_hamiltonian(gate, &noise, fock).map_err(|e| e.to_string())?;
    let oracle = analytic_ms(gate, 6.0).map_err(|e| e.to_string())?;
    let times: Vec<f64> = (0..=40).map(|k| gate.gate_time * k as f64 / 40.0).collect();
    let mut rho = DensityState::thermal_basis(2, 0, fock, 6.0).map_err(|e| e.to_string())?;
    let mut dev: f64 = 0.0;
    for w in times.windows(2) {
        let mut ev = evolve_with(&h, &noise, &rho, w, &EvolveOptions::default()).map_err(|e| e.to_string())?;
        rho = ev.states.pop().unwrap();
        let p = spin_populations(&rho).unwrap();
        let q = oracle.populations(w[1]);
        dev = dev.max((0..4).map(|i| (p[i] - q[i]).abs()).fold(0.0, f64::max));
    }
    let p = spin_populations(&rho).unwrap();
    Ok(GateCheck { p00: p[0], p11: p[3], contrast: parity_contrast(&rho).unwrap(), oracle_dev: dev, secs: start.elapsed().as_secs_f64() })
}

fn gate_passes(c: &GateCheck) -> bool {
    (c.p00 - 0.5).abs() <= 1e-6 && (c.p11 - 0.5).abs() <= 1e-6 && (c.contrast - 1.0).abs() <= 1e-6 && c.oracle_dev <= 1e-6 && c.secs < 60.0
}

fn gate_detail(c: &GateCheck) -> String {
    format!(
        "P00-0.5 {:.1e}, P11-0.5 {:.1e}, contrast-1 {:.1e}, max |P - oracle| {:.1e} (all ≤ 1e-6), {:.1} s",
        c.p00 - 0.5,
        c.p11 - 0.5,
        c.contrast - 1.0,
        c.oracle_dev,
        c.secs
    )
}

fn gate_exactness(ledger: &mut Ledger) {
    let gate = budget_inputs(&RunConfig::default()).expect("inputs").gate;
    match exact_gate(&gate, 25) {
        Ok(c) => ledger.report("criterion 2 (MS gate exactness, Fock cut 25, n̄ = 6)", gate_passes(&c), gate_detail(&c)),
        Err(e) => ledger.report("criterion 2 (MS gate exactness, Fock cut 25, n̄ = 6)", false, format!("simulation refused: {e}")),
    }
    let fock = default_fock_cut(6.0, gate.max_displacement(gate.detuning));
    let label = format!("criterion 2 supplementary (same checks, Fock cut {fock})");
    match exact_gate(&gate, fock) {
        Ok(c) => ledger.report(&label, gate_passes(&c), gate_detail(&c)),
        Err(e) => ledger.report(&label, false, e),
    }
}

fn error_budget(ledger: &mut Ledger) {
    let start = Instant::now();
    let art = match run_command(Command::Budget, &RunConfig::default()) {
        Ok(a) => a,
        Err(e) => return ledger.report("criterion 3 (error budget)", false, e.to_string()),
    };
    let secs = start.elapsed().as_secs_f64();
    let row = |label: &str| -> f64 {
        let rows = art.summary["rows"].as_array().unwrap();
        rows.iter().find(|r| r["channel"] == Value::from(label)).unwrap()["infidelity"].as_f64().unwrap()
    };
    let detuning = row("Mis-set Detuning");
    let dephasing = row("Motional Dephasing");
    let joint = art.summary["total_joint"].as_f64().unwrap();
    let sum = art.summary["total_sum"].as_f64().unwrap();
    let pass = within(detuning, 1.0e-2, 0.3) && within(dephasing, 2.4e-3, 0.5) && within(joint, 1.3e-2, 0.5) && secs < 600.0;
    ledger.report(
        "criterion 3 (error budget)",
        pass,
        format!(
            "detuning {detuning:.2e} vs 1.0e-2 ± 30% [{}], dephasing {dephasing:.2e} vs 2.4e-3 ± 50% [{}], joint total {joint:.2e} vs 1.3e-2 ± 50% [{}] (channel sum {sum:.2e}), {secs:.0} s",
            ok(within(detuning, 1.0e-2, 0.3)),
            ok(within(dephasing, 2.4e-3, 0.5)),
            ok(within(joint, 1.3e-2, 0.5)),
        ),
    );
    print!("{}", art.text.unwrap_or_default());
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "out"
    }
}

fn motion(nbar: f64, freq_hz: f64) -> ThermalMotion {
    ThermalMotion { nbar, mode_freq: TAU * freq_hz, mass: YB171_MASS_AMU * ATOMIC_MASS_UNIT }
}

fn suppression(ledger: &mut Ledger) {
    let shape = measured_shape(&RunConfig::default()).unwrap();
    let tau = 7e-6;
    let mut p1 = Vec::new();
    for nbar in [5.0, 6.0, 7.0] {
        p1.push(carrier_suppression(&shape, &motion(nbar, 287e3), tau).unwrap().central_p1);
    }
    let in_band = p1.iter().all(|p| within_factor(*p, 0.05, 2.0));
    let ratio_w: Vec<f64> =
        [150e3, 200e3, 287e3, 400e3, 600e3].iter().map(|f| carrier_suppression(&shape, &motion(6.0, *f), tau).unwrap().ratio).collect();
    let ratio_n: Vec<f64> =
        [9.0, 7.0, 6.0, 5.0, 3.0, 1.0].iter().map(|n| carrier_suppression(&shape, &motion(*n, 287e3), tau).unwrap().ratio).collect();
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
    ledger.report(
        "criterion 4 (carrier suppression)",
        in_band && increasing(&ratio_w) && increasing(&ratio_n),
        format!(
            "central P1 at n̄ 5/6/7 = {:.3}/{:.3}/{:.3} (0.025..0.1); ratio vs ω 150..600 kHz {:.2?}; ratio vs n̄ 9..1 {:.2?}",
            p1[0], p1[1], p1[2], ratio_w, ratio_n
        ),
    );
}

fn stark(ledger: &mut Ledger) {
    let art = run_command(Command::Stark, &RunConfig::default()).unwrap();
    let diff = art.summary["differential_hz"].as_f64().unwrap().abs();
    let tweezer = art.summary["tweezer_hz"].as_f64().unwrap();
    let trap = TAU * 287e3;
    let mut worst: f64 = 0.0;
    let mut bound_ok = true;
    for k in 1..=50 {
        let r = 0.5 * k as f64 / 50.0;
        let c = combined_mode_frequency(trap, r * trap).unwrap();
        let err = (c.approx - c.exact).abs();
        let bound = trap * r.powi(4) / 8.0;
        bound_ok &= err <= bound * (1.0 + 1e-9);
        worst = worst.max(err / bound);
    }
    let pass = within_factor(diff, 620.0, 2.0) && within_factor(tweezer, 100e3, 2.0) && bound_ok;
    ledger.report(
        "criterion 5 (Stark/tweezer)",
        pass,
        format!(
            "differential {:.3} kHz vs 0.62 kHz (x{:.2}), tweezer {:.1} kHz vs 100 kHz (x{:.2}), max |approx-exact|/(ω_P r⁴/8) = {worst:.3} for r ≤ 0.5",
            diff / 1e3,
            diff / 620.0,
            tweezer / 1e3,
            tweezer / 100e3
        ),
    );
}

// Equilibrium of the dimensionless chain by Newton's method on the force
// balance u_i − Σ_j sgn(u_i−u_j)/(u_i−u_j)² = 0.
fn oracle_positions(n: usize) -> Vec<f64> {
    let mut u: Vec<f64> = (0..n).map(|i| (i as f64 - 0.5 * (n as f64 - 1.0)) * 1.2).collect();
    for _ in 0..100 {
        let mut g = vec![0.0; n];
        let mut h = vec![vec![0.0; n]; n];
        for i in 0..n {
            g[i] = u[i];
            h[i][i] = 1.0;
            for j in 0..n {
                if i != j {
                    let d = u[i] - u[j];
                    g[i] -= d.signum() / (d * d);
                    let k = 2.0 / d.abs().powi(3);
                    h[i][i] += k;
                    h[i][j] -= k;
                }
            }
        }
        // Gaussian elimination for the Newton step.
        let mut a = h;
        let mut b = g;
        for c in 0..n {
            let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
            a.swap(c, p);
            b.swap(c, p);
            for r in c + 1..n {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            x[r] = (b[r] - (r + 1..n).map(|k| a[r][k] * x[k]).sum::<f64>()) / a[r][r];
        }
        for i in 0..n {
            u[i] -= x[i];
        }
        if x.iter().all(|d| d.abs() < 1e-15) {
            break;
        }
    }
    u
}

// Eigenvalues of the axial Hessian by cyclic Jacobi sweeps, as ω/ω_COM.
fn oracle_ratios(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = 1.0;
        for j in 0..n {
            if i != j {
                let k = 2.0 / (u[i] - u[j]).abs().powi(3);
                a[i][i] += k;
                a[i][j] -= k;
            }
        }
    }
    for _ in 0..60 {
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (2.0 * a[p][q]).atan2(a[q][q] - a[p][p]);
                let (s, c) = theta.sin_cos();
                for k in 0..n {
                    let (kp, kq) = (a[k][p], a[k][q]);
                    a[k][p] = c * kp - s * kq;
                    a[k][q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (a[p][k], a[q][k]);
                    a[p][k] = c * pk - s * qk;
                    a[q][k] = s * pk + c * qk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i].sqrt()).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn chain_mechanics(ledger: &mut Ledger) {
    let art = run_command(Command::Modes, &RunConfig::default()).unwrap();
    let ratio = art.table.rows[1][2].as_f64().unwrap();
    let ratio_err = (ratio - 3f64.sqrt()).abs();
    let mut worst: f64 = 0.0;
    for n in 1..=5 {
        let chain = ChainSpec { n_ions: n, com_freq: TAU * 287e3, mass: YB171_MASS_AMU * ATOMIC_MASS_UNIT, charge: ELEMENTARY_CHARGE };
        let spec = axial_modes(&chain).unwrap();
        let oracle = oracle_ratios(&oracle_positions(n));
        for (f, o) in spec.frequencies.iter().zip(&oracle) {
            worst = worst.max((f / chain.com_freq - o).abs());
        }
    }
    ledger.report(
        "criterion 6 (chain mechanics)",
        ratio_err <= 1e-10 && worst <= 1e-10,
        format!("N = 2 stretch/COM - √3 = {ratio_err:.1e}; N ≤ 5 max |ω/ω_COM - oracle| = {worst:.1e} (≤ 1e-10)"),
    );
}

fn evolution_properties() -> (f64, f64, f64) {
    let mut gate = GateSpec::ideal(TAU * 497e3, 200e-6, 1, [1.0, -1.0]).unwrap();
    gate.carrier_rabi = [TAU * 2e3; 2];
    let noise = NoiseModel { motional_t2: 5e-3, heating_rate: 200.0, rabi_sigma: 0.0, detuning_error: TAU * 300.0, initial_nbar: 0.5 };
    let fock = 40;
    let h = build_ms_hamiltonian(&gate, &noise, fock).unwrap();
    let rho0 = DensityState::thermal_basis(2, 0, fock, 0.5).unwrap();
    let times: Vec<f64> = (0..=20).map(|k| gate.gate_time * k as f64 / 20.0).collect();
    let ev = evolve_with(&h, &noise, &rho0, &times, &EvolveOptions::default()).unwrap();
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for s in &ev.states {
        worst.0 = worst.0.max((s.trace().re - 1.0).abs().max(s.trace().im.abs()));
        worst.1 = worst.1.max(s.hermiticity_error());
        worst.2 = worst.2.min(s.min_eigenvalue());
    }
    worst
}

fn fitter_round_trips() -> f64 {
    let mut worst: f64 = 0.0;
    let rel = |a: f64, b: f64| (a / b - 1.0).abs();

    let truth = ProfileShape::from_peak(TAU * 75.3e3, 0.813e-6, 0.04e-6);
    let samples: Vec<(f64, f64)> = (0..41).map(|i| -1.6e-6 + 3.2e-6 * i as f64 / 40.0).map(|x| (x, truth.value(x))).collect();
    let f = fit_profile(ProfileData::Rabi(&samples)).unwrap();
    worst = worst.max(rel(f.shape.w0, truth.w0)).max(rel(f.shape.omega_w, truth.omega_w));
    worst = worst.max((f.shape.x_center - truth.x_center).abs() / truth.w0);

    let m = motion(6.0, 287e3);
    let xs: Vec<f64> = (0..41).map(|i| -1.2e-6 + 2.4e-6 * i as f64 / 40.0).collect();
    let data = simulate_beam_scan(&RabiProfile::from_shape(truth), &m, 7e-6, &xs, 0, 1).unwrap();
    let s = fit_scan_position(&data, &m).unwrap();
    worst = worst.max(rel(s.w0, truth.w0)).max(rel(s.peak_rabi, truth.peak_rabi()));
    worst = worst.max((s.x_center - truth.x_center).abs() / truth.w0);

    let phases: Vec<f64> = (0..24).map(|k| PI * k as f64 / 12.0).collect();
    let parity: Vec<f64> = phases.iter().map(|p| 0.02 + 0.93 * (2.0 * p + 0.7).sin()).collect();
    let p = fit_parity(&phases, &parity, &vec![0.01; 24]).unwrap();
    worst = worst.max(rel(p.contrast, 0.93)).max((p.phase_offset - 0.7).abs()).max((p.offset - 0.02).abs());

    let t: Vec<f64> = (0..40).map(|i| 150e-3 * i as f64 / 39.0).collect();
    let omega = TAU * 40.0;
    let y: Vec<f64> = t.iter().map(|ti| 0.5 + 0.475 * (-(ti / 0.108f64).powi(2)).exp() * (omega * ti + 0.4).cos()).collect();
    let r = fit_ramsey_t2(&t, &y, &[], &RamseyOptions::default()).unwrap();
    worst.max(rel(r.t2, 0.108)).max(rel(r.frequency, omega))
}

fn cli_outputs_identical() -> Result<bool, String> {
    let dirs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for d in &dirs {
        for format in [Format::Csv, Format::Json] {
            pgate::run(Command::Scan, None, d.path(), Some(42), format).map_err(|e| e.to_json())?;
        }
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    Ok(names.len() == 3
        && names.iter().all(|n| std::fs::read(dirs[0].path().join(n)).unwrap() == std::fs::read(dirs[1].path().join(n)).unwrap()))
}

fn properties(ledger: &mut Ledger) {
    let (trace, herm, min_eig) = evolution_properties();
    let f0 = (0..=200).map(|k| interference_factor(0.0, 2.0 * k as f64 / 200.0).norm()).fold(0.0, f64::max);
    let fits = fitter_round_trips();
    let identical = cli_outputs_identical();
    let pass = trace < 1e-9 && herm < 1e-12 && min_eig > -1e-9 && f0 <= 1e-12 && fits < 1e-6 && identical == Ok(true);
    ledger.report(
        "criterion 7 (property suites)",
        pass,
        format!(
            "noisy evolution |tr-1| {trace:.1e}, Hermiticity {herm:.1e}, min eigenvalue {min_eig:.1e}; max |f(0, β)| on [0, 2] {f0:.1e}; worst fitter round-trip error {fits:.1e}; fixed-seed CLI outputs identical: {identical:?}"
        ),
    );
}

fn main() -> ExitCode {
    let mut ledger = Ledger { failed: 0 };
    profile_shape(&mut ledger);
    gate_exactness(&mut ledger);
    error_budget(&mut ledger);
    suppression(&mut ledger);
    stark(&mut ledger);
    chain_mechanics(&mut ledger);
    properties(&mut ledger);
    if ledger.failed == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} check(s) failed", ledger.failed);
        ExitCode::FAILURE
    }
}
