use std::f64::consts::{PI, TAU};

use pgate_core::calibration::{
    carrier_suppression, fit_parity, fit_scan_position, scan_excitation, simulate_beam_scan, spam_apply, spam_correct,
    SpamMatrix, ThermalMotion,
};
use pgate_core::dynamics::{
    build_ms_hamiltonian, default_fock_cut, evolve_with, observables, parity_contrast, spin_populations, DensityState,
    EvolveOptions, GateSpec, NoiseModel,
};
use pgate_core::errorbudget::{full_budget, BudgetInputs};
use pgate_core::focalfield::{
    fit_profile, rabi_profile, FieldSource, FocusParams, ProfileData, ProfileFit, ProfileShape, RabiProfile, RabiScale,
    WaistConvention,
};
use pgate_core::ionchain::axial_modes;
use pgate_core::modulation::tone_plan;
use pgate_core::stark::{shift_map, shift_report, AtomicLineData};
use serde_json::{json, Value};

use crate::config::{grid, FieldModel, LineModel, RunConfig};
use crate::error::CliError;
use crate::output::{num, Artifacts, Table};

type Result<T> = std::result::Result<T, CliError>;

fn hz(w: f64) -> f64 {
    w / TAU
}

fn focus(cfg: &RunConfig) -> Result<FocusParams> {
    let o = &cfg.optics;
    let mut f = FocusParams::new(o.na, cfg.wavelength(), o.power_mw * 1e-3)?;
    if let Some(w) = o.waist_um {
        f = f.with_waist(w * 1e-6, WaistConvention::FieldOneOverE)?;
    }
    Ok(f)
}

/// Field-model Rabi profile over the profile window, with its fit.
fn modelled_profile(cfg: &RunConfig) -> Result<(RabiProfile, ProfileFit)> {
    let source = match cfg.optics.field_model {
        FieldModel::RichardsWolf => FieldSource::RichardsWolf,
        FieldModel::Paraxial => FieldSource::Paraxial,
    };
    let xs = grid(0.5 * cfg.profile.span_um * 1e-6, cfg.profile.points);
    let profile = rabi_profile(&focus(cfg)?, &xs, source, RabiScale::PeakRabi(TAU * cfg.optics.peak_rabi_hz))?;
    let fit = fit_profile(ProfileData::Rabi(&profile.samples))?;
    Ok((profile, fit))
}

/// Measured profile: configured peak and waist, centered on the beam axis.
/// Without a configured waist the field-model fit supplies it.
pub fn measured_shape(cfg: &RunConfig) -> Result<ProfileShape> {
    let w0 = match cfg.optics.waist_um {
        Some(w) => w * 1e-6,
        None => modelled_profile(cfg)?.1.shape.w0,
    };
    Ok(ProfileShape::from_peak(TAU * cfg.optics.peak_rabi_hz, w0, 0.0))
}

pub fn noise_model(cfg: &RunConfig) -> NoiseModel {
    let n = &cfg.noise;
    NoiseModel {
        motional_t2: n.t2_ms.map_or(f64::INFINITY, |t| t * 1e-3),
        heating_rate: n.heating_qps,
        rabi_sigma: n.rabi_sigma,
        detuning_error: TAU * n.detuning_err_hz,
        initial_nbar: n.nbar,
    }
}

pub fn budget_inputs(cfg: &RunConfig) -> Result<BudgetInputs> {
    let spectrum = axial_modes(&cfg.chain())?;
    let shape = measured_shape(cfg)?;
    let g = &cfg.gate;
    let offset = g.alignment_offset_nm * 1e-9;
    let mut inputs = BudgetInputs::from_profile(
        &shape,
        &spectrum,
        (g.ion_pair[0], g.ion_pair[1]),
        g.mode,
        [offset; 2],
        cfg.gate_time(),
        g.loops,
        noise_model(cfg),
        cfg.noise.carrier_ratio,
        cfg.noise.thermal_scale,
    )?;
    inputs.fock = g.fock_cut;
    Ok(inputs)
}

/// Gate with every deterministic error term switched on. Quasi-static Rabi
/// noise has no single-trajectory meaning and is left to the budget.
fn noisy_gate(cfg: &RunConfig) -> Result<(GateSpec, NoiseModel, usize)> {
    let inputs = budget_inputs(cfg)?;
    let gate = GateSpec {
        carrier_rabi: [inputs.carrier_ratio * inputs.peak_rabi; 2],
        cubic_rabi: inputs.cubic_rabi.map(|c| c * inputs.thermal_scale),
        ..inputs.gate
    };
    let noise = NoiseModel { rabi_sigma: 0.0, ..inputs.noise };
    let fock = cfg.gate.fock_cut.unwrap_or_else(|| {
        let alpha = gate.max_displacement(gate.detuning + noise.detuning_error) * 1.2;
        default_fock_cut(noise.initial_nbar, alpha)
    });
    Ok((gate, noise, fock))
}

/// Evolve from |00⟩ ⊗ thermal through `times`, one segment at a time so only
/// the current state is held.
fn trajectory(gate: &GateSpec, noise: &NoiseModel, fock: usize, times: &[f64]) -> Result<Vec<DensityState>> {
    let h = build_ms_hamiltonian(gate, noise, fock)?;
    let opts = EvolveOptions::default();
    let mut rho = DensityState::thermal_basis(2, 0, fock, noise.initial_nbar)?;
    let mut out = vec![rho.clone()];
    for w in times.windows(2) {
        let mut ev = evolve_with(&h, noise, &rho, w, &opts)?;
        rho = ev.states.pop().expect("two output states");
        out.push(rho.clone());
    }
    Ok(out)
}

fn bell_fidelity(rho: &DensityState) -> Result<f64> {
    let p = spin_populations(rho)?;
    Ok(0.5 * (p[0] + p[3] + parity_contrast(rho)?))
}

pub fn profile(cfg: &RunConfig) -> Result<Artifacts> {
    let (profile, fit) = modelled_profile(cfg)?;
    let mut table = Table::new(&["x_m", "rabi_rad_s", "fit_rad_s"]);
    for &(x, w) in &profile.samples {
        table.push(vec![num(x), num(w), num(fit.shape.value(x))]);
    }
    let sigma = fit.sigma();
    let summary = json!({
        "field_model": cfg.optics.field_model,
        "fit": {
            "peak_rabi_hz": num(hz(fit.shape.peak_rabi())),
            "omega_w_rad_s": num(fit.shape.omega_w),
            "omega_w_sigma_rad_s": num(sigma[0]),
            "w0_m": num(fit.shape.w0),
            "w0_sigma_m": num(sigma[1]),
            "x_center_m": num(fit.shape.x_center),
            "x_center_sigma_m": num(sigma[2]),
            "residual_rms_rad_s": num(fit.residual_rms),
            "normalized_residual": num(fit.normalized_residual),
        },
        "pupil_paraxial_waist_m": num(FocusParams::new(cfg.optics.na, cfg.wavelength(), cfg.optics.power_mw * 1e-3)?.paraxial_waist()?),
    });
    Ok(Artifacts { name: "profile", table, summary, text: None })
}

pub fn modes(cfg: &RunConfig) -> Result<Artifacts> {
    let spec = axial_modes(&cfg.chain())?;
    let n = spec.n_modes();
    let mut columns = vec!["mode".to_string(), "freq_hz".into(), "ratio_to_com".into(), "zero_point_m".into()];
    columns.extend((0..spec.vectors.len()).map(|i| format!("b_ion{i}")));
    let mut table = Table::new(&columns);
    for m in 0..n {
        let mut row = vec![json!(m), num(hz(spec.frequencies[m])), num(spec.frequencies[m] / spec.frequencies[0]), num(spec.zero_point[m])];
        row.extend(spec.vectors.iter().map(|v| num(v[m])));
        table.push(row);
    }
    let summary = json!({
        "n_ions": cfg.trap.n_ions,
        "com_freq_hz": num(hz(spec.frequencies[0])),
        "highest_freq_hz": num(hz(spec.frequencies[n - 1])),
    });
    Ok(Artifacts { name: "modes", table, summary, text: None })
}

pub fn gate(cfg: &RunConfig) -> Result<Artifacts> {
    let (g, noise, fock) = noisy_gate(cfg)?;
    let times = grid(0.5 * g.gate_time, cfg.gate.trajectory_points).into_iter().map(|t| t + 0.5 * g.gate_time).collect::<Vec<_>>();
    let states = trajectory(&g, &noise, fock, &times)?;
    let mut table = Table::new(&["t_s", "P00", "P01", "P10", "P11", "parity", "bell_fidelity"]);
    let (mut best_t, mut best_f) = (0.0, f64::NEG_INFINITY);
    for (t, rho) in times.iter().zip(&states) {
        let p = spin_populations(rho)?;
        let f = bell_fidelity(rho)?;
        if f > best_f {
            (best_t, best_f) = (*t, f);
        }
        table.push(vec![num(*t), num(p[0]), num(p[1]), num(p[2]), num(p[3]), num(p[0] + p[3] - p[1] - p[2]), num(f)]);
    }
    let last = states.last().expect("non-empty trajectory");
    let p = spin_populations(last)?;
    let summary = json!({
        "gate_time_s": num(g.gate_time),
        "detuning_hz": num(hz(g.detuning)),
        "mode_freq_hz": num(hz(g.mode_freq)),
        "sideband_rabi_hz": [num(hz(g.sideband_rabi[0])), num(hz(g.sideband_rabi[1]))],
        "carrier_rabi_hz": [num(hz(g.carrier_rabi[0])), num(hz(g.carrier_rabi[1]))],
        "fock_cut": fock,
        "final": {
            "P00": num(p[0]), "P01": num(p[1]), "P10": num(p[2]), "P11": num(p[3]),
            "parity_contrast": num(parity_contrast(last)?),
            "bell_fidelity": num(bell_fidelity(last)?),
        },
        "max_fidelity": num(best_f),
        "max_fidelity_time_s": num(best_t),
    });
    Ok(Artifacts { name: "gate", table, summary, text: None })
}

pub fn parity(cfg: &RunConfig) -> Result<Artifacts> {
    let (g, noise, fock) = noisy_gate(cfg)?;
    let states = trajectory(&g, &noise, fock, &[0.0, g.gate_time])?;
    let rho = &states[1];
    let spam = SpamMatrix::from_fidelities(&cfg.spam.fidelity)?;
    let n = cfg.parity.points;
    let phases: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
    let mut table = Table::new(&["phase_rad", "P00", "P01", "P10", "P11", "parity", "raw_parity", "corrected_parity"]);
    let mut parities = Vec::with_capacity(n);
    let mut raw_parities = Vec::with_capacity(n);
    let par = |p: &[f64]| p[0] + p[3] - p[1] - p[2];
    for &phi in &phases {
        let o = observables(rho, phi)?;
        let truth = [o.p00, o.p01, o.p10, o.p11];
        let raw = spam_apply(&truth, &spam)?;
        let corrected = spam_correct(&raw, &spam)?.clipped;
        parities.push(o.parity);
        raw_parities.push(par(&raw));
        table.push(vec![num(phi), num(o.p00), num(o.p01), num(o.p10), num(o.p11), num(o.parity), num(par(&raw)), num(par(&corrected))]);
    }
    let errors = vec![1e-3; n];
    let fit = fit_parity(&phases, &parities, &errors)?;
    let raw_fit = fit_parity(&phases, &raw_parities, &errors)?;
    let p = spin_populations(rho)?;
    let raw_p = spam_apply(&p, &spam)?;
    let fidelity = 0.5 * (p[0] + p[3] + fit.contrast);
    let raw_fidelity = 0.5 * (raw_p[0] + raw_p[3] + raw_fit.contrast);
    let summary = json!({
        "gate_time_s": num(g.gate_time),
        "fock_cut": fock,
        "populations": { "P00": num(p[0]), "P01": num(p[1]), "P10": num(p[2]), "P11": num(p[3]) },
        "contrast": num(fit.contrast),
        "contrast_sigma": num(fit.contrast_sigma),
        "phase_offset_rad": num(fit.phase_offset),
        "bell_fidelity": num(fidelity),
        "raw_contrast": num(raw_fit.contrast),
        "raw_bell_fidelity": num(raw_fidelity),
        "spam_fidelity": cfg.spam.fidelity,
    });
    Ok(Artifacts { name: "parity", table, summary, text: None })
}

pub fn budget(cfg: &RunConfig) -> Result<Artifacts> {
    let inputs = budget_inputs(cfg)?;
    let report = full_budget(&inputs, cfg.seed)?;
    let mut table = Table::new(&["channel", "magnitude", "unit", "infidelity", "stderr", "method", "shots"]);
    let mut rows = Vec::new();
    for r in &report.rows {
        table.push(vec![
            json!(r.channel.label()),
            num(r.magnitude),
            json!(r.channel.unit()),
            num(r.result.infidelity),
            num(r.result.stderr),
            json!(r.result.method.as_str()),
            json!(r.result.shots),
        ]);
        rows.push(json!({
            "channel": r.channel.label(),
            "magnitude": num(r.magnitude),
            "unit": r.channel.unit(),
            "infidelity": num(r.result.infidelity),
            "stderr": num(r.result.stderr),
            "method": r.result.method.as_str(),
        }));
    }
    let summary = json!({
        "rows": rows,
        "total_sum": num(report.channel_sum),
        "total_joint": num(report.joint_total),
        "discrepancy": num(report.discrepancy),
        "numerical_floor": num(report.numerical_floor),
        "fock_cut": report.fock,
        "peak_rabi_hz": num(hz(inputs.peak_rabi)),
    });
    Ok(Artifacts { name: "budget", table, summary, text: Some(report.to_table()) })
}

pub fn stark(cfg: &RunConfig) -> Result<Artifacts> {
    let s = &cfg.stark;
    let focus = FocusParams::new(s.na, cfg.wavelength(), s.power_mw * 1e-3)?;
    let lines = match s.lines {
        LineModel::Doublet => AtomicLineData::yb171_doublet(cfg.wavelength()),
        LineModel::TwoLevel => AtomicLineData::yb171_two_level(cfg.wavelength()),
    };
    let xs = grid(0.5 * s.span_um * 1e-6, s.points);
    let map = shift_map(&focus, &lines, &xs)?;
    let mut table = Table::new(&["x_m", "level0_hz", "level1_hz", "differential_hz"]);
    for p in &map {
        table.push(vec![num(p.x), num(hz(p.level0)), num(hz(p.level1)), num(hz(p.differential))]);
    }
    let r = shift_report(&focus, &lines, cfg.mass(), TAU * cfg.trap.com_freq_hz)?;
    let summary = json!({
        "lines": s.lines,
        "peak_intensity_w_m2": num(r.peak_intensity),
        "ground_shift_hz": num(hz(r.ground_shift)),
        "differential_hz": num(hz(r.differential.exact)),
        "differential_approx_hz": num(hz(r.differential.approx)),
        "approximation_warning": r.differential.approximation_warning,
        "tweezer_waist_m": num(r.tweezer_waist),
        "tweezer_hz": num(hz(r.tweezer)),
        "combined_hz": num(hz(r.combined.exact)),
        "combined_approx_hz": num(hz(r.combined.approx)),
    });
    Ok(Artifacts { name: "stark", table, summary, text: None })
}

pub fn scan(cfg: &RunConfig) -> Result<Artifacts> {
    let s = &cfg.scan;
    let measured = measured_shape(cfg)?;
    let truth = ProfileShape { x_center: s.alignment_offset_nm * 1e-9, ..measured };
    let motion = ThermalMotion { nbar: cfg.noise.nbar, mode_freq: TAU * cfg.trap.com_freq_hz, mass: cfg.mass() };
    let tau = s.pulse_time_us * 1e-6;
    let xs = grid(0.5 * s.span_um * 1e-6, s.points);
    let data = simulate_beam_scan(&RabiProfile::from_shape(truth), &motion, tau, &xs, s.shots, cfg.seed)?;
    let fit = fit_scan_position(&data, &motion)?;
    let fitted = RabiProfile::from_shape(fit.shape);
    let mut table = Table::new(&["x_m", "p1", "shots", "fit_p1"]);
    for p in &data.points {
        table.push(vec![num(p.position), num(p.p1), json!(p.shots), num(scan_excitation(&fitted, &motion, tau, p.position)?)]);
    }
    let supp = carrier_suppression(&truth, &motion, tau)?;
    let summary = json!({
        "fit": {
            "x_center_m": num(fit.x_center),
            "x_center_sigma_m": num(fit.x_center_sigma),
            "peak_rabi_hz": num(hz(fit.peak_rabi)),
            "peak_rabi_sigma_hz": num(hz(fit.peak_rabi_sigma)),
            "w0_m": num(fit.w0),
            "w0_sigma_m": num(fit.w0_sigma),
            "chi2": num(fit.chi2),
            "dof": fit.dof,
        },
        "true_x_center_m": num(truth.x_center),
        "carrier_suppression": {
            "ratio": num(supp.ratio),
            "central_p1": num(supp.central_p1),
            "effective_rate_hz": num(hz(supp.effective_rate)),
        },
    });
    Ok(Artifacts { name: "scan", table, summary, text: None })
}

pub fn tones(cfg: &RunConfig) -> Result<Artifacts> {
    let inputs = budget_inputs(cfg)?;
    let t = &cfg.tones;
    let mut request = inputs.gate.tone_request(t.sideband_amplitude, t.balance, t.resolution_hz);
    request.carrier_amplitude = t.carrier_amplitude;
    let plan = tone_plan(&request)?;
    let mut table = Table::new(&["label", "aom2_offset_hz", "amplitude", "phase_rad"]);
    for tone in &plan.tones {
        table.push(vec![json!(tone.label.as_str()), num(tone.aom2_offset), num(tone.amplitude), num(tone.phase)]);
    }
    let collisions: Vec<Value> = plan
        .collisions
        .iter()
        .map(|c| json!({ "first": c.first.as_str(), "second": c.second.as_str(), "separation_hz": num(c.separation) }))
        .collect();
    let summary = json!({
        "mode_freq_hz": num(hz(inputs.gate.mode_freq)),
        "gate_detuning_hz": num(hz(inputs.gate.detuning)),
        "collisions": collisions,
    });
    Ok(Artifacts { name: "tones", table, summary, text: None })
}
