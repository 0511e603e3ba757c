//! Runs the configured experiments and collects their series and reports.

use cavsim::analysis::{
    fit_cat_cut, fit_exp_cos, fit_exponential, fit_gaussian, fit_proportional, kerr_estimates, predicted_t2,
    t2_decomposition, thermal_dephasing_rate, Measured,
};
use cavsim::dynamics::SystemParams;
use cavsim::hilbert::{guarded_dim, FockSpace, QuantumState};
use cavsim::lossbudget::{assemble_budget, ringdown_conversions, ExternalLoss};
use cavsim::protocols::{
    calibrate_parity_drive, cat_decoherence_experiment, cat_delay_grid, encode_qubit, measure_t1_experiment,
    measure_t2_experiment, prepare_cat, reset_drive_for_decay_time, sideband_rate, simulate_reset_decay,
    spam_error_budget, wigner_cut_experiment, CoherenceSettings, ExperimentResult, ParityMode, SimulatedParity,
};
use cavsim::units::{per_two_pi, two_pi};
use cavsim::C64;
use serde_json::json;

use crate::config::{cut_dim, DeviceConfig, ExperimentConfig, ParityConfig, RunConfig, SidebandConfig};
use crate::error::CliResult;
use crate::output::{format_f64, OutputSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub tolerance_scale: f64,
}

impl ParityConfig {
    pub fn mode(&self) -> ParityMode {
        match *self {
            Self::Ideal => ParityMode::Ideal,
            Self::Simulated { readout_fidelity, noiseless } => {
                let base = if noiseless { SimulatedParity::noiseless() } else { SimulatedParity::default() };
                ParityMode::Simulated(SimulatedParity { readout_fidelity, ..base })
            }
        }
    }
}

/// Writes the series with an optional finite-shot column and returns the
/// values the fit should use.
fn series(
    out: &mut OutputSet,
    name: &str,
    r: &ExperimentResult,
    shots: Option<u64>,
    seed: u64,
) -> CliResult<Vec<f64>> {
    let x = &r.sweep_values;
    match shots {
        Some(n) => {
            let noisy = r.with_shot_noise(n, seed)?;
            let col = format!("{}_shots", r.observable_name);
            out.add_csv(name, &[&r.sweep_name, &r.observable_name, &col], &[x, &r.observable, &noisy.observable])?;
            Ok(noisy.observable)
        }
        None => {
            out.add_csv(name, &[&r.sweep_name, &r.observable_name], &[x, &r.observable])?;
            Ok(r.observable.clone())
        }
    }
}

fn label(v: f64) -> String {
    format!("{v}").replace('.', "p")
}

fn sideband_settings(sb: &SidebandConfig, opts: &RunOptions) -> CoherenceSettings {
    CoherenceSettings { sideband: sb.settings(opts.tolerance_scale), ..Default::default() }
}

/// Evaluates every experiment of `cfg` into `out`. The resolved
/// configuration is written as `config.json`.
pub fn execute(cfg: &RunConfig, opts: &RunOptions, out: &mut OutputSet) -> CliResult<()> {
    out.add_json("config.json", cfg)?;
    let params = cfg.device.params()?;
    for (k, exp) in cfg.experiments.iter().enumerate() {
        let prefix = format!("{k:02}_{}", exp.protocol());
        let seed = opts.seed.wrapping_add(k as u64);
        run_one(cfg, &params, exp, &prefix, seed, opts, out)?;
    }
    Ok(())
}

fn run_one(
    cfg: &RunConfig,
    params: &SystemParams,
    exp: &ExperimentConfig,
    prefix: &str,
    seed: u64,
    opts: &RunOptions,
    out: &mut OutputSet,
) -> CliResult<()> {
    let csv = |s: &str| format!("{prefix}_{s}.csv");
    let js = |s: &str| format!("{prefix}_{s}.json");
    match exp {
        ExperimentConfig::T1 { delays_s, sideband, shots } => {
            let r = measure_t1_experiment(params, &delays_s.values(), &sideband_settings(sideband, opts))?;
            let y = series(out, &csv("series"), &r, *shots, seed)?;
            let fit = fit_exponential(&r.sweep_values, &y)?;
            out.add_json(
                &js("fit"),
                &json!({
                    "protocol": "t1",
                    "t1_s": fit.value("tau"),
                    "t1_sigma_s": fit.sigma("tau"),
                    "encode_fidelity": r.metadata.settings.get("encode_fidelity"),
                    "shots": shots,
                    "seed": shots.map(|_| seed),
                    "fit": fit,
                }),
            )?;
        }
        ExperimentConfig::T2 { delays_s, fringe_detuning_hz, sideband, shots } => {
            let s = CoherenceSettings { fringe_detuning: *fringe_detuning_hz, ..sideband_settings(sideband, opts) };
            let r = measure_t2_experiment(params, &delays_s.values(), &s)?;
            let y = series(out, &csv("series"), &r, *shots, seed)?;
            let fit = if *fringe_detuning_hz == 0.0 {
                fit_exponential(&r.sweep_values, &y)?
            } else {
                fit_exp_cos(&r.sweep_values, &y)?
            };
            let heating = if params.nth_q > 0.0 { params.nth_q / params.t1_q } else { 0.0 };
            out.add_json(
                &js("fit"),
                &json!({
                    "protocol": "t2",
                    "t2_s": fit.value("tau"),
                    "t2_sigma_s": fit.sigma("tau"),
                    "fringe_hz": fit.param("frequency").map(|p| p.value),
                    "lifetime_plus_heating_t2_s": 1.0 / (0.5 / params.t1_c + heating),
                    "shots": shots,
                    "seed": shots.map(|_| seed),
                    "fit": fit,
                }),
            )?;
        }
        ExperimentConfig::CatDecoherence { sizes, points, extrapolate_to, parity } => {
            let mode = parity.mode();
            let mut rates = Vec::with_capacity(sizes.len());
            let mut fits = Vec::new();
            for s in sizes {
                let delays = cat_delay_grid(*s, params.t1_c, *points)?;
                let d = cat_decoherence_experiment(C64::new(s.sqrt() / 2.0, 0.0), params, &delays, &mode)?;
                out.add_csv(
                    &csv(&format!("S{}_series", label(*s))),
                    &["delay_s", "parity", "interference"],
                    &[&d.experiment.sweep_values, &d.experiment.observable, &d.interference],
                )?;
                rates.push(1.0 / d.t_d);
                fits.push(json!({ "size": s, "t_d_s": d.t_d, "fit": d.fit }));
            }
            let law: Vec<f64> = sizes.iter().map(|s| s / (2.0 * params.t1_c)).collect();
            out.add_csv(&csv("rates"), &["size", "inv_t_d_per_s", "linear_law_per_s"], &[sizes, &rates, &law])?;
            let line = fit_proportional(sizes, &rates)?;
            let slope = line.value("slope");
            out.add_json(
                &js("fit"),
                &json!({
                    "protocol": "cat_decoherence",
                    "slope_per_s": slope,
                    "slope_sigma_per_s": line.sigma("slope"),
                    "expected_slope_per_s": 0.5 / params.t1_c,
                    "extrapolate_to": extrapolate_to,
                    "extrapolated_t_d_s": 1.0 / (slope * extrapolate_to),
                    "expected_t_d_s": 2.0 * params.t1_c / extrapolate_to,
                    "sizes": fits,
                }),
            )?;
        }
        ExperimentConfig::WignerCut { size, axis, cavity_dim, parity, shots } => {
            let mode = parity.mode();
            let dim = cavity_dim.unwrap_or_else(|| cut_dim(*size, axis));
            let cat = prepare_cat(C64::new(size.sqrt() / 2.0, 0.0), params, &mode, dim, true)?;
            let r = wigner_cut_experiment(&cat.post_state, params, &axis.values(), &mode)?;
            let y = series(out, &csv("series"), &r, *shots, seed)?;
            let fit = fit_cat_cut(&r.sweep_values, &y)?;
            out.add_json(
                &js("fit"),
                &json!({
                    "protocol": "wigner_cut",
                    "target_size": size,
                    "cavity_dim": dim,
                    "preparation_probability": cat.probability,
                    "size": fit.size,
                    "size_sigma": fit.size_sigma,
                    "fringe_frequency": fit.fit.value("frequency"),
                    "shots": shots,
                    "seed": shots.map(|_| seed),
                    "fit": fit,
                }),
            )?;
        }
        ExperimentConfig::VacuumCalibration { axis, parity } => {
            let mode = parity.mode();
            let y = axis.values();
            let reach = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let space = FockSpace::cavity(guarded_dim(reach * reach).max(4))?;
            let r = wigner_cut_experiment(&QuantumState::basis(&space, &[0])?, params, &y, &mode)?;
            series(out, &csv("series"), &r, None, seed)?;
            let fit = fit_gaussian(&r.sweep_values, &r.observable)?;
            out.add_json(
                &js("fit"),
                &json!({
                    "protocol": "vacuum_calibration",
                    "sigma": fit.value("sigma"),
                    "axis_scale": 0.5 / fit.value("sigma"),
                    "fit": fit,
                }),
            )?;
        }
        ExperimentConfig::ParityCalibration { nbar, detunings_hz, readout_fidelity } => {
            let sim = SimulatedParity { readout_fidelity: *readout_fidelity, ..Default::default() };
            let grid: Vec<f64> = detunings_hz.values().into_iter().map(two_pi).collect();
            let cal = calibrate_parity_drive(params, C64::new(nbar.sqrt(), 0.0), &grid, &sim)?;
            series(out, &csv("series"), &cal.experiment, None, seed)?;
            out.add_json(
                &js("fit"),
                &json!({
                    "protocol": "parity_calibration",
                    "period_hz": cal.period_hz,
                    "chi_over_2pi_hz": per_two_pi(params.chi),
                    "optimal_detuning_hz": per_two_pi(cal.optimal_detuning),
                    "expected_shift_hz": per_two_pi(nbar * params.chi),
                    "fit": cal.fit,
                }),
            )?;
        }
        ExperimentConfig::Encode { a_re, a_im, b_re, b_im, sideband } => {
            let s = sideband.settings(opts.tolerance_scale);
            let (a, b) = (C64::new(*a_re, *a_im), C64::new(*b_re, *b_im));
            let clean = encode_qubit(a, b, params, &s, false)?;
            let noisy = encode_qubit(a, b, params, &s, true)?;
            out.add_json(
                &js("report"),
                &json!({
                    "protocol": "encode",
                    "sideband_rate_over_2pi_hz": per_two_pi(sideband_rate(s.xi, params)?),
                    "swap_time_s": s.swap_time(params)?,
                    "pulse_length_s": s.pulse_length(params)?,
                    "noiseless_fidelity": clean.fidelity,
                    "fidelity": noisy.fidelity,
                }),
            )?;
        }
        ExperimentConfig::Reset { decay_time_s, times_s } => {
            let rates = reset_drive_for_decay_time(*decay_time_s, params)?;
            let t = times_s.values();
            let r = simulate_reset_decay(params, rates.xi_cr, &t)?;
            let law: Vec<f64> = t.iter().map(|x| (-x / rates.decay_time).exp()).collect();
            out.add_csv(&csv("series"), &["time_s", "n_cavity", "exponential"], &[&t, &r.observable, &law])?;
            out.add_json(
                &js("report"),
                &json!({
                    "protocol": "reset",
                    "xi_cr": rates.xi_cr,
                    "omega_cr_over_2pi_hz": per_two_pi(rates.omega_cr),
                    "kappa_driven_per_s": rates.kappa_driven,
                    "decay_time_s": rates.decay_time,
                }),
            )?;
        }
        ExperimentConfig::Spam { nbars, readout_fidelity, configs } => {
            let mut rows = Vec::new();
            let mut entries = Vec::new();
            for n in nbars {
                for e in spam_error_budget(C64::new(n.sqrt(), 0.0), params, *readout_fidelity, configs)? {
                    rows.push(vec![
                        format_f64(e.mean_photons),
                        e.config.name().to_string(),
                        format_f64(e.visibility),
                        format_f64(e.loss),
                    ]);
                    entries.push(e);
                }
            }
            out.add_table(&csv("table"), &["mean_photons", "config", "visibility", "loss"], &rows)?;
            out.add_json(&js("report"), &json!({ "protocol": "spam", "entries": entries }))?;
        }
        ExperimentConfig::LossBudget => budget_outputs(cfg, prefix, out)?,
        ExperimentConfig::Ringdown { tau_loaded_s, q_ext, tau_ext_s } => {
            let ext = match (q_ext, tau_ext_s) {
                (Some(q), _) => ExternalLoss::QualityFactor(*q),
                (None, Some(t)) => ExternalLoss::DecayTime(*t),
                (None, None) => ExternalLoss::None,
            };
            let r = ringdown_conversions(params.omega_c, *tau_loaded_s, ext)?;
            out.add_json(&js("report"), &json!({ "protocol": "ringdown", "external": ext, "ringdown": r }))?;
        }
        ExperimentConfig::Cooldowns { rows } => {
            let mut table = Vec::new();
            let mut report = Vec::new();
            for r in rows {
                let (chi, gamma) = (two_pi(r.chi_over_2pi_hz), two_pi(r.gamma_down_over_2pi_hz));
                let t2 = predicted_t2(r.t1_c_s, chi, gamma, r.nth_q)?;
                let dephasing = thermal_dephasing_rate(chi, gamma, r.nth_q)?;
                let ratio = t2 / r.measured_t2_s;
                table.push(vec![
                    r.name.clone(),
                    format_f64(t2),
                    format_f64(r.measured_t2_s),
                    format_f64(ratio),
                ]);
                report.push(json!({
                    "name": r.name,
                    "thermal_dephasing_per_s": dephasing,
                    "predicted_t2_s": t2,
                    "measured_t2_s": r.measured_t2_s,
                    "predicted_over_measured": ratio,
                }));
            }
            out.add_table(&csv("table"), &["cooldown", "predicted_t2_s", "measured_t2_s", "ratio"], &table)?;
            out.add_json(&js("report"), &json!({ "protocol": "cooldowns", "rows": report }))?;
        }
        ExperimentConfig::DephasingBudget { t1_c_s, t1_c_sigma_s, t2_c_s, t2_c_sigma_s, t_up_s, t_up_sigma_s } => {
            let b = t2_decomposition(
                Measured::new(*t1_c_s, *t1_c_sigma_s),
                Measured::new(*t2_c_s, *t2_c_sigma_s),
                Measured::new(*t_up_s, *t_up_sigma_s),
            )?;
            out.add_json(&js("report"), &json!({ "protocol": "dephasing_budget", "budget": b }))?;
        }
        ExperimentConfig::Kerr { nbar } => {
            let k = kerr_estimates(params, *nbar)?;
            out.add_json(
                &js("report"),
                &json!({
                    "protocol": "kerr",
                    "nbar": nbar,
                    "k_c_estimate_over_2pi_hz": per_two_pi(k.k_c),
                    "k_c_device_over_2pi_hz": per_two_pi(params.k_c),
                    "n_crit": k.n_crit,
                    "t_g_min_s": k.t_g_min,
                    "t_col_s": k.t_col,
                }),
            )?;
        }
        ExperimentConfig::DeviceSummary => {
            let s = SidebandConfig::default().settings(opts.tolerance_scale);
            let k = kerr_estimates(params, 0.0)?;
            let gamma_down = 1.0 / params.t1_q;
            out.add_json(
                &js("report"),
                &json!({
                    "protocol": "device_summary",
                    "device": DeviceConfig::from_params(params),
                    "sideband_xi": s.xi,
                    "sideband_rate_over_2pi_hz": per_two_pi(sideband_rate(s.xi, params)?),
                    "swap_time_s": s.swap_time(params)?,
                    "transmon_heating_time_s": params.t1_q / params.nth_q,
                    "thermal_dephasing_per_s": thermal_dephasing_rate(params.chi, gamma_down, params.nth_q)?,
                    "predicted_t2_c_s": predicted_t2(params.t1_c, params.chi, gamma_down, params.nth_q)?,
                    "n_crit": k.n_crit,
                    "t_g_min_s": k.t_g_min,
                    "k_c_estimate_over_2pi_hz": per_two_pi(k.k_c),
                }),
            )?;
        }
    }
    Ok(())
}

/// Loss budget table and report for the `loss` block of `cfg`.
pub fn budget_outputs(cfg: &RunConfig, prefix: &str, out: &mut OutputSet) -> CliResult<()> {
    let b = assemble_budget(
        &cfg.loss.geometry.geometry()?,
        &cfg.loss.material.material()?,
        &cfg.loss.purcell.inputs(),
    )?;
    let rows: Vec<Vec<String>> = b
        .channels
        .iter()
        .map(|c| vec![c.name.clone(), format_f64(c.kappa_over_2pi_hz), format_f64(c.lifetime_s), c.mitigation.clone()])
        .collect();
    out.add_table(
        &format!("{prefix}_table.csv"),
        &["channel", "kappa_over_2pi_hz", "lifetime_s", "mitigation"],
        &rows,
    )?;
    out.add_json(&format!("{prefix}_report.json"), &b)
}
