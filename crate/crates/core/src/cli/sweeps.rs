use super::config::SweepConfig;
use super::output::{SteadyRow, SweepTable, TransientRow, WaveguideRow};
use super::CliError;
use crate::analytic::{resonator_steady, resonator_transient, waveguide_outputs, AnalyticError};
use crate::model::{classify_phase, SystemParams, WaveguideParams, WaveguidePort, DEFAULT_EP_WINDOW};

pub(crate) const DEFAULT_GAMMA: &[f64] = &[1.0];
pub(crate) const DEFAULT_KAPPA: &[f64] = &[0.5];
pub(crate) const DEFAULT_COUPLING: &[f64] = &[1.0];
pub(crate) const DEFAULT_FLUX: &[f64] = &[1.0];
pub(crate) const DEFAULT_N_TH: &[f64] = &[0.0];
pub(crate) const DEFAULT_GAIN: &[f64] = &[1.0];

/// Resonator parameters from grid values in units of the config.
#[allow(clippy::too_many_arguments)]
pub(crate) fn resonator_params(
    config: &SweepConfig,
    gamma: f64,
    gamma_g: f64,
    kappa: f64,
    coupling: f64,
    n_th: f64,
    flux: f64,
) -> SystemParams {
    let u = config.unit_scale;
    SystemParams {
        thermal_input_ports: config.grid.thermal_input_ports,
        ..SystemParams::balanced(gamma * u, gamma_g * u, kappa * u, coupling * u, n_th, flux)
    }
}

pub(crate) fn waveguide_params(config: &SweepConfig, gamma: f64, gamma_g: f64, coupling: f64, l: f64, n_th: f64) -> WaveguideParams {
    let u = config.unit_scale;
    WaveguideParams {
        gamma: gamma * u,
        gamma_g: gamma_g * u,
        coupling: coupling * u,
        length: l / u,
        n_th,
        input: WaveguidePort::A,
    }
}

pub(crate) fn precondition(e: AnalyticError) -> CliError {
    CliError::Precondition(e.to_string())
}

/// Transient intensities of the PT-symmetric resonators. Rows are grouped
/// by (γ, κ, J, I_in) in grid order with `t` innermost.
pub fn run_transient_sweep(config: &SweepConfig) -> Result<SweepTable, CliError> {
    let g = &config.grid;
    let ts = config.axis(&g.t, &super::presets::DEFAULT_TIMES.values());
    let n_th = config.axis(&g.n_th, DEFAULT_N_TH);
    let mut rows = Vec::new();
    for &gamma in &config.axis(&g.gamma, DEFAULT_GAMMA) {
        let gains = g.gamma_g.as_ref().map_or_else(|| vec![2.0 * gamma], |a| a.values());
        for &kappa in &config.axis(&g.kappa, DEFAULT_KAPPA) {
            for &coupling in &config.axis(&g.coupling, DEFAULT_COUPLING) {
                for &flux in &config.axis(&g.input_flux, DEFAULT_FLUX) {
                    for &gamma_g in &gains {
                        for &n in &n_th {
                            let p = resonator_params(config, gamma, gamma_g, kappa, coupling, n, flux);
                            let phase = classify_phase(&p, DEFAULT_EP_WINDOW).phase.as_str();
                            for &t in &ts {
                                let r = resonator_transient(&p, t / config.unit_scale).map_err(precondition)?;
                                rows.push(TransientRow {
                                    gamma,
                                    kappa,
                                    coupling,
                                    input_flux: flux,
                                    t: r.t,
                                    i0_lr: r.i0_lr,
                                    i0_rl: r.i0_rl,
                                    in_lr: r.in_lr,
                                    in_rl: r.in_rl,
                                    delta_i: r.delta_i,
                                    i0_ll: r.i0_ll,
                                    i0_rr: r.i0_rr,
                                    in_ll: r.in_ll,
                                    in_rr: r.in_rr,
                                    phase,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(SweepTable::Transient(rows))
}

/// Steady-state intensities; unstable points are kept as rows with empty
/// intensity fields. `J` varies fastest.
pub fn run_steady_sweep(config: &SweepConfig) -> Result<SweepTable, CliError> {
    let g = &config.grid;
    let mut rows = Vec::new();
    for &gamma in &config.axis(&g.gamma, DEFAULT_GAMMA) {
        for &gamma_g in &config.axis(&g.gamma_g, DEFAULT_GAIN) {
            for &kappa in &config.axis(&g.kappa, DEFAULT_KAPPA) {
                for &n in &config.axis(&g.n_th, DEFAULT_N_TH) {
                    for &flux in &config.axis(&g.input_flux, DEFAULT_FLUX) {
                        for &coupling in &config.axis(&g.coupling, DEFAULT_COUPLING) {
                            let p = resonator_params(config, gamma, gamma_g, kappa, coupling, n, flux);
                            let mut row = SteadyRow {
                                coupling,
                                gamma,
                                gamma_g,
                                kappa,
                                n_th: n,
                                input_flux: flux,
                                i0: None,
                                in_lr: None,
                                in_rl: None,
                                delta_i: None,
                                rel_nonrec: None,
                                stable: "unstable",
                            };
                            match resonator_steady(&p) {
                                Ok(r) => {
                                    row.i0 = Some(r.i0);
                                    row.in_lr = Some(r.in_lr);
                                    row.in_rl = Some(r.in_rl);
                                    row.delta_i = Some(r.delta_i);
                                    row.rel_nonrec = r.relative_nonreciprocity.value();
                                    row.stable = "stable";
                                }
                                Err(AnalyticError::NotSteady { .. }) => {}
                                Err(e) => return Err(precondition(e)),
                            }
                            rows.push(row);
                        }
                    }
                }
            }
        }
    }
    Ok(SweepTable::Steady(rows))
}

/// Waveguide outputs against length, grouped by (γ, J) with `l` innermost.
pub fn run_waveguide_sweep(config: &SweepConfig) -> Result<SweepTable, CliError> {
    let g = &config.grid;
    let ls = config.axis(&g.l, &super::presets::DEFAULT_LENGTHS.values());
    let n_th = config.axis(&g.n_th, DEFAULT_N_TH);
    let mut rows = Vec::new();
    for &gamma in &config.axis(&g.gamma, DEFAULT_GAMMA) {
        let gains = g.gamma_g.as_ref().map_or_else(|| vec![2.0 * gamma], |a| a.values());
        for &coupling in &config.axis(&g.coupling, DEFAULT_COUPLING) {
            for &gamma_g in &gains {
                for &n in &n_th {
                    for &l in &ls {
                        let p = waveguide_params(config, gamma, gamma_g, coupling, l, n);
                        let r = waveguide_outputs(&p).map_err(precondition)?;
                        rows.push(WaveguideRow {
                            gamma,
                            coupling,
                            jl: p.coupling * p.length,
                            i0_ab: r.i0_ab,
                            i0_aa: r.i0_aa,
                            i0_bb: r.i0_bb,
                            in_a: r.in_a,
                            in_b: r.in_b,
                            delta_i: r.delta_i,
                            delta_i_r0: r.delta_i_r0,
                            delta_i_r: r.delta_i_r,
                            phase: classify_phase(&p, DEFAULT_EP_WINDOW).phase.as_str(),
                        });
                    }
                }
            }
        }
    }
    Ok(SweepTable::Waveguide(rows))
}
