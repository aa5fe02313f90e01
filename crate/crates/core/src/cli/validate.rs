use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{SweepConfig, SystemKind};
use super::output::format_float;
use super::sweeps::{precondition, resonator_params, waveguide_params};
use super::CliError;
use crate::analytic::{resonator_steady, resonator_transient, waveguide_outputs, AnalyticError};
use crate::model::{
    build_resonator_network, build_waveguide_network, InputSide, LinearNetwork, WaveguidePort,
};
use crate::oracle::{
    commutator_residual, monte_carlo_intensity, propagate_to, steady_state_moments, MomentState,
    OracleError, PropagationOptions,
};

const VALIDATE_TRANSIENT_GAMMA: &[f64] = &[0.5, 1.5, 2.000002, 3.0];
const VALIDATE_TRANSIENT_KAPPA: &[f64] = &[0.2];
const VALIDATE_TIMES: &[f64] = &[0.7, 3.0, 6.0];
const VALIDATE_STEADY_GAMMA: &[f64] = &[1.0];
const VALIDATE_STEADY_GAIN: &[f64] = &[0.0, 1.0, 1.5];
const VALIDATE_STEADY_COUPLING: &[f64] = &[1.0, 3.0];
const VALIDATE_STEADY_N_TH: &[f64] = &[0.0, 0.1];
const VALIDATE_WAVEGUIDE_GAMMA: &[f64] = &[1.0, 2.000002, 3.0];
const VALIDATE_LENGTHS: &[f64] = &[0.5, 2.0, 5.0];

/// Step sizes of the integrator-order measurement.
const ORDER_STEPS: [f64; 3] = [0.2, 0.1, 0.05];
const ORDER_TARGET: f64 = 4.0;
const ORDER_TOLERANCE: f64 = 0.3;

/// Closed form against an oracle at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRecord {
    pub check: &'static str,
    pub point: String,
    pub quantity: &'static str,
    pub closed_form: f64,
    pub ode: Option<f64>,
    pub mc_mean: Option<f64>,
    pub mc_std_error: Option<f64>,
    /// Relative error for ODE checks, |MC − ODE|/σ for Monte Carlo checks.
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorRecord {
    pub network: String,
    pub corrupted: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegratorOrder {
    pub network: String,
    pub dt: Vec<f64>,
    pub errors: Vec<f64>,
    pub exponent: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationSettingsEcho {
    pub seed: u64,
    pub dt: f64,
    pub n_traj: u64,
    pub mc_dt: f64,
    pub mc_horizon: f64,
    pub ode_tolerance: f64,
    pub mc_sigma: f64,
    pub negative_control: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub settings: ValidationSettingsEcho,
    pub records: Vec<ValidationRecord>,
    pub commutator: Vec<CommutatorRecord>,
    pub integrator_order: Vec<IntegratorOrder>,
    pub summary: Summary,
}

fn label(parts: &[(&str, f64)]) -> String {
    parts
        .iter()
        .map(|(k, v)| format!("{k}={}", format_float(*v)))
        .collect::<Vec<_>>()
        .join(",")
}

fn ode_record(
    config: &SweepConfig,
    check: &'static str,
    point: &str,
    quantity: &'static str,
    closed_form: f64,
    ode: Result<f64, &OracleError>,
) -> ValidationRecord {
    let tolerance = config.validation.ode_tolerance;
    match ode {
        Ok(ode) => {
            let error = (closed_form - ode).abs() / ode.abs().max(1e-2);
            ValidationRecord {
                check,
                point: point.to_string(),
                quantity,
                closed_form,
                ode: Some(ode),
                mc_mean: None,
                mc_std_error: None,
                error,
                tolerance,
                pass: error <= tolerance,
                note: None,
            }
        }
        Err(e) => ValidationRecord {
            check,
            point: point.to_string(),
            quantity,
            closed_form,
            ode: None,
            mc_mean: None,
            mc_std_error: None,
            error: f64::INFINITY,
            tolerance,
            pass: false,
            note: Some(e.to_string()),
        },
    }
}

fn final_state(config: &SweepConfig, net: &LinearNetwork, s: f64) -> Result<MomentState, OracleError> {
    propagate_to(net, s, config.oracle.dt, &MomentState::initial(net, false), PropagationOptions::default())
}

struct ResonatorPoint {
    gamma: f64,
    kappa: f64,
    coupling: f64,
    t: f64,
}

fn transient_records(config: &SweepConfig, pt: &ResonatorPoint) -> Result<Vec<ValidationRecord>, CliError> {
    let p = resonator_params(config, pt.gamma, 2.0 * pt.gamma, pt.kappa, pt.coupling, 0.0, 1.0);
    let t = pt.t / config.unit_scale;
    let cf = resonator_transient(&p, t).map_err(precondition)?;
    let left = build_resonator_network(&p, InputSide::Left).map_err(|e| precondition(e.into()))?;
    let right = build_resonator_network(&p, InputSide::Right).map_err(|e| precondition(e.into()))?;
    let sl = final_state(config, &left, t);
    let sr = final_state(config, &right, t);
    let point = label(&[("gamma", pt.gamma), ("kappa", pt.kappa), ("J", pt.coupling), ("t", pt.t)]);
    let l = sl.as_ref();
    let r = sr.as_ref();
    let rec = |q, cf, v: Result<f64, &OracleError>| ode_record(config, "transient", &point, q, cf, v);
    Ok(vec![
        rec("I0_LR", cf.i0_lr, l.map(|s| s.coherent_intensity(&left, 1))),
        rec("I0_RL", cf.i0_rl, r.map(|s| s.coherent_intensity(&right, 0))),
        rec("In_LR", cf.in_lr, l.map(|s| s.noise_intensity(&left, 1))),
        rec("In_RL", cf.in_rl, r.map(|s| s.noise_intensity(&right, 0))),
        rec("I0_LL", cf.i0_ll, l.map(|s| s.reflected_coherent_intensity(&left, 0))),
        rec("I0_RR", cf.i0_rr, r.map(|s| s.reflected_coherent_intensity(&right, 1))),
        rec("In_LL", cf.in_ll, l.map(|s| s.noise_intensity(&left, 0))),
        rec("In_RR", cf.in_rr, r.map(|s| s.noise_intensity(&right, 1))),
    ])
}

fn steady_records(config: &SweepConfig, point: (f64, f64, f64, f64, f64)) -> Result<Vec<ValidationRecord>, CliError> {
    let (gamma, gamma_g, kappa, coupling, n_th) = point;
    let p = resonator_params(config, gamma, gamma_g, kappa, coupling, n_th, 1.0);
    let cf = match resonator_steady(&p) {
        Ok(r) => r,
        Err(AnalyticError::NotSteady { .. }) => return Ok(Vec::new()),
        Err(e) => return Err(precondition(e)),
    };
    let left = build_resonator_network(&p, InputSide::Left).map_err(|e| precondition(e.into()))?;
    let right = build_resonator_network(&p, InputSide::Right).map_err(|e| precondition(e.into()))?;
    let sl = steady_state_moments(&left);
    let sr = steady_state_moments(&right);
    let point = label(&[
        ("gamma", gamma),
        ("gamma_G", gamma_g),
        ("kappa", kappa),
        ("J", coupling),
        ("n_th", n_th),
    ]);
    let (l, r) = (sl.as_ref(), sr.as_ref());
    let rec = |q, cf, v: Result<f64, &OracleError>| ode_record(config, "steady", &point, q, cf, v);
    Ok(vec![
        rec("I0", cf.i0, l.map(|s| s.coherent_intensity(&left, 1))),
        rec("In_LR", cf.in_lr, l.map(|s| s.noise_intensity(&left, 1))),
        rec("In_RL", cf.in_rl, r.map(|s| s.noise_intensity(&right, 0))),
    ])
}

fn waveguide_records(config: &SweepConfig, point: (f64, f64, f64)) -> Result<Vec<ValidationRecord>, CliError> {
    let (gamma, coupling, l) = point;
    let p = waveguide_params(config, gamma, 2.0 * gamma, coupling, l, 0.0);
    let cf = waveguide_outputs(&p).map_err(precondition)?;
    let a = build_waveguide_network(&p).map_err(|e| precondition(e.into()))?;
    let pb = crate::model::WaveguideParams {
        input: WaveguidePort::B,
        ..p
    };
    let b = build_waveguide_network(&pb).map_err(|e| precondition(e.into()))?;
    let sa = final_state(config, &a, p.length);
    let sb = final_state(config, &b, p.length);
    let point = label(&[("gamma", gamma), ("J", coupling), ("l", l)]);
    let (ra, rb) = (sa.as_ref(), sb.as_ref());
    let rec = |q, cf, v: Result<f64, &OracleError>| ode_record(config, "waveguide", &point, q, cf, v);
    Ok(vec![
        rec("I0_AA", cf.i0_aa, ra.map(|s| s.coherent_intensity(&a, 0))),
        rec("I0_AB", cf.i0_ab, ra.map(|s| s.coherent_intensity(&a, 1))),
        rec("I0_BA", cf.i0_ba, rb.map(|s| s.coherent_intensity(&b, 0))),
        rec("I0_BB", cf.i0_bb, rb.map(|s| s.coherent_intensity(&b, 1))),
        rec("In_A", cf.in_a, ra.map(|s| s.noise_intensity(&a, 0))),
        rec("In_B", cf.in_b, ra.map(|s| s.noise_intensity(&a, 1))),
    ])
}

/// Monte Carlo witness of the two noise ports of a network at the horizon.
fn monte_carlo_records(
    config: &SweepConfig,
    check: &'static str,
    point: String,
    net: &LinearNetwork,
    quantities: [&'static str; 2],
    closed_form: [f64; 2],
) -> Vec<ValidationRecord> {
    let o = &config.oracle;
    let sigma = config.validation.mc_sigma;
    let noise = net.clone().without_signal();
    let ode = final_state(config, &noise, o.mc_horizon);
    let mc = monte_carlo_intensity(&noise, o.mc_horizon, o.mc_dt, o.n_traj, o.seed);
    (0..2)
        .map(|port| {
            let mut rec = ValidationRecord {
                check,
                point: point.clone(),
                quantity: quantities[port],
                closed_form: closed_form[port],
                ode: None,
                mc_mean: None,
                mc_std_error: None,
                error: f64::INFINITY,
                tolerance: sigma,
                pass: false,
                note: None,
            };
            match (&ode, &mc) {
                (Ok(s), Ok(est)) => {
                    let v = s.noise_intensity(&noise, port);
                    let e = est.ports[port];
                    let dev = (e.mean - v).abs();
                    rec.ode = Some(v);
                    rec.mc_mean = Some(e.mean);
                    rec.mc_std_error = Some(e.std_error);
                    rec.error = if e.std_error > 0.0 { dev / e.std_error } else if dev == 0.0 { 0.0 } else { f64::INFINITY };
                    rec.pass = dev <= sigma * e.std_error;
                }
                (Err(e), _) => rec.note = Some(e.to_string()),
                (_, Err(e)) => rec.note = Some(e.to_string()),
            }
            rec
        })
        .collect()
}

fn corrupt(net: &LinearNetwork, port: usize, amount: f64) -> Result<LinearNetwork, CliError> {
    let mut d: DMatrix<Complex64> = net.diffusion_antinormal().clone();
    d[(port, port)] -= Complex64::new(amount, 0.0);
    net.clone()
        .with_diffusion_antinormal(d)
        .map_err(|e| precondition(e.into()))
}

fn commutator_record(config: &SweepConfig, name: String, net: &LinearNetwork, corrupted: bool) -> CommutatorRecord {
    let v = &config.validation;
    let horizon = v.commutator_horizon / config.unit_scale;
    let residual = commutator_residual(net, horizon, config.oracle.dt.max(horizon / 1e5)).unwrap_or(f64::INFINITY);
    CommutatorRecord {
        network: name,
        corrupted,
        residual,
        tolerance: v.commutator_tolerance,
        pass: residual <= v.commutator_tolerance,
    }
}

/// Fits the convergence exponent of RK4 from errors at three step sizes.
fn integrator_order(name: String, net: &LinearNetwork, s: f64, port: usize, exact: f64) -> IntegratorOrder {
    let opts = PropagationOptions {
        richardson_check: false,
        ..PropagationOptions::default()
    };
    let errors: Vec<f64> = ORDER_STEPS
        .iter()
        .map(|&dt| match propagate_to(net, s, dt, &MomentState::initial(net, false), opts) {
            Ok(st) => (st.port_intensity(net, port) - exact).abs(),
            Err(_) => f64::INFINITY,
        })
        .collect();
    let exponents: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let exponent = exponents.iter().sum::<f64>() / exponents.len() as f64;
    IntegratorOrder {
        network: name,
        dt: ORDER_STEPS.to_vec(),
        errors,
        exponent,
        target: ORDER_TARGET,
        tolerance: ORDER_TOLERANCE,
        pass: (exponent - ORDER_TARGET).abs() <= ORDER_TOLERANCE,
    }
}

#[derive(Clone, Copy)]
enum Job {
    Transient(f64, f64, f64, f64),
    Steady(f64, f64, f64, f64, f64),
    Waveguide(f64, f64, f64),
}

/// Label, check kind, network, quantity names, closed-form values and
/// network kind (0 resonator, 1 waveguide).
type Witness = (String, &'static str, LinearNetwork, [&'static str; 2], [f64; 2], usize);

/// Cross-checks every closed form on the configured grid against the moment
/// ODE (or Lyapunov solve), adds Monte Carlo witnesses, commutator residuals
/// and an integrator-order measurement.
pub fn run_validation(config: &SweepConfig) -> Result<ValidationReport, CliError> {
    let g = &config.grid;
    let resonator = config.system != Some(SystemKind::Waveguide);
    let waveguide = config.system != Some(SystemKind::Resonator);
    let coupling = config.axis(&g.coupling, &[1.0]);

    let mut jobs = Vec::new();
    if resonator {
        for &gamma in &config.axis(&g.gamma, VALIDATE_TRANSIENT_GAMMA) {
            for &kappa in &config.axis(&g.kappa, VALIDATE_TRANSIENT_KAPPA) {
                for &j in &coupling {
                    for &t in &config.axis(&g.t, VALIDATE_TIMES) {
                        jobs.push(Job::Transient(gamma, kappa, j, t));
                    }
                }
            }
        }
        for &gamma in &config.axis(&g.gamma, VALIDATE_STEADY_GAMMA) {
            for &gamma_g in &config.axis(&g.gamma_g, VALIDATE_STEADY_GAIN) {
                for &kappa in &config.axis(&g.kappa, &[0.5]) {
                    for &j in &config.axis(&g.coupling, VALIDATE_STEADY_COUPLING) {
                        for &n in &config.axis(&g.n_th, VALIDATE_STEADY_N_TH) {
                            jobs.push(Job::Steady(gamma, gamma_g, kappa, j, n));
                        }
                    }
                }
            }
        }
    }
    if waveguide {
        for &gamma in &config.axis(&g.gamma, VALIDATE_WAVEGUIDE_GAMMA) {
            for &j in &coupling {
                for &l in &config.axis(&g.l, VALIDATE_LENGTHS) {
                    jobs.push(Job::Waveguide(gamma, j, l));
                }
            }
        }
    }
    let per_job: Vec<Result<Vec<ValidationRecord>, CliError>> = jobs
        .par_iter()
        .map(|job| match *job {
            Job::Transient(gamma, kappa, coupling, t) => {
                transient_records(config, &ResonatorPoint { gamma, kappa, coupling, t })
            }
            Job::Steady(a, b, c, d, e) => steady_records(config, (a, b, c, d, e)),
            Job::Waveguide(a, b, c) => waveguide_records(config, (a, b, c)),
        })
        .collect();
    let mut records = Vec::new();
    for r in per_job {
        records.extend(r?);
    }

    // Networks for the Monte Carlo, commutator and order checks: one per
    // transient γ (first κ, first J) and one per waveguide γ.
    let mut witnesses: Vec<Witness> = Vec::new();
    let mc_t = config.oracle.mc_horizon / config.unit_scale;
    if resonator {
        let kappa = config.axis(&g.kappa, VALIDATE_TRANSIENT_KAPPA)[0];
        for &gamma in &config.axis(&g.gamma, VALIDATE_TRANSIENT_GAMMA) {
            let p = resonator_params(config, gamma, 2.0 * gamma, kappa, coupling[0], 0.0, 1.0);
            let cf = resonator_transient(&p, mc_t).map_err(precondition)?;
            let net = build_resonator_network(&p, InputSide::Left).map_err(|e| precondition(e.into()))?;
            let name = label(&[("gamma", gamma), ("kappa", kappa), ("J", coupling[0])]);
            witnesses.push((name, "monte_carlo_resonator", net, ["In_RL", "In_LR"], [cf.in_rl, cf.in_lr], 0));
        }
    }
    if waveguide {
        for &gamma in &config.axis(&g.gamma, VALIDATE_WAVEGUIDE_GAMMA) {
            let p = waveguide_params(config, gamma, 2.0 * gamma, coupling[0], config.oracle.mc_horizon, 0.0);
            let cf = waveguide_outputs(&p).map_err(precondition)?;
            let net = build_waveguide_network(&p).map_err(|e| precondition(e.into()))?;
            let name = label(&[("gamma", gamma), ("J", coupling[0])]);
            witnesses.push((name, "monte_carlo_waveguide", net, ["In_A", "In_B"], [cf.in_a, cf.in_b], 1));
        }
    }
    if config.validation.monte_carlo {
        for (name, check, net, q, cf, _) in &witnesses {
            records.extend(monte_carlo_records(config, check, name.clone(), net, *q, *cf));
        }
    }

    let corrupted = config.validation.negative_control;
    let mut commutator = Vec::new();
    for (name, _, net, _, _, kind) in &witnesses {
        let net = if corrupted {
            // Resonator: drop κ_a from the fiber vacuum; waveguide: drop γ.
            let amount = if *kind == 0 { net.output_weights()[0] } else { net.diffusion_antinormal()[(0, 0)].re };
            corrupt(net, 0, amount)?
        } else {
            net.clone()
        };
        commutator.push(commutator_record(config, name.clone(), &net, corrupted));
    }

    let mut integrator = Vec::new();
    if resonator {
        let p = resonator_params(config, 1.0, 2.0, 0.5, 1.0, 0.0, 1.0);
        let s = 2.0 / config.unit_scale;
        let cf = resonator_transient(&p, s).map_err(precondition)?;
        let net = build_resonator_network(&p, InputSide::Left).map_err(|e| precondition(e.into()))?;
        let name = label(&[("gamma", 1.0), ("kappa", 0.5), ("J", 1.0), ("t", 2.0)]);
        integrator.push(integrator_order(name, &net, s, 1, cf.i0_lr + cf.in_lr));
    }
    if waveguide {
        let p = waveguide_params(config, 3.0, 6.0, 1.0, 2.0, 0.0);
        let cf = waveguide_outputs(&p).map_err(precondition)?;
        let net = build_waveguide_network(&p).map_err(|e| precondition(e.into()))?;
        let name = label(&[("gamma", 3.0), ("J", 1.0), ("l", 2.0)]);
        integrator.push(integrator_order(name, &net, p.length, 0, cf.i0_aa + cf.in_a));
    }

    let outcomes: Vec<bool> = records
        .iter()
        .map(|r| r.pass)
        .chain(commutator.iter().map(|c| c.pass))
        .chain(integrator.iter().map(|o| o.pass))
        .collect();
    let passed = outcomes.iter().filter(|p| **p).count();
    let summary = Summary {
        total: outcomes.len(),
        passed,
        failed: outcomes.len() - passed,
        pass: passed == outcomes.len(),
    };
    let o = &config.oracle;
    Ok(ValidationReport {
        settings: ValidationSettingsEcho {
            seed: o.seed,
            dt: o.dt,
            n_traj: o.n_traj,
            mc_dt: o.mc_dt,
            mc_horizon: o.mc_horizon,
            ode_tolerance: config.validation.ode_tolerance,
            mc_sigma: config.validation.mc_sigma,
            negative_control: corrupted,
        },
        records,
        commutator,
        integrator_order: integrator,
        summary,
    })
}
