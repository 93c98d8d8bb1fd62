// Copyright 2026 The discsteer Authors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use discsteer::bessel::{compute_zeros, ZeroTable, DEFAULT_ZERO_TOL};
use discsteer::control::{
    radius_from_control, steer_local, synthesize_linearized, Pipeline, PipelineConfig,
    RadiusTrajectory, SteeringProblem,
};
use discsteer::dynamics::{
    control_hash, simulate, simulate_linearized, simulate_linearized_galerkin, ControlSignal,
    GalerkinSystem, RunManifest, SimulationOptions,
};
use discsteer::moment::default_horizon;
use discsteer::spectral::{phi_sharp, RadialBasis, RadialState, TargetParams};

use crate::config::{Model, RunConfig};
use crate::output::OutDir;
use crate::{verify, Failure};

const PERTURBED_MODES: usize = 10;

pub fn zeros(cfg: &mut RunConfig, out: &mut OutDir) -> Result<(), Failure> {
    let nu = *cfg.nu.get_or_insert(0);
    let k = *cfg.k.get_or_insert(64);
    let tol = *cfg.tol.get_or_insert(DEFAULT_ZERO_TOL);
    if k == 0 {
        return Err(Failure::usage("--k must be at least 1"));
    }
    let table = compute_zeros(nu, k, tol)?;
    out.write("zeros.json", &(table.to_json()? + "\n"))
}

pub fn verify(cfg: &mut RunConfig, out: &mut OutDir) -> Result<(), Failure> {
    let table = match cfg.table.clone() {
        Some(path) => ZeroTable::from_json(&out.read_input(&path)?)?,
        None => {
            let nu = *cfg.nu.get_or_insert(0);
            let k = *cfg.k.get_or_insert(500);
            let tol = *cfg.tol.get_or_insert(DEFAULT_ZERO_TOL);
            if k == 0 {
                return Err(Failure::usage("--k must be at least 1"));
            }
            compute_zeros(nu, k, tol)?
        }
    };
    let report = verify::run(&table);
    for c in &report.checks {
        eprintln!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
    }
    out.write_json("verify.json", &report)?;
    if report.pass {
        Ok(())
    } else {
        let failing: Vec<_> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name)
            .collect();
        Err(Failure::verification(format!(
            "failed checks: {}",
            failing.join(", ")
        )))
    }
}

struct Setup {
    params: TargetParams,
    horizon: f64,
    pipe: Pipeline,
}

fn setup(cfg: &mut RunConfig) -> Result<Setup, Failure> {
    let params = TargetParams::new(
        *cfg.theta2.get_or_insert(0.25),
        *cfg.theta3.get_or_insert(0.25),
    )
    .map_err(|e| Failure::usage(e.to_string()))?;
    let config = PipelineConfig {
        modes: *cfg.modes.get_or_insert(40),
        moment_modes: *cfg.moment_modes.get_or_insert(20),
        intervals: *cfg.intervals.get_or_insert(1 << 16),
        steps: *cfg.steps.get_or_insert(1 << 16),
    };
    let tol = *cfg.tol.get_or_insert(DEFAULT_ZERO_TOL);
    let table = compute_zeros(0, config.modes.max(3), tol)?;
    let horizon = match cfg.horizon {
        Some(t) => t,
        None => *cfg.horizon.insert(default_horizon(&table)?),
    };
    let pipe = Pipeline::new(&table, config).map_err(|e| Failure::usage(e.to_string()))?;
    Ok(Setup {
        params,
        horizon,
        pipe,
    })
}

/// Tangent vector at `ψ♯_τ` on the first modes with `c_k ∝ j_{0,k}^{−3.5}`
/// and unit `H³` norm.
fn perturbation(
    basis: &RadialBasis,
    params: &TargetParams,
    tau: f64,
    rng: &mut ChaCha8Rng,
) -> Result<RadialState, Failure> {
    let n = PERTURBED_MODES.min(basis.len());
    let raw = (1..=n)
        .map(|k| {
            let s = basis.zero(k)?.powf(-3.5);
            Ok(Complex64::new(
                rng.random_range(-1.0..1.0) * s,
                rng.random_range(-1.0..1.0) * s,
            ))
        })
        .collect::<discsteer::Result<Vec<_>>>()?;
    let p = RadialState::new(raw).project_tangent(&basis.wave_packet(params, tau, n)?);
    Ok(&p * (1.0 / basis.hs_norm(&p, 3.0)?))
}

fn read_state(out: &mut OutDir, path: &std::path::Path) -> Result<RadialState, Failure> {
    serde_json::from_str(&out.read_input(path)?)
        .map_err(|e| Failure::usage(format!("invalid state {}: {e}", path.display())))
}

/// Endpoint pair: from files when given, otherwise seeded perturbations of
/// size `δ` (added to the reference states when `nonlinear`).
fn endpoints(
    cfg: &mut RunConfig,
    out: &mut OutDir,
    s: &Setup,
    nonlinear: bool,
) -> Result<(RadialState, RadialState), Failure> {
    let seed = *cfg.seed.get_or_insert(0);
    let delta = *cfg.delta.get_or_insert(1e-3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = &s.pipe.basis;
    let mut pick = |path: Option<std::path::PathBuf>, tau: f64| -> Result<RadialState, Failure> {
        if let Some(p) = path {
            return read_state(out, &p);
        }
        let d = &perturbation(basis, &s.params, tau, &mut rng)? * delta;
        if nonlinear {
            let n = d.len();
            Ok((&basis.wave_packet(&s.params, tau, n)? + &d).normalize()?)
        } else {
            Ok(d)
        }
    };
    let psi0 = pick(cfg.psi0.clone(), 0.0)?;
    let psif = pick(cfg.psif.clone(), s.horizon)?;
    Ok((psi0, psif))
}

pub fn synthesize(cfg: &mut RunConfig, out: &mut OutDir) -> Result<(), Failure> {
    let s = setup(cfg)?;
    let (psi0, psif) = endpoints(cfg, out, &s, false)?;
    let problem = SteeringProblem::new(s.params, s.horizon, psi0, psif)?;
    let syn = synthesize_linearized(&problem, &s.pipe)?;
    let reached = simulate_linearized(&syn.v, &s.params, &s.pipe.sys)?;
    let target = syn.target.resized(s.pipe.sys.len());
    let error = (&reached - &target).l2_norm() / target.l2_norm().max(f64::MIN_POSITIVE);
    out.write("control_v.csv", &syn.v.to_csv("v"))?;
    out.write_json("moment_solution.json", &syn.solution)?;
    out.write_json("problem.json", &problem)?;
    out.write_json(
        "report.json",
        &json!({
            "horizon": s.horizon,
            "frequencies": syn.problem.freqs.len(),
            "diagnostics": syn.solution.diagnostics,
            "control_hash": control_hash(&syn.v),
            "max_abs_v": syn.v.max_abs(),
            "relative_endpoint_error": error,
        }),
    )
}

pub fn simulate_cmd(cfg: &mut RunConfig, out: &mut OutDir) -> Result<(), Failure> {
    let path = cfg
        .control
        .clone()
        .ok_or_else(|| Failure::usage("simulate needs --control"))?;
    let control = ControlSignal::from_csv(&out.read_input(&path)?)?;
    let model = *cfg.model.get_or_insert(Model::Bilinear);
    let params = TargetParams::new(
        *cfg.theta2.get_or_insert(0.25),
        *cfg.theta3.get_or_insert(0.25),
    )
    .map_err(|e| Failure::usage(e.to_string()))?;
    let modes = *cfg.modes.get_or_insert(40);
    let steps = *cfg.steps.get_or_insert(1 << 14);
    let stride = *cfg.stride.get_or_insert(64);
    if modes < 3 || steps == 0 || stride == 0 {
        return Err(Failure::usage("need modes >= 3, steps >= 1, stride >= 1"));
    }
    let tol = *cfg.tol.get_or_insert(DEFAULT_ZERO_TOL);
    let sys = GalerkinSystem::new(&compute_zeros(0, modes, tol)?, modes)?;
    match model {
        Model::Bilinear => {
            let psi0 = match cfg.psi0.clone() {
                Some(p) => read_state(out, &p)?.resized(modes),
                None => phi_sharp(&params).resized(modes),
            };
            control.check_admissible()?;
            let w = control.potential_coefficient();
            let traj = simulate(&psi0, &w, &sys, SimulationOptions { steps, stride }, None)?;
            for w in &traj.warnings {
                eprintln!("warning: {w}");
            }
            out.write("trajectory.csv", &traj.to_csv())?;
            out.write_json("final_state.json", traj.final_state())?;
            out.write_json(
                "report.json",
                &json!({
                    "run": RunManifest::new(&traj, &control, &sys),
                    "step_defect": traj.step_defect,
                    "warnings": traj.warnings,
                }),
            )
        }
        Model::Linearized | Model::Galerkin => {
            let end = if model == Model::Linearized {
                simulate_linearized(&control, &params, &sys)?
            } else {
                simulate_linearized_galerkin(&control, &params, &sys, steps)?
            };
            out.write_json("final_state.json", &end)?;
            out.write_json(
                "report.json",
                &json!({
                    "model": model,
                    "modes": modes,
                    "horizon": control.horizon(),
                    "control_hash": control_hash(&control),
                    "norm": end.l2_norm(),
                }),
            )
        }
    }
}

fn radius_outputs(u: &ControlSignal, out: &mut OutDir) -> Result<serde_json::Value, Failure> {
    let r: RadiusTrajectory = radius_from_control(u)?;
    let (t, back) = r.recover_control();
    let round_trip = t
        .iter()
        .zip(&back)
        .map(|(&t, &b)| (u.value(t) - b).abs())
        .fold(0.0, f64::max);
    out.write("radius.csv", &r.to_csv())?;
    Ok(json!({
        "t_star": r.t_star,
        "min_radius": r.radii.iter().copied().fold(f64::INFINITY, f64::min),
        "max_radius": r.radii.iter().copied().fold(0.0, f64::max),
        "end_radius": r.radii.last(),
        "round_trip_error": round_trip,
    }))
}

pub fn steer(cfg: &mut RunConfig, out: &mut OutDir) -> Result<(), Failure> {
    let s = setup(cfg)?;
    let iterations = *cfg.iterations.get_or_insert(3);
    let tol = *cfg.steer_tol.get_or_insert(1e-8);
    let (psi0, psif) = endpoints(cfg, out, &s, true)?;
    let problem = SteeringProblem::new(s.params, s.horizon, psi0, psif)?;
    let report = steer_local(&problem, &s.pipe, iterations, tol)?;
    out.write("control_u.csv", &report.u.to_csv("u"))?;
    let radius = radius_outputs(&report.u, out)?;
    out.write_json(
        "report.json",
        &json!({
            "horizon": s.horizon,
            "history": report.history,
            "iterations": report.iterations,
            "converged": report.converged,
            "control_hash": control_hash(&report.u),
            "radius": radius,
        }),
    )
}

pub fn radius(cfg: &mut RunConfig, out: &mut OutDir) -> Result<(), Failure> {
    let path = cfg
        .control
        .clone()
        .ok_or_else(|| Failure::usage("radius needs --control"))?;
    let u = ControlSignal::from_csv(&out.read_input(&path)?)?;
    let report = radius_outputs(&u, out)?;
    out.write_json("report.json", &report)
}
