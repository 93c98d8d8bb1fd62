// Copyright 2026 The discsteer Authors
// SPDX-License-Identifier: Apache-2.0

//! Control synthesis on the fixed domain and the map back to the physical
//! disc.
//!
//! The physical radius `R(τ)` and the fixed-domain control are tied by
//! `u(t) = ¼ Ṙ(τ) R(τ)` with `t = ∫₀^τ dσ / R(σ)²`. Writing `t = g(τ)` and
//! `U(s) = ∫₀ˢ u` this gives `g' = e^{−8U(g)}` and `R = e^{4U(g)}`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::ZeroTable;
use crate::dynamics::{free_evolution, simulate, ControlSignal, GalerkinSystem, SimulationOptions};
use crate::error::{Error, Result};
use crate::moment::{
    build_frequencies, build_rhs, solve_moment, FrequencySet, MomentProblem, MomentSolution,
};
use crate::spectral::{phi_sharp, RadialBasis, RadialState, TargetParams};

/// Tolerance on the two vanishing moments of `w` accepted by
/// [`integrate_control`], relative to `max(1, T · max|w|)`.
pub const CONSTRAINT_TOL: f64 = 1e-8;

/// Which constraint `psi0` must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    /// `psi0`, `psif` are tangent vectors at `φ♯`, `ψ♯_T`.
    Linearized,
    /// `psi0`, `psif` are unit states near `φ♯`, `ψ♯_T`.
    Nonlinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringProblem {
    pub params: TargetParams,
    pub horizon: f64,
    pub psi0: RadialState,
    pub psif: RadialState,
}

impl SteeringProblem {
    pub fn new(
        params: TargetParams,
        horizon: f64,
        psi0: RadialState,
        psif: RadialState,
    ) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "horizon {horizon} must be positive"
            )));
        }
        Ok(Self {
            params,
            horizon,
            psi0,
            psif,
        })
    }

    pub fn validate(&self, task: Task) -> Result<()> {
        match task {
            Task::Linearized => {
                let re = self
                    .psi0
                    .resized(self.psi0.len().max(3))
                    .inner(&phi_sharp(&self.params))
                    .re;
                if re.abs() > 1e-8 {
                    return Err(Error::NotTangent(re));
                }
            }
            Task::Nonlinear => {
                for (name, s) in [("psi0", &self.psi0), ("psif", &self.psif)] {
                    let n = s.l2_norm();
                    if (n - 1.0).abs() > 1e-10 {
                        return Err(Error::InvalidParams(format!(
                            "{name} has norm {n}, expected 1"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Sizes used by the synthesis and steering pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Galerkin modes `N` of the simulators.
    pub modes: usize,
    /// Highest mode `K` whose gaps enter the moment problem.
    pub moment_modes: usize,
    /// Grid intervals of synthesized controls.
    pub intervals: usize,
    /// Time steps of the bilinear simulator.
    pub steps: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            modes: 40,
            moment_modes: 20,
            intervals: 1 << 16,
            steps: 1 << 16,
        }
    }
}

/// Immutable tables shared by every synthesis with the same sizes.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub config: PipelineConfig,
    pub basis: RadialBasis,
    pub sys: GalerkinSystem,
    pub freqs: FrequencySet,
}

impl Pipeline {
    pub fn new(table: &ZeroTable, config: PipelineConfig) -> Result<Self> {
        if config.moment_modes < 3 || config.moment_modes > config.modes {
            return Err(Error::InvalidParams(format!(
                "moment modes {} must lie in 3..={}",
                config.moment_modes, config.modes
            )));
        }
        if config.intervals < 2 || config.steps == 0 {
            return Err(Error::InvalidParams(
                "intervals >= 2 and steps >= 1 required".into(),
            ));
        }
        Ok(Self {
            config,
            basis: RadialBasis::new(table, config.modes)?,
            sys: GalerkinSystem::new(table, config.modes)?,
            freqs: build_frequencies(table, config.moment_modes)?,
        })
    }
}

/// Output of [`synthesize_linearized`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Synthesis {
    /// `v ∈ Ḣ¹₀` with `v̇ = w` carried.
    pub v: ControlSignal,
    /// Reduced target `−e^{−iTΔ}Ψ₀ + Ψ_f`.
    pub target: RadialState,
    pub problem: MomentProblem,
    pub solution: MomentSolution,
}

/// The linearized control map: a `v` steering `Ψ₀` to `Ψ_f` along the
/// linearization at `φ♯`.
pub fn synthesize_linearized(problem: &SteeringProblem, pipe: &Pipeline) -> Result<Synthesis> {
    let k = pipe.config.moment_modes;
    let n0 = problem.psi0.len();
    let evolved = free_evolution(&problem.psi0, problem.horizon, &pipe.sys)?;
    let target = &problem.psif.resized(n0.max(problem.psif.len()))
        - &evolved.resized(n0.max(problem.psif.len()));
    if target.len() > k && target.coeffs()[k..].iter().any(|c| c.norm() > 0.0) {
        return Err(Error::InvalidParams(format!(
            "target has modes above the moment cutoff K = {k}"
        )));
    }
    let target = target.resized(k);
    let mp = build_rhs(
        &target,
        &problem.params,
        problem.horizon,
        &pipe.basis,
        &pipe.freqs,
    )?;
    let solution = solve_moment(&mp)?;
    let v = solution.integrated_signal(pipe.config.intervals)?;
    v.check_admissible()?;
    Ok(Synthesis {
        v,
        target,
        problem: mp,
        solution,
    })
}

/// `v(t) = ∫₀ᵗ w` by cumulative trapezoid, with `w` carried as `v̇`.
pub fn integrate_control(w: &ControlSignal) -> Result<ControlSignal> {
    let scale = 1f64.max(w.horizon() * w.max_abs());
    let total = piecewise_linear_integral(w);
    let first = w.first_moment();
    if total.abs() > CONSTRAINT_TOL * scale || first.abs() > CONSTRAINT_TOL * scale * w.horizon() {
        return Err(Error::Constraint(format!(
            "int w = {total:.3e}, int t w = {first:.3e}; both must vanish"
        )));
    }
    let h = w.step();
    let s = w.samples();
    let mut v = Vec::with_capacity(s.len());
    let mut acc = 0.0;
    v.push(0.0);
    for pair in s.windows(2) {
        acc += 0.5 * h * (pair[0] + pair[1]);
        v.push(acc);
    }
    ControlSignal::with_derivative(w.horizon(), v, s.to_vec())
}

fn piecewise_linear_integral(w: &ControlSignal) -> f64 {
    let s = w.samples();
    let inner: f64 = s[1..s.len() - 1].iter().sum();
    w.step() * (0.5 * (s[0] + s[s.len() - 1]) + inner)
}

/// `ψ(T)` of the fixed-domain system with potential coefficient `u̇ − 4u²`.
pub fn endpoint_map(
    u: &ControlSignal,
    psi0: &RadialState,
    sys: &GalerkinSystem,
    steps: usize,
) -> Result<RadialState> {
    u.check_admissible()?;
    let w = u.potential_coefficient();
    let opts = SimulationOptions {
        steps,
        stride: steps,
    };
    Ok(simulate(psi0, &w, sys, opts, None)?.final_state().clone())
}

/// Result of [`steer_local`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringReport {
    pub u: ControlSignal,
    /// `‖ψ_f − Θ_T(u_m, ψ₀)‖` before each update and after the last.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Newton-type loop `u_{m+1} = u_m + 𝓛(0, P r_m)` with the linearization
/// frozen at `(0, φ♯)` and `P` the projection onto the tangent space at
/// `ψ♯_T`. Stops below `tol` or after `iterations` updates.
pub fn steer_local(
    problem: &SteeringProblem,
    pipe: &Pipeline,
    iterations: usize,
    tol: f64,
) -> Result<SteeringReport> {
    problem.validate(Task::Nonlinear)?;
    let n = pipe.sys.len();
    let k = pipe.config.moment_modes;
    let psi0 = problem.psi0.resized(n);
    let psif = problem.psif.resized(n);
    let sharp_t = pipe
        .basis
        .wave_packet(&problem.params, problem.horizon, n)?;
    let mut u = ControlSignal::zero(problem.horizon, pipe.config.intervals)?;
    let mut history = Vec::new();
    let mut rises = 0;
    for m in 0..=iterations {
        let end = endpoint_map(&u, &psi0, &pipe.sys, pipe.config.steps)?;
        let residual = &psif - &end;
        let err = residual.l2_norm();
        if let Some(&prev) = history.last() {
            rises = if err > prev { rises + 1 } else { 0 };
        }
        history.push(err);
        log::debug!("steering iteration {m}: residual {err:.3e}");
        if err <= tol {
            return Ok(SteeringReport {
                u,
                history,
                iterations: m,
                converged: true,
            });
        }
        if rises >= 3 {
            return Err(Error::Divergence { history });
        }
        if m == iterations {
            break;
        }
        let step_target = residual.project_tangent(&sharp_t).resized(k);
        let sub = SteeringProblem::new(
            problem.params,
            problem.horizon,
            RadialState::zeros(k),
            step_target,
        )?;
        let du = synthesize_linearized(&sub, pipe)?.v;
        u = u.combine(1.0, &du, 1.0)?;
    }
    Ok(SteeringReport {
        u,
        history,
        iterations,
        converged: false,
    })
}

/// `R(τ)` on `[0, T*]` with `g(T*) = T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusTrajectory {
    pub taus: Vec<f64>,
    pub radii: Vec<f64>,
    /// Fixed-domain time `g(τ)` at each `τ`.
    pub times: Vec<f64>,
    pub t_star: f64,
}

impl RadiusTrajectory {
    /// `(t, ¼ Ṙ R)` recomputed from the radius samples alone: `Ṙ` by
    /// fourth-order differences and `t = ∫ dσ / R²` by cumulative Simpson.
    pub fn recover_control(&self) -> (Vec<f64>, Vec<f64>) {
        let r = &self.radii;
        let n = r.len();
        let h = self.t_star / (n - 1) as f64;
        let mut dr = vec![0.0; n];
        for i in 0..n {
            dr[i] = if i >= 2 && i + 2 < n {
                (r[i - 2] - 8.0 * r[i - 1] + 8.0 * r[i + 1] - r[i + 2]) / (12.0 * h)
            } else if i < 2 {
                (-25.0 * r[i] + 48.0 * r[i + 1] - 36.0 * r[i + 2] + 16.0 * r[i + 3]
                    - 3.0 * r[i + 4])
                    / (12.0 * h)
            } else {
                (25.0 * r[i] - 48.0 * r[i - 1] + 36.0 * r[i - 2] - 16.0 * r[i - 3] + 3.0 * r[i - 4])
                    / (12.0 * h)
            };
        }
        let inv: Vec<f64> = r.iter().map(|x| 1.0 / (x * x)).collect();
        let mut t = vec![0.0; n];
        for i in 1..n {
            // Simpson on [i−1, i] with the quadratic through three samples.
            let (a, b, c) = if i + 1 < n {
                (inv[i - 1], inv[i], inv[i + 1])
            } else {
                (inv[i], inv[i - 1], inv[i - 2])
            };
            t[i] = t[i - 1] + h / 12.0 * (5.0 * a + 8.0 * b - c);
        }
        let u = (0..n).map(|i| 0.25 * dr[i] * r[i]).collect();
        (t, u)
    }

    /// CSV `tau,R,t`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,R,t\n");
        for i in 0..self.taus.len() {
            let _ = writeln!(
                out,
                "{:e},{:e},{:e}",
                self.taus[i], self.radii[i], self.times[i]
            );
        }
        out
    }
}

/// Grid intervals of the physical-time output.
pub const RADIUS_STEPS: usize = 4096;

/// Physical radius from a fixed-domain control with `∫₀ᵀ u = 0`.
pub fn radius_from_control(u: &ControlSignal) -> Result<RadiusTrajectory> {
    let horizon = u.horizon();
    let mean = u.integral();
    if mean.abs() > 1e-8 * horizon.max(1.0) {
        return Err(Error::Constraint(format!("int u = {mean:.3e} must vanish")));
    }
    let prim = Primitive::new(u);
    let rate = |g: f64| (-8.0 * prim.at(g)).exp();
    let rk4 = |g: f64, h: f64| {
        let k1 = rate(g);
        let k2 = rate(g + 0.5 * h * k1);
        let k3 = rate(g + 0.5 * h * k2);
        let k4 = rate(g + h * k3);
        g + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };

    let h = horizon / RADIUS_STEPS as f64;
    // g' ≥ e^{−8 max|U|}, so the event lies before this many steps.
    let bound = prim.max_abs();
    let limit = ((8.0 * bound).exp() * RADIUS_STEPS as f64).ceil() as usize + 2;
    let (mut tau, mut g) = (0.0, 0.0);
    let mut t_star = None;
    for _ in 0..limit {
        let next = rk4(g, h);
        if next >= horizon {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if rk4(g, mid) < horizon {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-16 * (tau + h) {
                    break;
                }
            }
            t_star = Some(tau + 0.5 * (lo + hi));
            break;
        }
        tau += h;
        g = next;
    }
    let t_star = t_star.ok_or_else(|| Error::Internal("radius event not reached".into()))?;

    let m = RADIUS_STEPS;
    let step = t_star / m as f64;
    let mut taus = Vec::with_capacity(m + 1);
    let mut times = Vec::with_capacity(m + 1);
    let mut g = 0.0;
    for i in 0..=m {
        taus.push(i as f64 * step);
        times.push(g);
        g = rk4(g, step);
    }
    let radii = times.iter().map(|&g| (4.0 * prim.at(g)).exp()).collect();
    Ok(RadiusTrajectory {
        taus,
        radii,
        times,
        t_star,
    })
}

/// `U(s) = ∫₀ˢ u` for the piecewise-linear `u`, zero-extended past `T`.
struct Primitive<'a> {
    u: &'a ControlSignal,
    prefix: Vec<f64>,
}

impl<'a> Primitive<'a> {
    fn new(u: &'a ControlSignal) -> Self {
        let h = u.step();
        let mut prefix = vec![0.0];
        for pair in u.samples().windows(2) {
            let last = *prefix.last().expect("nonempty");
            prefix.push(last + 0.5 * h * (pair[0] + pair[1]));
        }
        Self { u, prefix }
    }

    fn at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let h = self.u.step();
        let samples = self.u.samples();
        let last = samples.len() - 1;
        if s >= self.u.horizon() {
            return self.prefix[last];
        }
        let i = ((s / h).floor() as usize).min(last - 1);
        let x = s - i as f64 * h;
        let (a, b) = (samples[i], samples[i + 1]);
        self.prefix[i] + a * x + 0.5 * (b - a) / h * x * x
    }

    fn max_abs(&self) -> f64 {
        self.prefix.iter().fold(0.0f64, |m, p| m.max(p.abs())) + self.u.max_abs() * self.u.step()
    }
}

/// Radial samples `φ(ρ_i)`, `ρ_i ∈ [0, R]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscSamples {
    pub rho: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// `φ(ρ) = ξ(ρ/R)/R` with `ξ(r) = ψ(r) e^{i u r² − 4i ∫u}`.
pub fn disc_value(
    psi: &RadialState,
    basis: &RadialBasis,
    u_value: f64,
    phase_integral: f64,
    radius: f64,
    rho: f64,
) -> Result<Complex64> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::Domain(format!("radius {radius} must be positive")));
    }
    let r = (rho / radius).clamp(0.0, 1.0);
    let psi_r = basis.evaluate(psi, r)?;
    let phase = Complex64::from_polar(1.0, u_value * r * r - 4.0 * phase_integral);
    Ok(psi_r * phase / radius)
}

/// [`disc_value`] on `points` equispaced radii covering `[0, R]`.
pub fn map_fixed_to_disc(
    psi: &RadialState,
    basis: &RadialBasis,
    u_value: f64,
    phase_integral: f64,
    radius: f64,
    points: usize,
) -> Result<DiscSamples> {
    if points < 2 {
        return Err(Error::InvalidParams(
            "need at least two sample points".into(),
        ));
    }
    let rho: Vec<f64> = (0..points)
        .map(|i| radius * i as f64 / (points - 1) as f64)
        .collect();
    let values = rho
        .iter()
        .map(|&x| disc_value(psi, basis, u_value, phase_integral, radius, x))
        .collect::<Result<_>>()?;
    Ok(DiscSamples { rho, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::{compute_zeros, QuadratureRule};
    use crate::dynamics::simulate_linearized;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn small_pipe() -> Pipeline {
        let t = compute_zeros(0, 24, 1e-12).unwrap();
        Pipeline::new(
            &t,
            PipelineConfig {
                modes: 24,
                moment_modes: 12,
                intervals: 1 << 14,
                steps: 1 << 14,
            },
        )
        .unwrap()
    }

    fn params() -> TargetParams {
        TargetParams::new(0.25, 0.25).unwrap()
    }

    fn tangent_perturbation(pipe: &Pipeline, scale: f64, at_t: bool) -> RadialState {
        let raw = RadialState::new(
            (1..=10)
                .map(|k| {
                    let z = pipe.basis.zero(k).unwrap();
                    c((k as f64).sin(), (1.7 * k as f64).cos()) * z.powf(-3.5)
                })
                .collect(),
        );
        let tau = if at_t { 1.0 } else { 0.0 };
        let xi = pipe.basis.wave_packet(&params(), tau, 10).unwrap();
        let p = raw.project_tangent(&xi);
        let h3 = pipe.basis.hs_norm(&p, 3.0).unwrap();
        &p * (scale / h3)
    }

    #[test]
    fn validation() {
        let p = params();
        let sharp = phi_sharp(&p);
        let lin = SteeringProblem::new(p, 1.0, sharp.clone(), sharp.clone()).unwrap();
        assert!(matches!(
            lin.validate(Task::Linearized),
            Err(Error::NotTangent(_))
        ));
        assert!(lin.validate(Task::Nonlinear).is_ok());
        let z = SteeringProblem::new(p, 1.0, RadialState::zeros(3), RadialState::zeros(3)).unwrap();
        assert!(z.validate(Task::Linearized).is_ok());
        assert!(z.validate(Task::Nonlinear).is_err());
        assert!(SteeringProblem::new(p, 0.0, sharp.clone(), sharp).is_err());
    }

    #[test]
    fn free_image_needs_no_control() {
        let pipe = small_pipe();
        let psi0 = tangent_perturbation(&pipe, 0.3, false);
        let psif = free_evolution(&psi0, 1.0, &pipe.sys).unwrap();
        let prob = SteeringProblem::new(params(), 1.0, psi0, psif).unwrap();
        let syn = synthesize_linearized(&prob, &pipe).unwrap();
        assert!(syn.v.max_abs() <= 1e-10);
    }

    #[test]
    fn synthesis_is_linear_and_hits_target() {
        let pipe = small_pipe();
        let f = tangent_perturbation(&pipe, 1.0, true);
        let run = |eps: f64| {
            let prob =
                SteeringProblem::new(params(), 1.0, RadialState::zeros(10), &f * eps).unwrap();
            synthesize_linearized(&prob, &pipe).unwrap()
        };
        let (a, b) = (run(1e-2), run(2e-2));
        let ratio = b.v.max_abs() / a.v.max_abs();
        assert!((ratio - 2.0).abs() < 1e-9);
        assert!(a.v.check_admissible().is_ok());
        let got = simulate_linearized(&b.v, &params(), &pipe.sys).unwrap();
        let rel = (&got - &b.target.resized(24)).l2_norm() / b.target.l2_norm();
        assert!(rel < 1e-3, "relative endpoint error {rel:e}");
    }

    #[test]
    fn synthesis_rejects_uncovered_modes() {
        let pipe = small_pipe();
        let f = RadialState::pure_mode(15, 15).scale(c(0.0, 1e-3));
        let prob = SteeringProblem::new(params(), 1.0, RadialState::zeros(3), f).unwrap();
        assert!(synthesize_linearized(&prob, &pipe).is_err());
    }

    #[test]
    fn integrate_control_examples() {
        let z = ControlSignal::zero(1.0, 100).unwrap();
        let v = integrate_control(&z).unwrap();
        assert!(v.samples().iter().all(|&x| x == 0.0));

        let t = 1.7;
        let k = 2.0 * PI / t;
        let w = ControlSignal::from_fn(t, 20000, |s| (k * s).cos(), None).unwrap();
        let v = integrate_control(&w).unwrap();
        for (i, s) in v.times().enumerate().step_by(997) {
            assert!((v.samples()[i] - (k * s).sin() / k).abs() < 1e-8);
        }
        assert!(v.samples().last().unwrap().abs() < 1e-8);
        assert!(v.integral().abs() < 1e-8);
        assert_eq!(v.carried_derivative().unwrap(), w.samples());

        let bad = ControlSignal::from_fn(1.0, 100, |s| s, None).unwrap();
        assert!(matches!(integrate_control(&bad), Err(Error::Constraint(_))));
        let bad = ControlSignal::from_fn(1.0, 1000, |s| (2.0 * PI * s).sin(), None).unwrap();
        assert!(matches!(integrate_control(&bad), Err(Error::Constraint(_))));
    }

    #[test]
    fn endpoint_map_examples() {
        let pipe = small_pipe();
        let psi0 = phi_sharp(&params()).resized(24);
        let zero = ControlSignal::zero(1.0, 1000).unwrap();
        let end = endpoint_map(&zero, &psi0, &pipe.sys, 1024).unwrap();
        let free = free_evolution(&psi0, 1.0, &pipe.sys).unwrap();
        assert!((&end - &free).l2_norm() < 1e-10);

        let u = ControlSignal::from_fn(
            1.0,
            4096,
            |t| 0.05 * (2.0 * PI * t).sin(),
            Some(&|t: f64| 0.1 * PI * (2.0 * PI * t).cos()),
        )
        .unwrap();
        let end = endpoint_map(&u, &psi0, &pipe.sys, 4096).unwrap();
        assert!((end.l2_norm() - 1.0).abs() < 1e-10);
        let bad = ControlSignal::from_fn(1.0, 10, |t| t, None).unwrap();
        assert!(endpoint_map(&bad, &psi0, &pipe.sys, 10).is_err());
    }

    #[test]
    fn trivial_steering() {
        let pipe = small_pipe();
        let p = params();
        let psi0 = phi_sharp(&p);
        let psif = pipe.basis.wave_packet(&p, 1.0, 3).unwrap();
        let prob = SteeringProblem::new(p, 1.0, psi0, psif).unwrap();
        let rep = steer_local(&prob, &pipe, 5, 1e-10).unwrap();
        assert_eq!(rep.iterations, 0);
        assert!(rep.converged);
        assert_eq!(rep.u.max_abs(), 0.0);
    }

    fn sine_u(amp: f64, t: f64, m: usize) -> ControlSignal {
        let k = 2.0 * PI / t;
        ControlSignal::from_fn(
            t,
            m,
            |s| amp * (k * s).sin() + 0.5 * amp * (2.0 * k * s).sin(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn zero_control_radius() {
        let r = radius_from_control(&ControlSignal::zero(2.0, 50).unwrap()).unwrap();
        assert!((r.t_star - 2.0).abs() < 1e-12);
        assert!(r.radii.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn radius_endpoints_and_positivity() {
        let u = sine_u(0.1, 1.0, 4096);
        let r = radius_from_control(&u).unwrap();
        assert!((r.radii[0] - 1.0).abs() < 1e-8);
        assert!((r.radii.last().unwrap() - 1.0).abs() < 1e-8);
        assert!(r.radii.iter().all(|&x| x > 0.0));
        assert!((r.times.last().unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn radius_round_trip() {
        let u = sine_u(0.1, 1.3, 8192);
        let r = radius_from_control(&u).unwrap();
        let (t, back) = r.recover_control();
        let err = t
            .iter()
            .zip(&back)
            .map(|(&t, &b)| (u.value(t) - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "round trip error {err:e}");
        assert!(
            radius_from_control(&ControlSignal::from_fn(1.0, 10, |_| 1.0, None).unwrap()).is_err()
        );
    }

    #[test]
    fn disc_map_examples() {
        let t = compute_zeros(0, 6, 1e-12).unwrap();
        let basis = RadialBasis::new(&t, 6).unwrap();
        let psi = RadialState::new(vec![c(0.6, 0.0), c(0.0, 0.48), c(0.64, 0.0)]);
        let id = map_fixed_to_disc(&psi, &basis, 0.0, 0.0, 1.0, 11).unwrap();
        for (rho, val) in id.rho.iter().zip(&id.values) {
            assert!((val - basis.evaluate(&psi, *rho).unwrap()).norm() < 1e-15);
        }
        let radius = 1.3;
        let moved = map_fixed_to_disc(&psi, &basis, 0.07, -0.3, radius, 11).unwrap();
        for (rho, val) in moved.rho.iter().zip(&moved.values) {
            let xi = basis.evaluate(&psi, rho / radius).unwrap();
            assert!((val.norm() - xi.norm() / radius).abs() < 1e-14);
        }
        let q = QuadratureRule::gauss_legendre(128);
        let mass: f64 = q.integrate_composite(0.0, radius, 4, |rho| {
            disc_value(&psi, &basis, 0.07, -0.3, radius, rho)
                .unwrap()
                .norm_sqr()
                * rho
        });
        assert!((mass - psi.l2_norm_sqr()).abs() < 1e-8);
    }
}
