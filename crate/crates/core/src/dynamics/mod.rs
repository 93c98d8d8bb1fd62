// Copyright 2026 The discsteer Authors
// SPDX-License-Identifier: Apache-2.0

//! Fixed-domain dynamics on the first `N` radial modes.
//!
//! The Galerkin system is `i ċ = diag(λ) c + w(t) M c + f(t)`. One step of
//! [`simulate_bilinear`] is a Strang splitting: an exact half step of the
//! diagonal part, a Crank–Nicolson step of `w M` in the eigenbasis of `M`
//! (with `w` and `f` taken at the step midpoint), then another exact half
//! step. Every factor is unitary when `f = 0`.

mod signal;

use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bessel::{QuadratureRule, ZeroTable};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{RadialBasis, RadialState, TargetParams};

pub use signal::{ControlSignal, ADMISSIBLE_TOL};

/// Default number of time steps for `T = 1`, `N = 40`.
pub const DEFAULT_STEPS: usize = 1 << 14;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Truncated generator data, immutable after construction.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    lambdas: Vec<f64>,
    coupling: DMatrix<f64>,
    eigvals: Vec<f64>,
    eigvecs: DMatrix<f64>,
}

impl GalerkinSystem {
    /// The first `n` radial modes of the disc.
    pub fn new(table: &ZeroTable, n: usize) -> Result<Self> {
        let basis = RadialBasis::new(table, n)?;
        let rule = QuadratureRule::gauss_legendre(QuadratureRule::DEFAULT_ORDER);
        Self::from_parts(basis.lambdas(), basis.coupling_matrix(&rule))
    }

    /// Arbitrary real eigenvalues and symmetric coupling.
    pub fn from_parts(lambdas: Vec<f64>, coupling: DMatrix<f64>) -> Result<Self> {
        let n = lambdas.len();
        if n == 0 || coupling.nrows() != n || coupling.ncols() != n {
            return Err(Error::InvalidParams(format!(
                "{n} eigenvalues with a {}x{} coupling matrix",
                coupling.nrows(),
                coupling.ncols()
            )));
        }
        let asym = (&coupling - coupling.transpose()).amax();
        if asym > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "coupling asymmetric by {asym:.3e}"
            )));
        }
        let eig = SymmetricEigen::new(coupling.clone());
        Ok(Self {
            lambdas,
            coupling,
            eigvals: eig.eigenvalues.iter().copied().collect(),
            eigvecs: eig.eigenvectors,
        })
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.coupling
    }

    /// Spectral norm of `M`.
    pub fn coupling_norm(&self) -> f64 {
        self.eigvals.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    /// `M c`.
    pub fn apply_coupling(&self, c: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        let m = self.coupling.as_slice();
        let mut out = vec![Complex64::default(); n];
        for (j, cj) in c.iter().enumerate().take(n) {
            let col = &m[j * n..(j + 1) * n];
            for (o, &mij) in out.iter_mut().zip(col) {
                *o += cj * mij;
            }
        }
        out
    }

    fn modes_to_eigen(&self, c: &[Complex64], y: &mut [Complex64]) {
        let n = self.len();
        let q = self.eigvecs.as_slice();
        for (j, yj) in y.iter_mut().enumerate() {
            let col = &q[j * n..(j + 1) * n];
            *yj = col.iter().zip(c).map(|(&qij, ci)| ci * qij).sum();
        }
    }

    fn eigen_to_modes(&self, y: &[Complex64], c: &mut [Complex64]) {
        let n = self.len();
        let q = self.eigvecs.as_slice();
        c.fill(Complex64::default());
        for (j, yj) in y.iter().enumerate() {
            let col = &q[j * n..(j + 1) * n];
            for (ci, &qij) in c.iter_mut().zip(col) {
                *ci += yj * qij;
            }
        }
    }
}

/// `c_k ↦ e^{−iλ_k t} c_k`; modes past the system size are rejected.
pub fn free_evolution(state: &RadialState, t: f64, sys: &GalerkinSystem) -> Result<RadialState> {
    check_fits(state, sys)?;
    let coeffs = state
        .coeffs()
        .iter()
        .zip(sys.lambdas())
        .map(|(c, &l)| c * Complex64::from_polar(1.0, -l * t))
        .collect();
    Ok(RadialState::new(coeffs))
}

fn check_fits(state: &RadialState, sys: &GalerkinSystem) -> Result<()> {
    if state.len() > sys.len() {
        return Err(Error::IndexOutOfRange {
            index: state.len(),
            max: sys.len(),
        });
    }
    Ok(())
}

/// Step count and recording density of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationOptions {
    pub steps: usize,
    /// Record every `stride`-th step; the final state is always recorded.
    pub stride: usize,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            steps: DEFAULT_STEPS,
            stride: 1,
        }
    }
}

/// Recorded states of one run plus conservation diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<RadialState>,
    pub steps: usize,
    /// `max_t |‖c(t)‖² − ‖c(0)‖²|`.
    pub norm_drift: f64,
    /// Largest single-step change of `‖c‖²`.
    pub step_defect: f64,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn final_state(&self) -> &RadialState {
        self.states
            .last()
            .expect("trajectory holds at least the initial state")
    }

    /// CSV `t,k,re,im` with 1-based `k`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,k,re,im\n");
        for (t, s) in self.times.iter().zip(&self.states) {
            for (k, c) in s.coeffs().iter().enumerate() {
                let _ = writeln!(out, "{t:e},{},{:e},{:e}", k + 1, c.re, c.im);
            }
        }
        out
    }
}

/// Run description written beside a trajectory export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub modes: usize,
    pub steps: usize,
    pub horizon: f64,
    pub control_hash: String,
    pub norm_drift: f64,
}

impl RunManifest {
    pub fn new(traj: &Trajectory, control: &ControlSignal, sys: &GalerkinSystem) -> Self {
        Self {
            modes: sys.len(),
            steps: traj.steps,
            horizon: control.horizon(),
            control_hash: control_hash(control),
            norm_drift: traj.norm_drift,
        }
    }
}

/// SHA-256 of the horizon and samples (and carried derivative), hex encoded.
pub fn control_hash(control: &ControlSignal) -> String {
    let mut h = Sha256::new();
    h.update(control.horizon().to_le_bytes());
    for s in control.samples() {
        h.update(s.to_le_bytes());
    }
    if let Some(d) = control.carried_derivative() {
        h.update(b"d");
        for s in d {
            h.update(s.to_le_bytes());
        }
    }
    format!("{:x}", h.finalize())
}

/// Mode-space forcing `f(t)` written into the output slice.
pub type Forcing<'a> = &'a (dyn Fn(f64, &mut [Complex64]) + Sync);

/// Advance `i ċ = diag(λ)c + w(t) M c` over `[0, T]` from `state0`.
pub fn simulate_bilinear(
    state0: &RadialState,
    w: &ControlSignal,
    sys: &GalerkinSystem,
    steps: usize,
) -> Result<Trajectory> {
    simulate(state0, w, sys, SimulationOptions { steps, stride: 1 }, None)
}

/// [`simulate_bilinear`] with a recording stride and optional forcing.
pub fn simulate(
    state0: &RadialState,
    w: &ControlSignal,
    sys: &GalerkinSystem,
    opts: SimulationOptions,
    forcing: Option<Forcing<'_>>,
) -> Result<Trajectory> {
    let mut warnings = Vec::new();
    let need = 2.0 * w.horizon() * w.max_abs() * sys.coupling_norm();
    if (opts.steps as f64) < need {
        warnings.push(format!(
            "{} steps below resolution estimate {need:.0}",
            opts.steps
        ));
    }
    if opts.steps < w.intervals() {
        warnings.push(format!(
            "{} steps coarser than the {}-interval control grid",
            opts.steps,
            w.intervals()
        ));
    }
    for msg in &warnings {
        log::warn!("{msg}");
    }
    let mut traj = integrate(state0, w.horizon(), &|t| w.value(t), sys, opts, forcing)?;
    traj.warnings = warnings;
    Ok(traj)
}

fn integrate(
    state0: &RadialState,
    horizon: f64,
    w: &dyn Fn(f64) -> f64,
    sys: &GalerkinSystem,
    opts: SimulationOptions,
    forcing: Option<Forcing<'_>>,
) -> Result<Trajectory> {
    check_fits(state0, sys)?;
    if opts.steps == 0 || opts.stride == 0 {
        return Err(Error::InvalidParams(
            "steps and stride must be positive".into(),
        ));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "horizon {horizon} must be positive"
        )));
    }
    let n = sys.len();
    let h = horizon / opts.steps as f64;
    let half: Vec<Complex64> = sys
        .lambdas
        .iter()
        .map(|&l| Complex64::from_polar(1.0, -0.5 * l * h))
        .collect();

    let mut c = state0.resized(n).into_coeffs();
    let norm0 = state0.l2_norm_sqr();
    let mut y = vec![Complex64::default(); n];
    let mut f = vec![Complex64::default(); n];
    let mut g = vec![Complex64::default(); n];

    let mut times = vec![0.0];
    let mut states = vec![RadialState::new(c.clone())];
    let (mut drift, mut defect) = (0.0f64, 0.0f64);
    let mut prev = norm0;

    for step in 0..opts.steps {
        let t_mid = (step as f64 + 0.5) * h;
        for (ci, p) in c.iter_mut().zip(&half) {
            *ci *= p;
        }
        sys.modes_to_eigen(&c, &mut y);
        let wm = w(t_mid);
        if let Some(force) = forcing {
            force(t_mid, &mut f);
            sys.modes_to_eigen(&f, &mut g);
        }
        for (j, yj) in y.iter_mut().enumerate() {
            let theta = 0.5 * h * wm * sys.eigvals[j];
            let den = Complex64::new(1.0, theta);
            let mut num = Complex64::new(1.0, -theta) * *yj;
            if forcing.is_some() {
                num -= I * h * g[j];
            }
            *yj = num / den;
        }
        sys.eigen_to_modes(&y, &mut c);
        for (ci, p) in c.iter_mut().zip(&half) {
            *ci *= p;
        }

        let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        if !norm.is_finite() {
            return Err(Error::Internal(format!("state blew up at step {step}")));
        }
        drift = drift.max((norm - norm0).abs());
        defect = defect.max((norm - prev).abs());
        prev = norm;
        if (step + 1) % opts.stride == 0 || step + 1 == opts.steps {
            times.push((step + 1) as f64 * h);
            states.push(RadialState::new(c.clone()));
        }
    }
    Ok(Trajectory {
        times,
        states,
        steps: opts.steps,
        norm_drift: drift,
        step_defect: defect,
        warnings: Vec::new(),
    })
}

/// `Ψ(T)` of the linearized system around `ψ♯_t` with `Ψ(0) = 0`, by the
/// explicit expansion
/// `Ψ_k(T) = −i e^{−iλ_k T} Σ_{p≤3} s_p M_{kp} ∫₀ᵀ v̇(s) e^{i(λ_k−λ_p)s} ds`.
///
/// `v̇` is read as the piecewise-linear interpolant of its samples and each
/// time integral is evaluated exactly for that interpolant.
pub fn simulate_linearized(
    v: &ControlSignal,
    params: &TargetParams,
    sys: &GalerkinSystem,
) -> Result<RadialState> {
    v.check_admissible()?;
    if sys.len() < 3 {
        return Err(Error::InvalidParams(
            "linearization needs at least three modes".into(),
        ));
    }
    let dv = v.derivative_samples();
    let h = v.step();
    let horizon = v.horizon();
    let amps = params.amplitudes();
    let lam = sys.lambdas();
    let m = sys.coupling();
    let coeffs = par::map_range(0..sys.len(), |k| {
        let mut acc = Complex64::default();
        for p in 0..3 {
            let weight = amps[p] * m[(k, p)];
            if weight != 0.0 {
                acc += weight * oscillatory_integral(&dv, h, lam[k] - lam[p]);
            }
        }
        -I * Complex64::from_polar(1.0, -lam[k] * horizon) * acc
    });
    Ok(RadialState::new(coeffs))
}

/// The same `Ψ(T)` obtained by running the Galerkin stepper on
/// `i Ψ̇ = diag(λ)Ψ + v̇(t) M ψ♯(t)`.
pub fn simulate_linearized_galerkin(
    v: &ControlSignal,
    params: &TargetParams,
    sys: &GalerkinSystem,
    steps: usize,
) -> Result<RadialState> {
    v.check_admissible()?;
    let dv = v.derivative_samples();
    let amps = params.amplitudes();
    let lam = sys.lambdas().to_vec();
    let m = sys.coupling();
    let n = sys.len();
    let rate = |t: f64| {
        if t <= 0.0 {
            return dv[0];
        }
        let x = (t / v.step()).min((dv.len() - 1) as f64);
        let i = (x.floor() as usize).min(dv.len() - 2);
        dv[i] + (dv[i + 1] - dv[i]) * (x - i as f64)
    };
    let force = |t: f64, out: &mut [Complex64]| {
        let r = rate(t);
        let sharp: Vec<Complex64> = (0..3)
            .map(|p| amps[p] * Complex64::from_polar(1.0, -lam[p] * t))
            .collect();
        for (k, o) in out.iter_mut().enumerate() {
            *o = r
                * (0..3.min(n))
                    .map(|p| m[(k, p)] * sharp[p])
                    .sum::<Complex64>();
        }
    };
    let traj = integrate(
        &RadialState::zeros(n),
        v.horizon(),
        &|_| 0.0,
        sys,
        SimulationOptions {
            steps,
            stride: steps,
        },
        Some(&force),
    )?;
    Ok(traj.final_state().clone())
}

/// `∫₀ᵀ f(s) e^{iΩs} ds` for the piecewise-linear interpolant of samples `f`
/// on a grid of spacing `h`.
pub fn oscillatory_integral(f: &[f64], h: f64, omega: f64) -> Complex64 {
    let theta = omega * h;
    let (alpha, beta) = filon_weights(theta);
    let step = Complex64::from_polar(1.0, theta);
    let mut z = Complex64::new(1.0, 0.0);
    let (mut left, mut right) = (Complex64::default(), Complex64::default());
    for (i, pair) in f.windows(2).enumerate() {
        if i % 256 == 0 {
            z = Complex64::from_polar(1.0, theta * i as f64);
        }
        left += z * pair[0];
        right += z * pair[1];
        z *= step;
    }
    h * (alpha * left + beta * right)
}

/// `(∫₀¹ (1−x) e^{iθx} dx, ∫₀¹ x e^{iθx} dx)`.
fn filon_weights(theta: f64) -> (Complex64, Complex64) {
    if theta.abs() < 0.5 {
        let (mut a, mut b) = (Complex64::default(), Complex64::default());
        let mut term = Complex64::new(1.0, 0.0);
        for m in 0..24 {
            let mf = m as f64;
            b += term / (mf + 2.0);
            a += term / ((mf + 1.0) * (mf + 2.0));
            term *= I * theta / (mf + 1.0);
        }
        return (a, b);
    }
    let e = Complex64::from_polar(1.0, theta);
    let it = I * theta;
    let b = e / it + (e - 1.0) / (theta * theta);
    let a = (e - 1.0) / it - b;
    (a, b)
}
