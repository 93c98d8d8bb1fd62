// Copyright 2026 The discsteer Authors
// SPDX-License-Identifier: Apache-2.0

//! Frequency gaps `λ_n − λ_p`, their moment problem, and its minimum-norm
//! solution.
//!
//! Moments are `∫₀ᵀ w(t) e^{iω t} dt`. The minimum-norm `w` lies in the span
//! of `e^{−iω_j t}` over the symmetric set `{±ω_j}`, plus `t ↦ t` when the
//! first-moment constraint `∫₀ᵀ t w(t) dt = d̃` is imposed.

use std::collections::HashSet;
use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::ZeroTable;
use crate::dynamics::ControlSignal;
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{RadialBasis, RadialState, TargetParams};

/// Largest accepted Gram condition number.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Largest accepted `|Re⟨f, ψ♯_T⟩|` for a target.
pub const TANGENT_TOL: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// One nonnegative frequency and the eigenvalue pair it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub omega: f64,
    /// `(n, p)` for `λ_n − λ_p`; `None` for the zero frequency.
    pub origin: Option<(usize, usize)>,
}

/// Sorted `{0} ∪ {λ_n − λ_p : p ≤ 3, n > p}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySet {
    entries: Vec<Frequency>,
}

impl FrequencySet {
    /// Sorts and validates arbitrary entries; the first must be zero.
    pub fn from_entries(mut entries: Vec<Frequency>) -> Result<Self> {
        entries.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        if entries.first().map(|f| f.omega) != Some(0.0) {
            return Err(Error::InvalidParams("frequency set must start at 0".into()));
        }
        if let Some(w) = entries.windows(2).find(|w| w[1].omega <= w[0].omega) {
            return Err(Error::Resonance {
                collisions: vec![format!("{:?} = {:?}", w[0].origin, w[1].origin)],
                min_gap: 0.0,
            });
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Frequency] {
        &self.entries
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.entries.iter().map(|f| f.omega).collect()
    }

    /// The `k` smallest frequencies (including 0).
    pub fn first(&self, k: usize) -> Self {
        Self {
            entries: self.entries[..k.clamp(1, self.len())].to_vec(),
        }
    }

    /// Index of the slot with origin `(n, p)`.
    pub fn position(&self, n: usize, p: usize) -> Option<usize> {
        self.entries.iter().position(|f| f.origin == Some((n, p)))
    }

    /// Whether every gap `λ_n − λ_p`, `p < min(n, 4)`, is present.
    pub fn covers_mode(&self, n: usize) -> bool {
        let have: HashSet<_> = self.entries.iter().filter_map(|f| f.origin).collect();
        (1..n.min(4)).all(|p| have.contains(&(n, p)))
    }

    /// `(−ω_{K−1}, …, −ω_1, 0, ω_1, …, ω_{K−1})`.
    pub fn symmetric(&self) -> Vec<f64> {
        let pos = self.entries[1..].iter().map(|f| f.omega);
        pos.clone()
            .rev()
            .map(|w| -w)
            .chain(std::iter::once(0.0))
            .chain(pos)
            .collect()
    }

    /// Smallest gap between consecutive frequencies and the pair realising it.
    pub fn min_gap(&self) -> Option<(f64, Frequency, Frequency)> {
        self.entries
            .windows(2)
            .map(|w| (w[1].omega - w[0].omega, w[0], w[1]))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// Smallest gap among frequencies sharing the same `n`.
    pub fn packet_min_gap(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (i, a) in self.entries.iter().enumerate() {
            for b in &self.entries[i + 1..] {
                if let (Some((na, _)), Some((nb, _))) = (a.origin, b.origin) {
                    if na == nb {
                        let g = b.omega - a.omega;
                        best = Some(best.map_or(g, |x| x.min(g)));
                    }
                }
            }
        }
        best
    }
}

/// `γ̃ = min(λ₃ − λ₂, λ₂ − λ₁)`.
pub fn gamma_tilde(table: &ZeroTable) -> Result<f64> {
    let l = |k| table.get(0, k).map(|z| z * z);
    Ok((l(3)? - l(2)?).min(l(2)? - l(1)?))
}

/// Default horizon `max(1, 2π/γ̃)`.
pub fn default_horizon(table: &ZeroTable) -> Result<f64> {
    Ok((2.0 * PI / gamma_tilde(table)?).max(1.0))
}

/// All gaps `λ_n − λ_p`, `p ∈ {1,2,3}`, `p < n ≤ n_max`, plus 0, sorted.
pub fn build_frequencies(table: &ZeroTable, n_max: usize) -> Result<FrequencySet> {
    if n_max == 0 || n_max > table.k_max() {
        return Err(Error::IndexOutOfRange {
            index: n_max,
            max: table.k_max(),
        });
    }
    let lam: Vec<f64> = table.order(0)[..n_max].iter().map(|z| z * z).collect();
    let mut entries = vec![Frequency {
        omega: 0.0,
        origin: None,
    }];
    for n in 2..=n_max {
        for p in 1..n.min(4) {
            entries.push(Frequency {
                omega: lam[n - 1] - lam[p - 1],
                origin: Some((n, p)),
            });
        }
    }
    entries.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    let threshold = 10.0 * table.tol();
    let collisions = collisions(&entries, threshold);
    if !collisions.is_empty() {
        let min_gap = entries
            .windows(2)
            .map(|w| w[1].omega - w[0].omega)
            .fold(f64::MAX, f64::min);
        return Err(Error::Resonance {
            collisions,
            min_gap,
        });
    }
    Ok(FrequencySet { entries })
}

fn collisions(sorted: &[Frequency], threshold: f64) -> Vec<String> {
    sorted
        .windows(2)
        .filter(|w| w[1].omega - w[0].omega < threshold)
        .map(|w| {
            format!(
                "{:?} ~ {:?} (gap {:.3e})",
                w[0].origin,
                w[1].origin,
                w[1].omega - w[0].omega
            )
        })
        .collect()
}

/// Outcome of the exhaustive distinctness scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonResonance {
    pub count: usize,
    pub min_gap: f64,
    pub closest: (Frequency, Frequency),
    pub packet_min_gap: f64,
    pub gamma_tilde: f64,
}

/// Minimum separation of the gap set for `n ≤ n_max`.
pub fn check_nonresonance(table: &ZeroTable, n_max: usize) -> Result<NonResonance> {
    let freqs = build_frequencies(table, n_max)?;
    let (min_gap, a, b) = freqs
        .min_gap()
        .ok_or_else(|| Error::InvalidParams("need n_max >= 2 for a gap".into()))?;
    Ok(NonResonance {
        count: freqs.len(),
        min_gap,
        closest: (a, b),
        packet_min_gap: freqs.packet_min_gap().unwrap_or(f64::INFINITY),
        gamma_tilde: gamma_tilde(table)?,
    })
}

/// `max_x #{ω ∈ [x, x + r]} / r` over the symmetric extension, per `r`.
pub fn upper_density(freqs: &FrequencySet, r_values: &[f64]) -> Vec<f64> {
    let pts = freqs.symmetric();
    r_values
        .iter()
        .map(|&r| {
            let (mut best, mut lo) = (0usize, 0usize);
            for hi in 0..pts.len() {
                while pts[hi] - pts[lo] > r {
                    lo += 1;
                }
                best = best.max(hi - lo + 1);
            }
            best as f64 / r
        })
        .collect()
}

/// `∫₀ᵀ e^{iΔt} dt`.
fn exp_integral(delta: f64, horizon: f64) -> Complex64 {
    if delta == 0.0 {
        return Complex64::new(horizon, 0.0);
    }
    let half = 0.5 * delta * horizon;
    Complex64::from_polar(2.0 * half.sin() / delta, half)
}

/// `∫₀ᵀ t e^{iωt} dt`.
fn ramp_integral(omega: f64, horizon: f64) -> Complex64 {
    let x = omega * horizon;
    if x.abs() < 0.5 {
        let mut term = Complex64::new(horizon * horizon, 0.0);
        let mut acc = Complex64::default();
        for m in 0..30 {
            acc += term / (m as f64 + 2.0);
            term *= I * x / (m as f64 + 1.0);
        }
        return acc;
    }
    let e = Complex64::from_polar(1.0, x);
    horizon * e / (I * omega) + (e - 1.0) / (omega * omega)
}

/// `∫₀ᵀ e^{−iωt} dt` antiderivative helper: `∫₀ᵗ e^{−iωs} ds`.
fn exp_primitive(omega: f64, t: f64) -> Complex64 {
    exp_integral(-omega, t)
}

/// Gram matrix `G_{kj} = ∫₀ᵀ b_j b̄_k` of `b_j = e^{−iω_j t}` over the
/// symmetric extension, with `t ↦ t` appended when `ramp` is set.
pub fn gram_matrix(freqs: &FrequencySet, horizon: f64, ramp: bool) -> DMatrix<Complex64> {
    gram_from_omegas(&freqs.symmetric(), horizon, ramp)
}

fn gram_from_omegas(om: &[f64], horizon: f64, ramp: bool) -> DMatrix<Complex64> {
    let n = om.len() + usize::from(ramp);
    let mut g = DMatrix::from_fn(n, n, |k, j| {
        if k < om.len() && j < om.len() {
            exp_integral(om[k] - om[j], horizon)
        } else {
            Complex64::default()
        }
    });
    if ramp {
        let r = om.len();
        for (k, &w) in om.iter().enumerate() {
            let f = ramp_integral(w, horizon);
            g[(k, r)] = f;
            g[(r, k)] = f.conj();
        }
        g[(r, r)] = Complex64::new(horizon.powi(3) / 3.0, 0.0);
    }
    g
}

/// Extreme eigenvalues `(m, M)` of a Hermitian matrix.
pub fn eigen_bounds(g: &DMatrix<Complex64>) -> (f64, f64) {
    let e = SymmetricEigen::new(g.clone()).eigenvalues;
    let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Ingham constants of the exponential family (no ramp element).
pub fn ingham_constants(freqs: &FrequencySet, horizon: f64) -> (f64, f64) {
    eigen_bounds(&gram_matrix(freqs, horizon, false))
}

/// Frequencies, prescribed moments and horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentProblem {
    pub freqs: FrequencySet,
    /// `d[k] = ∫ w e^{iω_k t}`, aligned with `freqs`; `d[0]` real.
    pub d: Vec<Complex64>,
    /// `∫ t w(t) dt`, when constrained.
    pub d_tilde: Option<f64>,
    pub horizon: f64,
}

impl MomentProblem {
    pub fn new(
        freqs: FrequencySet,
        mut d: Vec<Complex64>,
        d_tilde: Option<f64>,
        horizon: f64,
    ) -> Result<Self> {
        if d.len() != freqs.len() {
            return Err(Error::InvalidParams(format!(
                "{} moments for {} frequencies",
                d.len(),
                freqs.len()
            )));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "horizon {horizon} must be positive"
            )));
        }
        if d.iter().any(|z| !z.is_finite()) || d_tilde.is_some_and(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("moments must be finite".into()));
        }
        if d[0].im.abs() > 1e-12 * (1.0 + d[0].re.abs()) {
            return Err(Error::InvalidParams(format!("d_0 = {} is not real", d[0])));
        }
        d[0].im = 0.0;
        Ok(Self {
            freqs,
            d,
            d_tilde,
            horizon,
        })
    }

    /// `Σ|d_k|²` over the truncation.
    pub fn energy(&self) -> f64 {
        self.d.iter().map(|z| z.norm_sqr()).sum::<f64>() + self.d_tilde.map_or(0.0, |x| x * x)
    }

    /// Right-hand side over the symmetric extension: `d_{−k} = d̄_k`.
    fn symmetric_rhs(&self) -> Vec<Complex64> {
        let pos = &self.d[1..];
        let mut rhs: Vec<Complex64> = pos.iter().rev().map(|z| z.conj()).collect();
        rhs.push(self.d[0]);
        rhs.extend_from_slice(pos);
        if let Some(x) = self.d_tilde {
            rhs.push(Complex64::new(x, 0.0));
        }
        rhs
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Self = serde_json::from_str(text)?;
        let freqs = FrequencySet::from_entries(raw.freqs.entries)?;
        Self::new(freqs, raw.d, raw.d_tilde, raw.horizon)
    }
}

/// Solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentDiagnostics {
    pub condition: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// `max |G x − d|` of the solved system.
    pub residual: f64,
    /// `max |Im w|` on a check grid.
    pub imaginary: f64,
    pub jitter: f64,
}

/// `w(t) = Σ_j x_j e^{−iω_j t} + x_r t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSolution {
    pub omegas: Vec<f64>,
    pub coeffs: Vec<Complex64>,
    pub ramp: Option<Complex64>,
    pub horizon: f64,
    pub diagnostics: MomentDiagnostics,
}

impl MomentSolution {
    pub fn value_complex(&self, t: f64) -> Complex64 {
        let mut acc: Complex64 = self
            .omegas
            .iter()
            .zip(&self.coeffs)
            .map(|(&w, x)| x * Complex64::from_polar(1.0, -w * t))
            .sum();
        if let Some(r) = self.ramp {
            acc += r * t;
        }
        acc
    }

    /// Real part of `w(t)`.
    pub fn value(&self, t: f64) -> f64 {
        self.value_complex(t).re
    }

    /// `∫₀ᵗ w(s) ds`, real part.
    pub fn primitive(&self, t: f64) -> f64 {
        let mut acc: Complex64 = self
            .omegas
            .iter()
            .zip(&self.coeffs)
            .map(|(&w, x)| x * exp_primitive(w, t))
            .sum();
        if let Some(r) = self.ramp {
            acc += r * (0.5 * t * t);
        }
        acc.re
    }

    /// `∫₀ᵀ w(t) e^{iωt} dt` in closed form.
    pub fn moment(&self, omega: f64) -> Complex64 {
        let mut acc: Complex64 = self
            .omegas
            .iter()
            .zip(&self.coeffs)
            .map(|(&w, x)| x * exp_integral(omega - w, self.horizon))
            .sum();
        if let Some(r) = self.ramp {
            acc += r * ramp_integral(omega, self.horizon);
        }
        acc
    }

    /// `(w(t_i), ∫₀^{t_i} w)` on `intervals + 1` grid points.
    pub fn sample(&self, intervals: usize) -> (Vec<f64>, Vec<f64>) {
        const CHUNK: usize = 2048;
        let h = self.horizon / intervals as f64;
        let total = intervals + 1;
        let chunks = par::map_range(0..total.div_ceil(CHUNK), |c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            let t0 = start as f64 * h;
            let mut w = vec![Complex64::default(); end - start];
            let mut v = vec![Complex64::default(); end - start];
            for (&om, x) in self.omegas.iter().zip(&self.coeffs) {
                let step = Complex64::from_polar(1.0, -om * h);
                let mut z = Complex64::from_polar(1.0, -om * t0);
                for i in 0..end - start {
                    w[i] += x * z;
                    v[i] += if om == 0.0 {
                        x * ((start + i) as f64 * h)
                    } else {
                        x * (z - 1.0) / (-I * om)
                    };
                    z *= step;
                }
            }
            let mut out_w = Vec::with_capacity(end - start);
            let mut out_v = Vec::with_capacity(end - start);
            for i in 0..end - start {
                let t = (start + i) as f64 * h;
                let (mut wi, mut vi) = (w[i], v[i]);
                if let Some(r) = self.ramp {
                    wi += r * t;
                    vi += r * (0.5 * t * t);
                }
                out_w.push(wi.re);
                out_v.push(vi.re);
            }
            (out_w, out_v)
        });
        let mut w = Vec::with_capacity(total);
        let mut v = Vec::with_capacity(total);
        for (a, b) in chunks {
            w.extend(a);
            v.extend(b);
        }
        (w, v)
    }

    /// `w` sampled as a control signal.
    pub fn to_signal(&self, intervals: usize) -> Result<ControlSignal> {
        ControlSignal::new(self.horizon, self.sample(intervals).0)
    }

    /// `v(t) = ∫₀ᵗ w` with `w` carried as its exact derivative.
    pub fn integrated_signal(&self, intervals: usize) -> Result<ControlSignal> {
        let (w, v) = self.sample(intervals);
        ControlSignal::with_derivative(self.horizon, v, w)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Minimum-`L²` solution of the truncated moment problem.
pub fn solve_moment(problem: &MomentProblem) -> Result<MomentSolution> {
    let omegas = problem.freqs.symmetric();
    let ramp = problem.d_tilde.is_some();
    let horizon = problem.horizon;
    let g = gram_from_omegas(&omegas, horizon, ramp);
    let (lo, hi) = eigen_bounds(&g);
    if lo <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let condition = hi / lo;
    if condition > CONDITION_LIMIT {
        return Err(Error::Conditioning {
            condition,
            limit: CONDITION_LIMIT,
            gap: problem.freqs.min_gap().map_or(f64::INFINITY, |m| m.0),
            horizon,
            count: problem.freqs.len(),
        });
    }
    let rhs = DVector::from_vec(problem.symmetric_rhs());
    let (chol, jitter) = match Cholesky::new(g.clone()) {
        Some(c) => (c, 0.0),
        None => {
            let eps = 1e-14 * g.diagonal().iter().map(|z| z.re).sum::<f64>() / g.nrows() as f64;
            let shifted =
                &g + DMatrix::from_diagonal_element(g.nrows(), g.nrows(), Complex64::new(eps, 0.0));
            (
                Cholesky::new(shifted).ok_or(Error::NotPositiveDefinite)?,
                eps,
            )
        }
    };
    let x = chol.solve(&rhs);
    let residual = (&g * &x - &rhs)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let mut coeffs: Vec<Complex64> = x.iter().copied().collect();
    let ramp_coeff = if ramp { coeffs.pop() } else { None };
    let mut sol = MomentSolution {
        omegas,
        coeffs,
        ramp: ramp_coeff,
        horizon,
        diagnostics: MomentDiagnostics {
            condition,
            min_eigenvalue: lo,
            max_eigenvalue: hi,
            residual,
            imaginary: 0.0,
            jitter,
        },
    };
    let check = 512;
    sol.diagnostics.imaginary = (0..=check)
        .map(|i| {
            sol.value_complex(horizon * i as f64 / check as f64)
                .im
                .abs()
        })
        .fold(0.0, f64::max);
    Ok(sol)
}

/// Moment data steering the linearized system from zero to `psi_f` at `T`.
///
/// Slots with origin `(n, p)`, `n ≥ 4`, get `i s_p f_n e^{iλ_n T} / M_{np}`;
/// the three low slots solve the coupled mode-1..3 equations with the free
/// constant `C` real.
pub fn build_rhs(
    psi_f: &RadialState,
    params: &TargetParams,
    horizon: f64,
    basis: &RadialBasis,
    freqs: &FrequencySet,
) -> Result<MomentProblem> {
    let n_modes = psi_f.len();
    if n_modes > basis.len() {
        return Err(Error::IndexOutOfRange {
            index: n_modes,
            max: basis.len(),
        });
    }
    let sharp = basis.wave_packet(params, horizon, n_modes.max(3))?;
    let tangent = psi_f.resized(n_modes.max(3)).inner(&sharp).re;
    if tangent.abs() > TANGENT_TOL {
        return Err(Error::NotTangent(tangent));
    }
    for n in 2..=n_modes {
        if psi_f.coeff(n) != Complex64::default() && !freqs.covers_mode(n) {
            return Err(Error::InvalidParams(format!(
                "frequency set does not cover mode {n} of the target"
            )));
        }
    }
    let s = params.amplitudes();
    let lam = |k: usize| basis.lambda(k);
    let m = |a: usize, b: usize| basis.coupling_closed_form(a, b);
    let rot = |k: usize| -> Result<Complex64> { Ok(Complex64::from_polar(1.0, lam(k)? * horizon)) };
    let f = |k: usize| psi_f.coeff(k);

    let rhs = s[0] * rot(1)? * f(1)
        + s[1] * rot(2)?.conj() * f(2).conj()
        + s[2] * rot(3)?.conj() * f(3).conj();
    let c = Complex64::new(rhs.im / (2.0 * m(2, 3)? * s[1] * s[2]), 0.0);
    let x = (I * rot(2)? * f(2) - s[2] * m(2, 3)? * c.conj()) / (m(2, 1)? * s[0]);
    let y = (I * rot(3)? * f(3) - s[1] * m(3, 2)? * c) / (m(3, 1)? * s[0]);

    let mut d = vec![Complex64::default(); freqs.len()];
    for (slot, fr) in d.iter_mut().zip(freqs.entries()) {
        *slot = match fr.origin {
            None => Complex64::default(),
            Some((2, 1)) => x,
            Some((3, 1)) => y,
            Some((3, 2)) => c,
            Some((n, p)) if n <= n_modes => I * s[p - 1] * f(n) * rot(n)? / m(n, p)?,
            Some(_) => Complex64::default(),
        };
    }
    MomentProblem::new(freqs.clone(), d, Some(0.0), horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::{compute_zeros, QuadratureRule};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(k: usize) -> ZeroTable {
        compute_zeros(0, k, 1e-12).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn frequency_counts_and_tags() {
        let t = table(10);
        let f2 = build_frequencies(&t, 2).unwrap();
        assert_eq!(f2.len(), 2);
        let l = |k| t.get(0, k).unwrap().powi(2);
        assert_eq!(f2.entries()[1].omega, l(2) - l(1));
        assert_eq!(f2.entries()[1].origin, Some((2, 1)));
        assert_eq!(build_frequencies(&t, 4).unwrap().len(), 7);
        let f = build_frequencies(&t, 10).unwrap();
        assert_eq!(f.len(), 1 + 3 * 10 - 6);
        for fr in &f.entries()[1..] {
            let (n, p) = fr.origin.unwrap();
            assert_eq!(fr.omega, l(n) - l(p));
        }
        let order: Vec<_> = f.entries()[1..5]
            .iter()
            .map(|f| f.origin.unwrap())
            .collect();
        assert_eq!(order, vec![(2, 1), (3, 2), (4, 3), (3, 1)]);
        assert!(build_frequencies(&t, 11).is_err());
        assert!(build_frequencies(&t, 0).is_err());
    }

    #[test]
    fn coverage_and_positions() {
        let f = build_frequencies(&table(8), 8).unwrap();
        assert!(f.covers_mode(8) && f.covers_mode(2));
        assert!(!f.covers_mode(9));
        let sub = f.first(5);
        assert!(sub.covers_mode(3) && !sub.covers_mode(4));
        assert_eq!(f.position(2, 1), Some(1));
        assert_eq!(f.position(9, 1), None);
    }

    #[test]
    fn nonresonance_small_and_packets() {
        let t = table(10);
        let r = check_nonresonance(&t, 10).unwrap();
        assert!(r.min_gap > 0.0);
        assert!(r.packet_min_gap >= r.gamma_tilde);
        assert!((r.gamma_tilde - 24.68806).abs() < 1e-4);
    }

    #[test]
    fn resonance_is_reported() {
        let e = vec![
            Frequency {
                omega: 0.0,
                origin: None,
            },
            Frequency {
                omega: 1.0,
                origin: Some((2, 1)),
            },
            Frequency {
                omega: 1.0,
                origin: Some((3, 1)),
            },
        ];
        assert!(matches!(
            FrequencySet::from_entries(e),
            Err(Error::Resonance { .. })
        ));
        let bad = vec![Frequency {
            omega: 1.0,
            origin: None,
        }];
        assert!(FrequencySet::from_entries(bad).is_err());
    }

    #[test]
    fn default_horizon_is_one() {
        let t = table(3);
        assert_eq!(default_horizon(&t).unwrap(), 1.0);
        assert!((2.0 * PI / gamma_tilde(&t).unwrap() - 0.254502).abs() < 1e-5);
    }

    #[test]
    fn density_examples() {
        let t = table(60);
        let f = build_frequencies(&t, 60).unwrap();
        let j3 = t.get(0, 3).unwrap();
        let rs = [10.0, 100.0, 1000.0, 5000.0, 10000.0];
        let est = upper_density(&f, &rs);
        for (r, e) in rs.iter().zip(&est) {
            assert!(*e <= 3.0 * (r + j3 * j3).sqrt() / r, "r={r}: {e}");
        }
        assert!(est.windows(2).skip(1).all(|w| w[1] < w[0]));
        let zero = f.first(1);
        let d = upper_density(&zero, &[1.0, 2.0, 8.0]);
        assert_eq!(d, vec![1.0, 0.5, 0.125]);
    }

    #[test]
    fn gram_examples() {
        let t = table(3);
        let zero = build_frequencies(&t, 1).unwrap();
        let g = gram_matrix(&zero, 2.5, false);
        assert_eq!(g.shape(), (1, 1));
        assert_eq!(g[(0, 0)], c(2.5, 0.0));

        let horizon = 2.0;
        let step = 2.0 * PI / horizon;
        let entries = (0..5)
            .map(|k| Frequency {
                omega: k as f64 * step,
                origin: (k > 0).then_some((k, 0)),
            })
            .collect();
        let harmonic = FrequencySet::from_entries(entries).unwrap();
        let g = gram_matrix(&harmonic, horizon, false);
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let want = if i == j { horizon } else { 0.0 };
                assert!((g[(i, j)] - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn gram_entries_match_quadrature() {
        let f = build_frequencies(&table(5), 5).unwrap();
        let horizon = 0.7;
        let g = gram_matrix(&f, horizon, true);
        let om = f.symmetric();
        let q = QuadratureRule::gauss_legendre(40);
        let basis = |j: usize, t: f64| {
            if j < om.len() {
                Complex64::from_polar(1.0, -om[j] * t)
            } else {
                c(t, 0.0)
            }
        };
        for k in 0..g.nrows() {
            for j in 0..g.ncols() {
                let want: Complex64 =
                    q.integrate_composite(0.0, horizon, 64, |t| basis(j, t) * basis(k, t).conj());
                assert!((g[(k, j)] - want).norm() < 1e-12, "({k},{j})");
            }
        }
        assert!((g.adjoint() - &g).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn ramp_integral_branches_agree() {
        for w in [0.49999, 0.5, 0.50001] {
            let a = ramp_integral(w, 1.0);
            let q = QuadratureRule::gauss_legendre(30);
            let b: Complex64 = q.integrate(|t| t * Complex64::from_polar(1.0, w * t));
            assert!((a - b).norm() < 1e-14);
        }
        assert_eq!(ramp_integral(0.0, 2.0), c(2.0, 0.0));
    }

    #[test]
    fn trivial_moment_problems() {
        let t = table(8);
        let f = build_frequencies(&t, 8).unwrap();
        let zero = MomentProblem::new(f.clone(), vec![c(0.0, 0.0); f.len()], Some(0.0), 1.0);
        let sol = solve_moment(&zero.unwrap()).unwrap();
        assert!(sol.coeffs.iter().all(|x| x.norm() == 0.0));
        let single = MomentProblem::new(f.first(1), vec![c(1.0, 0.0)], None, 4.0).unwrap();
        let sol = solve_moment(&single).unwrap();
        for tt in [0.0, 1.3, 4.0] {
            assert!((sol.value(tt) - 0.25).abs() < 1e-15);
        }
        assert!(MomentProblem::new(f.first(1), vec![c(1.0, 0.1)], None, 1.0).is_err());
        assert!(MomentProblem::new(f.first(2), vec![c(1.0, 0.0)], None, 1.0).is_err());
    }

    fn random_problem(rng: &mut ChaCha8Rng, freqs: &FrequencySet, horizon: f64) -> MomentProblem {
        let d = (0..freqs.len())
            .map(|k| {
                let s = 1.0 / (1.0 + k as f64);
                let im = if k == 0 {
                    0.0
                } else {
                    rng.random_range(-1.0..1.0)
                };
                c(s * rng.random_range(-1.0..1.0), s * im)
            })
            .collect();
        MomentProblem::new(freqs.clone(), d, Some(rng.random_range(-0.1..0.1)), horizon).unwrap()
    }

    #[test]
    fn solver_reproduces_moments_by_quadrature() {
        let t = table(20);
        let f = build_frequencies(&t, 20).unwrap().first(20);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = QuadratureRule::gauss_legendre(32);
        for _ in 0..3 {
            let p = random_problem(&mut rng, &f, 1.0);
            let sol = solve_moment(&p).unwrap();
            assert!(sol.diagnostics.imaginary < 1e-10);
            for (fr, d) in f.entries().iter().zip(&p.d) {
                let got: Complex64 = q.integrate_composite(0.0, 1.0, 400, |s| {
                    sol.value(s) * Complex64::from_polar(1.0, fr.omega * s)
                });
                assert!((got - d).norm() < 1e-8, "{:?}", fr.origin);
                assert!((sol.moment(fr.omega) - d).norm() < 1e-10);
            }
            let first: f64 = q.integrate_composite(0.0, 1.0, 400, |s| s * sol.value(s));
            assert!((first - p.d_tilde.unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn sampled_primitive_matches_closed_form() {
        let t = table(6);
        let f = build_frequencies(&t, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sol = solve_moment(&random_problem(&mut rng, &f, 1.3)).unwrap();
        let (w, v) = sol.sample(5000);
        for i in (0..=5000).step_by(611) {
            let tt = 1.3 * i as f64 / 5000.0;
            assert!((w[i] - sol.value(tt)).abs() < 1e-11);
            assert!((v[i] - sol.primitive(tt)).abs() < 1e-11);
        }
        assert!((v[5000] - sol.moment(0.0).re).abs() < 1e-10);
    }

    #[test]
    fn ill_conditioned_problem_is_rejected() {
        let f = build_frequencies(&table(40), 40).unwrap();
        let p = MomentProblem::new(f.clone(), vec![c(0.0, 0.0); f.len()], Some(0.0), 1e-3).unwrap();
        match solve_moment(&p) {
            Err(Error::Conditioning { count, .. }) => assert_eq!(count, f.len()),
            Err(Error::NotPositiveDefinite) => {}
            other => panic!("expected conditioning failure, got {other:?}"),
        }
    }

    fn tangent_target(
        basis: &RadialBasis,
        params: &TargetParams,
        horizon: f64,
        raw: RadialState,
    ) -> RadialState {
        let sharp = basis.wave_packet(params, horizon, raw.len()).unwrap();
        raw.project_tangent(&sharp)
    }

    /// Ψ(T) from the expansion, evaluated directly from moment values.
    fn expansion_from_moments(
        p: &MomentProblem,
        basis: &RadialBasis,
        params: &TargetParams,
        n: usize,
    ) -> RadialState {
        let s = params.amplitudes();
        let moment = |k: usize, q: usize| -> Complex64 {
            if k == q {
                return p.d[0];
            }
            let (a, b, conj) = if k > q { (k, q, false) } else { (q, k, true) };
            let z = p.d[p.freqs.position(a, b).unwrap()];
            if conj {
                z.conj()
            } else {
                z
            }
        };
        let coeffs = (1..=n)
            .map(|k| {
                let mut acc = Complex64::default();
                for q in 1..=3 {
                    let m = if k == q {
                        0.0
                    } else {
                        basis.coupling_closed_form(q, k).unwrap()
                    };
                    acc += s[q - 1] * m * moment(k, q);
                }
                let lam = basis.lambda(k).unwrap();
                -I * Complex64::from_polar(1.0, -lam * p.horizon) * acc
            })
            .collect();
        RadialState::new(coeffs)
    }

    #[test]
    fn rhs_inverts_the_expansion() {
        let t = table(12);
        let basis = RadialBasis::new(&t, 12).unwrap();
        let params = TargetParams::new(0.25, 0.25).unwrap();
        let f = build_frequencies(&t, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let raw = RadialState::new(
                (0..12)
                    .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect(),
            );
            let target = tangent_target(&basis, &params, 1.0, raw);
            let p = build_rhs(&target, &params, 1.0, &basis, &f).unwrap();
            assert_eq!(p.d[0], c(0.0, 0.0));
            assert_eq!(p.d_tilde, Some(0.0));
            assert_eq!(p.d[p.freqs.position(3, 2).unwrap()].im, 0.0);
            let back = expansion_from_moments(&p, &basis, &params, 12);
            assert!((&back - &target).l2_norm() < 1e-12 * target.l2_norm());
        }
    }

    #[test]
    fn rhs_examples() {
        let t = table(12);
        let basis = RadialBasis::new(&t, 12).unwrap();
        let params = TargetParams::new(0.2, 0.3).unwrap();
        let f = build_frequencies(&t, 12).unwrap();
        let zero = build_rhs(&RadialState::zeros(12), &params, 1.0, &basis, &f).unwrap();
        assert!(zero.d.iter().all(|z| *z == c(0.0, 0.0)));

        let five = RadialState::pure_mode(5, 12).scale(c(0.3, -0.2));
        let p = build_rhs(&five, &params, 1.0, &basis, &f).unwrap();
        let nonzero: Vec<_> = f
            .entries()
            .iter()
            .zip(&p.d)
            .filter(|(_, d)| d.norm() > 0.0)
            .map(|(fr, _)| fr.origin.unwrap())
            .collect();
        assert_eq!(nonzero.len(), 3);
        assert!(nonzero.iter().all(|&(n, _)| n == 5));

        let sharp = basis.wave_packet(&params, 1.0, 12).unwrap();
        let radial = sharp.scale(c(1.0, 0.0));
        assert!(matches!(
            build_rhs(&radial, &params, 1.0, &basis, &f),
            Err(Error::NotTangent(_))
        ));
        assert!(build_rhs(&five, &params, 1.0, &basis, &f.first(5)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = table(6);
        let f = build_frequencies(&t, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_problem(&mut rng, &f, 1.0);
        let back = MomentProblem::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(back, p);
        let sol = solve_moment(&p).unwrap();
        let json = sol.to_json().unwrap();
        assert!(json.contains("\"condition\""));
        let sol2: MomentSolution = serde_json::from_str(&json).unwrap();
        assert_eq!(sol2, sol);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn low_rhs_constant_is_real_on_tangent_vectors(
            re in proptest::collection::vec(-1.0f64..1.0, 3),
            im in proptest::collection::vec(-1.0f64..1.0, 3),
            th2 in 0.05f64..0.45,
            th3 in 0.05f64..0.45,
            horizon in 0.2f64..3.0,
        ) {
            let t = table(3);
            let basis = RadialBasis::new(&t, 3).unwrap();
            let params = TargetParams::new(th2, th3).unwrap();
            let raw = RadialState::new((0..3).map(|k| c(re[k], im[k])).collect());
            let target = tangent_target(&basis, &params, horizon, raw);
            let s = params.amplitudes();
            let rot = |k: usize| Complex64::from_polar(1.0, basis.lambda(k).unwrap() * horizon);
            let rhs = s[0] * rot(1) * target.coeff(1)
                + s[1] * rot(2).conj() * target.coeff(2).conj()
                + s[2] * rot(3).conj() * target.coeff(3).conj();
            prop_assert!(rhs.re.abs() < 1e-14);
        }

        #[test]
        fn real_solutions_for_conjugate_symmetric_data(seed in 0u64..1000) {
            let t = table(8);
            let f = build_frequencies(&t, 8).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sol = solve_moment(&random_problem(&mut rng, &f, 1.0)).unwrap();
            prop_assert!(sol.diagnostics.imaginary < 1e-10);
            prop_assert!(sol.diagnostics.residual < 1e-12);
        }

        #[test]
        fn gap_set_is_strictly_increasing(n in 2usize..60) {
            let f = build_frequencies(&table(60), n).unwrap();
            prop_assert!(f.entries().windows(2).all(|w| w[1].omega > w[0].omega));
            prop_assert_eq!(f.len(), 1 + (1..=n).map(|m| (m - 1).min(3)).sum::<usize>());
        }
    }
}
