// Copyright 2026 The discsteer Authors
// SPDX-License-Identifier: Apache-2.0

//! Radial wave functions in the normalised Fourier–Bessel basis of the unit
//! disc.
//!
//! Mode `k` is `φ̂_k(r) = √2 J₀(j_{0,k} r) / |J₁(j_{0,k})|`, orthonormal for
//! `⟨f, g⟩ = ∫₀¹ f ḡ r dr`, with Dirichlet eigenvalue `λ_k = j_{0,k}²`.
//! Couplings `⟨r² φ̂_l, φ̂_k⟩` keep the sign of `J₁(j_{0,l}) J₁(j_{0,k})`.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bessel::{self, weighted_integral, QuadratureRule, ZeroTable};
use crate::error::{Error, Result};
use crate::par;

/// Truncated coefficient sequence; `coeffs[k - 1]` multiplies mode `k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RadialState {
    coeffs: Vec<Complex64>,
}

impl RadialState {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Unit coefficient on mode `k` (1-based) in an `n`-mode state.
    pub fn pure_mode(k: usize, n: usize) -> Self {
        let mut s = Self::zeros(n.max(k));
        s.coeffs[k - 1] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of mode `k` (1-based); zero past the truncation.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs
            .get(k.wrapping_sub(1))
            .copied()
            .unwrap_or_default()
    }

    pub fn l2_norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sqr().sqrt()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.l2_norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidParams("cannot normalise a zero state".into()));
        }
        Ok(self * (1.0 / n))
    }

    /// `⟨self, other⟩ = Σ a_k conj(b_k)`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    /// Zero-padded or truncated copy with `n` modes.
    pub fn resized(&self, n: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n, Complex64::default());
        Self { coeffs }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * z).collect(),
        }
    }

    /// Remove the component along `xi` that breaks the tangent condition
    /// `Re⟨f, ξ⟩ = 0` (assumes `‖ξ‖ = 1`).
    pub fn project_tangent(&self, xi: &Self) -> Self {
        let re = self.inner(xi).re;
        self - &(xi * re)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let n = self.len().max(other.len());
        Self {
            coeffs: (1..=n).map(|k| f(self.coeff(k), other.coeff(k))).collect(),
        }
    }
}

impl Add for &RadialState {
    type Output = RadialState;
    fn add(self, rhs: Self) -> RadialState {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &RadialState {
    type Output = RadialState;
    fn sub(self, rhs: Self) -> RadialState {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &RadialState {
    type Output = RadialState;
    fn mul(self, rhs: f64) -> RadialState {
        RadialState {
            coeffs: self.coeffs.iter().map(|c| c * rhs).collect(),
        }
    }
}

impl Serialize for RadialState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.coeffs.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RadialState {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(Self {
            coeffs: pairs
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        })
    }
}

/// `(θ₂, θ₃)` selecting the reference state; both positive with sum below 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetParams {
    theta2: f64,
    theta3: f64,
}

impl TargetParams {
    pub fn new(theta2: f64, theta3: f64) -> Result<Self> {
        if !(theta2 > 0.0 && theta3 > 0.0 && theta2 + theta3 < 1.0) {
            return Err(Error::InvalidParams(format!(
                "(theta2, theta3) = ({theta2}, {theta3}) needs theta2, theta3 > 0 and theta2 + theta3 < 1"
            )));
        }
        Ok(Self { theta2, theta3 })
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    pub fn theta3(&self) -> f64 {
        self.theta3
    }

    /// `(√(1−θ₂−θ₃), √θ₂, √θ₃)`: weights of modes 1, 2, 3.
    pub fn amplitudes(&self) -> [f64; 3] {
        [
            (1.0 - self.theta2 - self.theta3).sqrt(),
            self.theta2.sqrt(),
            self.theta3.sqrt(),
        ]
    }
}

/// Reference state `φ♯` on modes 1..3.
pub fn phi_sharp(params: &TargetParams) -> RadialState {
    RadialState::new(
        params
            .amplitudes()
            .iter()
            .map(|&a| Complex64::new(a, 0.0))
            .collect(),
    )
}

/// `J₀` zeros and `J₁` values needed for the first `n` radial modes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialBasis {
    zeros: Vec<f64>,
    j1: Vec<f64>,
}

impl RadialBasis {
    pub fn new(table: &ZeroTable, n: usize) -> Result<Self> {
        if n == 0 || n > table.k_max() {
            return Err(Error::IndexOutOfRange {
                index: n,
                max: table.k_max(),
            });
        }
        let zeros = table.order(0)[..n].to_vec();
        let j1 = zeros.iter().map(|&z| bessel::eval(1, z)).collect();
        Ok(Self { zeros, j1 })
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    fn check(&self, k: usize) -> Result<usize> {
        if k == 0 || k > self.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                max: self.len(),
            });
        }
        Ok(k - 1)
    }

    /// `j_{0,k}`.
    pub fn zero(&self, k: usize) -> Result<f64> {
        Ok(self.zeros[self.check(k)?])
    }

    /// `λ_k = j_{0,k}²`.
    pub fn lambda(&self, k: usize) -> Result<f64> {
        self.zero(k).map(|z| z * z)
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.zeros.iter().map(|z| z * z).collect()
    }

    /// `φ̂_k(r)`.
    pub fn mode(&self, k: usize, r: f64) -> Result<f64> {
        let i = self.check(k)?;
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("radius {r} outside [0, 1]")));
        }
        Ok(self.mode_unchecked(i, r))
    }

    fn mode_unchecked(&self, i: usize, r: f64) -> f64 {
        std::f64::consts::SQRT_2 * bessel::eval(0, self.zeros[i] * r) / self.j1[i].abs()
    }

    /// `Σ_k c_k φ̂_k(r)`.
    pub fn evaluate(&self, state: &RadialState, r: f64) -> Result<Complex64> {
        if state.len() > self.len() {
            return Err(Error::IndexOutOfRange {
                index: state.len(),
                max: self.len(),
            });
        }
        let mut acc = Complex64::default();
        for (k, c) in state.coeffs().iter().enumerate() {
            acc += c * self.mode(k + 1, r)?;
        }
        Ok(acc)
    }

    /// `(Σ_k |j_{0,k}^s c_k|²)^{1/2}`.
    pub fn hs_norm(&self, state: &RadialState, s: f64) -> Result<f64> {
        if state.len() > self.len() {
            return Err(Error::IndexOutOfRange {
                index: state.len(),
                max: self.len(),
            });
        }
        let sum: f64 = state
            .coeffs()
            .iter()
            .zip(&self.zeros)
            .map(|(c, z)| z.powf(2.0 * s) * c.norm_sqr())
            .sum();
        Ok(sum.sqrt())
    }

    /// Free evolution of `φ♯` to time `tau`, on the first `n ≥ 3` modes.
    pub fn wave_packet(&self, params: &TargetParams, tau: f64, n: usize) -> Result<RadialState> {
        self.check(3)?;
        let mut s = phi_sharp(params).resized(n.max(3));
        for (k, c) in s.coeffs_mut().iter_mut().take(3).enumerate() {
            let lam = self.zeros[k] * self.zeros[k];
            *c *= Complex64::from_polar(1.0, -lam * tau);
        }
        Ok(s)
    }

    /// `⟨r² φ̂_l, φ̂_k⟩` for `l ≠ k`:
    /// `sign(J₁(j_l) J₁(j_k)) · 8 j_l j_k / (j_k² − j_l²)²`.
    pub fn coupling_closed_form(&self, l: usize, k: usize) -> Result<f64> {
        let (il, ik) = (self.check(l)?, self.check(k)?);
        if l == k {
            return Err(Error::InvalidParams(
                "closed-form coupling is off-diagonal only; use coupling_diagonal".into(),
            ));
        }
        let (a, b) = (self.zeros[il], self.zeros[ik]);
        let d = b * b - a * a;
        let sign = (self.j1[il] * self.j1[ik]).signum();
        Ok(sign * 8.0 * a * b / (d * d))
    }

    /// `⟨r² φ̂_k, φ̂_k⟩` by quadrature.
    pub fn coupling_diagonal(&self, k: usize, rule: &QuadratureRule) -> Result<f64> {
        self.coupling_quadrature(k, k, rule)
    }

    /// `⟨r² φ̂_l, φ̂_k⟩` by quadrature, for any `l, k`.
    pub fn coupling_quadrature(&self, l: usize, k: usize, rule: &QuadratureRule) -> Result<f64> {
        let (il, ik) = (self.check(l)?, self.check(k)?);
        Ok(weighted_integral(
            |r| r * r * self.mode_unchecked(il, r) * self.mode_unchecked(ik, r),
            rule,
        ))
    }

    /// Symmetric `N × N` matrix `M_{kj} = ⟨r² φ̂_j, φ̂_k⟩`: closed form off the
    /// diagonal, quadrature on it.
    pub fn coupling_matrix(&self, rule: &QuadratureRule) -> DMatrix<f64> {
        let n = self.len();
        let diag = par::map_range(1..n + 1, |k| {
            self.coupling_diagonal(k, rule).expect("index within basis")
        });
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else {
                self.coupling_closed_form(j + 1, i + 1)
                    .expect("index within basis")
            }
        })
    }
}

/// CSV with header `k,l,value`, one row per matrix entry (1-based indices).
pub fn coupling_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::from("k,l,value\n");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let _ = writeln!(out, "{},{},{:e}", i + 1, j + 1, m[(i, j)]);
        }
    }
    out
}
