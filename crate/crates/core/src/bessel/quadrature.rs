// Copyright 2026 The discsteer Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::ops::{Add, Mul};

/// Gauss–Legendre rule mapped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Default size for integrands built from `J₀(j_{0,k} r)`, `k ≤ 64`.
    pub const DEFAULT_ORDER: usize = 256;

    /// `n`-point Gauss–Legendre rule on `[0, 1]`.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1, "quadrature needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's estimate of the i-th root, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // Map [-1, 1] -> [0, 1].
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Largest `p` for which `∫₀¹ rᵖ · r dr` is integrated exactly.
    pub fn weighted_exact_degree(&self) -> usize {
        2 * self.order() - 2
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Plain `∫₀¹ f(r) dr`.
    pub fn integrate<T, F>(&self, f: F) -> T
    where
        F: Fn(f64) -> T,
        T: Add<Output = T> + Mul<f64, Output = T> + Default,
    {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::default(), |acc, (&x, &w)| acc + f(x) * w)
    }

    /// `∫_a^b f(t) dt` split into `panels` equal sub-intervals.
    pub fn integrate_composite<T, F>(&self, a: f64, b: f64, panels: usize, f: F) -> T
    where
        F: Fn(f64) -> T,
        T: Add<Output = T> + Mul<f64, Output = T> + Default,
    {
        let h = (b - a) / panels as f64;
        (0..panels).fold(T::default(), |acc, p| {
            let lo = a + h * p as f64;
            acc + self.integrate(|s| f(lo + h * s)) * h
        })
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Radial inner-product integral `∫₀¹ f(r) r dr`.
pub fn weighted_integral<T, F>(f: F, rule: &QuadratureRule) -> T
where
    F: Fn(f64) -> T,
    T: Add<Output = T> + Mul<f64, Output = T> + Default,
{
    rule.integrate(|r| f(r) * r)
}
