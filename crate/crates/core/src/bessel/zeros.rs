// Copyright 2026 The discsteer Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{eval, MAX_ORDER};
use crate::error::{Error, Result};
use crate::par;

pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Positive zeros `j_{ν,k}` for `ν ≤ nu_max`, `1 ≤ k ≤ k_max`.
///
/// Immutable once built; share it by reference across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTable {
    tol: f64,
    // zeros[ν][k - 1]
    zeros: Vec<Vec<f64>>,
}

/// One `(ν, k, j_{ν,k})` record of the JSON form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroEntry {
    pub nu: u32,
    pub k: usize,
    pub value: f64,
}

#[derive(Serialize, Deserialize)]
struct ZeroTableFile {
    tol: f64,
    zeros: Vec<ZeroEntry>,
}

impl ZeroTable {
    pub fn nu_max(&self) -> u32 {
        (self.zeros.len() - 1) as u32
    }

    pub fn k_max(&self) -> usize {
        self.zeros[0].len()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn get(&self, nu: u32, k: usize) -> Result<f64> {
        let row = self.zeros.get(nu as usize).ok_or(Error::IndexOutOfRange {
            index: nu as usize,
            max: self.nu_max() as usize,
        })?;
        if k == 0 || k > row.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                max: row.len(),
            });
        }
        Ok(row[k - 1])
    }

    /// Zeros of `J_ν` in increasing order.
    pub fn order(&self, nu: u32) -> &[f64] {
        &self.zeros[nu as usize]
    }

    pub fn entries(&self) -> impl Iterator<Item = ZeroEntry> + '_ {
        self.zeros.iter().enumerate().flat_map(|(nu, row)| {
            row.iter().enumerate().map(move |(i, &value)| ZeroEntry {
                nu: nu as u32,
                k: i + 1,
                value,
            })
        })
    }

    /// Overwrite one entry. Only meant for fault-injection in verification
    /// tooling; the result is not re-certified.
    pub fn with_entry(mut self, nu: u32, k: usize, value: f64) -> Result<Self> {
        self.get(nu, k)?;
        self.zeros[nu as usize][k - 1] = value;
        Ok(self)
    }

    /// Every violated table invariant, as human-readable messages.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (nu, row) in self.zeros.iter().enumerate() {
            let n = nu as f64;
            if row[0] <= n {
                out.push(format!("j({nu},1) = {} is not above the order", row[0]));
            }
            for (i, w) in row.windows(2).enumerate() {
                if w[1] <= w[0] {
                    out.push(format!("j({nu},{}) >= j({nu},{})", i + 1, i + 2));
                }
            }
            for (i, &z) in row.iter().enumerate() {
                let r = eval(nu as u32, z);
                if r.is_nan() || r.abs() > 10.0 * self.tol {
                    out.push(format!(
                        "|J_{nu}(j({nu},{}))| = {:.3e} > 10 tol",
                        i + 1,
                        r.abs()
                    ));
                }
            }
        }
        let gaps: Vec<f64> = self.zeros[0].windows(2).map(|w| w[1] - w[0]).collect();
        for (i, g) in gaps.windows(2).enumerate() {
            if g[1] <= g[0] {
                out.push(format!("zero gap of J_0 not increasing at k = {}", i + 2));
            }
            if (g[1] - PI).abs() >= (g[0] - PI).abs() {
                out.push(format!("|gap - pi| of J_0 not decreasing at k = {}", i + 2));
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ZeroTableFile {
            tol: self.tol,
            zeros: self.entries().collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Parse the JSON form. The entries must cover a full `ν × k` rectangle;
    /// numerical invariants are not re-checked (see [`ZeroTable::violations`]).
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ZeroTableFile = serde_json::from_str(text)?;
        if file.zeros.is_empty() {
            return Err(Error::Format("empty zero table".into()));
        }
        let nu_max = file.zeros.iter().map(|e| e.nu).max().unwrap_or(0);
        let k_max = file.zeros.iter().map(|e| e.k).max().unwrap_or(0);
        if nu_max > MAX_ORDER || k_max == 0 {
            return Err(Error::Format(format!(
                "table bounds nu={nu_max}, k={k_max}"
            )));
        }
        let mut zeros = vec![vec![f64::NAN; k_max]; nu_max as usize + 1];
        for e in &file.zeros {
            if e.k == 0 {
                return Err(Error::Format("zero index k must start at 1".into()));
            }
            zeros[e.nu as usize][e.k - 1] = e.value;
        }
        if zeros.iter().flatten().any(|z| !z.is_finite()) {
            return Err(Error::Format("zero table has missing entries".into()));
        }
        Ok(Self {
            tol: file.tol,
            zeros,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Compute `j_{ν,k}` for `ν ≤ nu_max`, `k ≤ k_max` to absolute accuracy `tol`.
///
/// Zeros of `J₀` start from McMahon's estimate `(k − 1/4)π + 1/(8(k − 1/4)π)`
/// with a bracket widened until it holds a sign change. Higher orders are
/// bracketed by interlacing, `j_{ν,k} < j_{ν+1,k} < j_{ν,k+1}`, which needs
/// `nu_max` extra zeros of `J₀`.
pub fn compute_zeros(nu_max: u32, k_max: usize, tol: f64) -> Result<ZeroTable> {
    if nu_max > MAX_ORDER {
        return Err(Error::Domain(format!("nu_max {nu_max} > {MAX_ORDER}")));
    }
    if k_max == 0 {
        return Err(Error::Domain("k_max must be at least 1".into()));
    }
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::Domain(format!("tol {tol} outside (0, 1e-6]")));
    }
    let extra = nu_max as usize;
    let first = par::try_map_range(1..k_max + extra + 1, |k| zero_of_j0(k, tol))?;
    let mut zeros = vec![first];
    for nu in 1..=nu_max {
        let prev = &zeros[nu as usize - 1];
        let count = k_max + extra - nu as usize;
        let row = par::try_map_range(0..count, |i| refine(nu, prev[i], prev[i + 1], tol))?;
        zeros.push(row);
    }
    for row in &mut zeros {
        row.truncate(k_max);
    }
    Ok(ZeroTable { tol, zeros })
}

fn zero_of_j0(k: usize, tol: f64) -> Result<f64> {
    let beta = (k as f64 - 0.25) * PI;
    let guess = beta + 1.0 / (8.0 * beta);
    let f = |x: f64| eval(0, x);
    let mut half = 0.1;
    while half < 1.5 {
        let (a, b) = ((guess - half).max(1e-3), guess + half);
        if f(a) * f(b) < 0.0 {
            return refine(0, a, b, tol);
        }
        half *= 1.5;
    }
    Err(Error::Convergence(format!(
        "no sign change near McMahon guess for j(0,{k})"
    )))
}

/// Safeguarded Newton iteration on a bracket `[a, b]` holding one zero.
fn refine(nu: u32, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let f = |x: f64| eval(nu, x);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::Convergence(format!(
            "bracket [{a}, {b}] for order {nu} has no sign change"
        )));
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx * fa < 0.0 {
            b = x;
        } else {
            a = x;
            fa = fx;
        }
        if b - a <= tol {
            return Ok(0.5 * (a + b));
        }
        let deriv = -eval(nu + 1, x) + f64::from(nu) / x * fx;
        let newton = x - fx / deriv;
        x = if newton > a && newton < b && deriv != 0.0 {
            // Accept Newton steps that land inside the bracket; once the step
            // is below tol the zero is located.
            if (newton - x).abs() <= 0.25 * tol {
                return Ok(newton);
            }
            newton
        } else {
            0.5 * (a + b)
        };
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            return Ok(mid);
        }
    }
    Err(Error::Convergence(format!(
        "order {nu}: no convergence in [{a}, {b}]"
    )))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    // mpmath besseljzero, 20 digits.
    const REFERENCE: &[(u32, usize, f64)] = &[
        (0, 1, 2.404_825_557_695_772_8),
        (0, 2, 5.520_078_110_286_310_6),
        (0, 10, 30.634_606_468_431_975),
        (0, 64, 200.277_155_793_332_4),
        (1, 1, 3.831_705_970_207_512_3),
        (1, 64, 201.845_470_156_190_9),
        (2, 10, 33.716_519_509_222_7),
        (3, 1, 6.380_161_895_923_983_5),
        (3, 64, 204.967_575_690_862_77),
    ];

    #[test]
    fn matches_reference_zeros() {
        let t = compute_zeros(3, 64, 1e-12).unwrap();
        for &(nu, k, want) in REFERENCE {
            let got = t.get(nu, k).unwrap();
            assert!(
                (got - want).abs() < 1e-11,
                "j({nu},{k}) = {got}, want {want}"
            );
        }
        assert!(t.violations().is_empty(), "{:?}", t.violations());
    }

    #[test]
    fn first_zeros_and_gap() {
        let t = compute_zeros(0, 1, 1e-12).unwrap();
        assert!((t.get(0, 1).unwrap() - 2.404825557695773).abs() < 1e-12);
        let t = compute_zeros(0, 2, 1e-12).unwrap();
        let (a, b) = (t.get(0, 1).unwrap(), t.get(0, 2).unwrap());
        assert!((b - 5.520078110286311).abs() < 1e-12);
        assert!(b - a > PI - 0.2);
    }

    #[test]
    fn high_order_first_zero() {
        let t = compute_zeros(64, 2, 1e-12).unwrap();
        assert!((t.get(64, 1).unwrap() - 71.681_167_819_458_04).abs() < 1e-10);
        assert!(t.violations().is_empty(), "{:?}", t.violations());
    }

    #[test]
    fn gaps_increase_over_long_table() {
        let t = compute_zeros(0, 400, 1e-12).unwrap();
        let z = t.order(0);
        for k in 1..z.len() - 1 {
            assert!(z[k + 1] - z[k] > z[k] - z[k - 1], "k = {k}");
        }
        assert!((t.get(0, 200).unwrap() - 627.533_331_746_904_2).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(compute_zeros(0, 0, 1e-12).is_err());
        assert!(compute_zeros(0, 3, 1e-3).is_err());
        assert!(compute_zeros(65, 3, 1e-12).is_err());
        assert!(refine(0, 3.0, 4.0, 1e-12).is_err());
    }

    #[test]
    fn json_round_trip_and_corruption() {
        let t = compute_zeros(1, 5, 1e-12).unwrap();
        let back = ZeroTable::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(t, back);
        let bad = t.with_entry(0, 3, 8.7).unwrap();
        let v = bad.violations();
        assert!(v.iter().any(|m| m.contains("j(0,3)")), "{v:?}");
        assert!(
            ZeroTable::from_json(r#"{"tol":1e-12,"zeros":[{"nu":0,"k":2,"value":5.5}]}"#).is_err()
        );
    }
}
