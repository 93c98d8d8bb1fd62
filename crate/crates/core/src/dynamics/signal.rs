// Copyright 2026 The discsteer Authors
// SPDX-License-Identifier: Apache-2.0

use std::borrow::Cow;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real control sampled on the uniform grid `t_i = i T / M`, `i = 0..=M`,
/// read as its piecewise-linear interpolant.
///
/// A signal may carry its exact time derivative on the same grid; this is
/// how synthesized controls keep `v̇ = w` without differencing samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSignal {
    horizon: f64,
    samples: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    derivative: Option<Vec<f64>>,
}

/// Relative tolerance of the `Ḣ¹₀` admissibility test.
pub const ADMISSIBLE_TOL: f64 = 1e-10;

impl ControlSignal {
    pub fn new(horizon: f64, samples: Vec<f64>) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "horizon {horizon} must be positive"
            )));
        }
        if samples.len() < 2 {
            return Err(Error::InvalidParams(
                "a control needs at least two samples".into(),
            ));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParams(
                "control samples must be finite".into(),
            ));
        }
        Ok(Self {
            horizon,
            samples,
            derivative: None,
        })
    }

    pub fn with_derivative(horizon: f64, samples: Vec<f64>, derivative: Vec<f64>) -> Result<Self> {
        let mut s = Self::new(horizon, samples)?;
        if derivative.len() != s.samples.len() {
            return Err(Error::InvalidParams(
                "derivative grid does not match samples".into(),
            ));
        }
        s.derivative = Some(derivative);
        Ok(s)
    }

    /// Sample `f` (and `df` when given) on `intervals + 1` grid points.
    pub fn from_fn(
        horizon: f64,
        intervals: usize,
        f: impl Fn(f64) -> f64,
        df: Option<&dyn Fn(f64) -> f64>,
    ) -> Result<Self> {
        let h = horizon / intervals as f64;
        let grid = (0..=intervals).map(|i| i as f64 * h);
        let samples = grid.clone().map(&f).collect();
        match df {
            Some(d) => Self::with_derivative(horizon, samples, grid.map(d).collect()),
            None => Self::new(horizon, samples),
        }
    }

    pub fn zero(horizon: f64, intervals: usize) -> Result<Self> {
        let z = vec![0.0; intervals + 1];
        Self::with_derivative(horizon, z.clone(), z)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn intervals(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.intervals() as f64
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn carried_derivative(&self) -> Option<&[f64]> {
        self.derivative.as_deref()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..self.samples.len()).map(move |i| i as f64 * h)
    }

    fn interp(&self, data: &[f64], t: f64) -> f64 {
        if t <= 0.0 {
            return data[0];
        }
        if t >= self.horizon {
            return data[data.len() - 1];
        }
        let x = t / self.step();
        let i = (x.floor() as usize).min(data.len() - 2);
        let frac = x - i as f64;
        data[i] + (data[i + 1] - data[i]) * frac
    }

    /// Piecewise-linear value; clamps outside `[0, T]`.
    pub fn value(&self, t: f64) -> f64 {
        self.interp(&self.samples, t)
    }

    /// Derivative samples: the carried ones, else second-order central
    /// differences with one-sided second-order stencils at the ends.
    pub fn derivative_samples(&self) -> Cow<'_, [f64]> {
        if let Some(d) = &self.derivative {
            return Cow::Borrowed(d);
        }
        let s = &self.samples;
        let h = self.step();
        let n = s.len();
        if n < 3 {
            let d = (s[1] - s[0]) / h;
            return Cow::Owned(vec![d; n]);
        }
        let mut d = vec![0.0; n];
        d[0] = (-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * h);
        d[n - 1] = (3.0 * s[n - 1] - 4.0 * s[n - 2] + s[n - 3]) / (2.0 * h);
        for i in 1..n - 1 {
            d[i] = (s[i + 1] - s[i - 1]) / (2.0 * h);
        }
        Cow::Owned(d)
    }

    pub fn derivative_at(&self, t: f64) -> f64 {
        self.interp(&self.derivative_samples(), t)
    }

    /// `∫₀ᵀ` of the signal. With a carried derivative the trapezoid rule gets
    /// the endpoint correction `−h²/12 (v̇(T) − v̇(0))`, exact for piecewise
    /// quadratics with continuous piecewise-linear derivative.
    pub fn integral(&self) -> f64 {
        let h = self.step();
        let s = &self.samples;
        let n = s.len();
        let inner: f64 = s[1..n - 1].iter().sum();
        let trap = h * (0.5 * (s[0] + s[n - 1]) + inner);
        match &self.derivative {
            Some(d) => trap - h * h / 12.0 * (d[n - 1] - d[0]),
            None => trap,
        }
    }

    /// `∫₀ᵀ t s(t) dt` of the piecewise-linear interpolant (exact).
    pub fn first_moment(&self) -> f64 {
        let h = self.step();
        self.samples
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let a = i as f64 * h;
                let b = a + h;
                h / 6.0 * (w[0] * (2.0 * a + b) + w[1] * (a + 2.0 * b))
            })
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Largest of `|v(0)|`, `|v(T)|` and `|∫v| / T`, relative to `max |v|`.
    pub fn admissibility_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let first = self.samples[0].abs();
        let last = self.samples[self.samples.len() - 1].abs();
        let mean = self.integral().abs() / self.horizon;
        first.max(last).max(mean) / scale
    }

    /// Membership in `Ḣ¹₀(0, T)`: zero endpoints and zero mean.
    pub fn check_admissible(&self) -> Result<()> {
        let defect = self.admissibility_defect();
        if defect > ADMISSIBLE_TOL {
            return Err(Error::Inadmissible(format!(
                "endpoint/mean defect {defect:.3e} exceeds {ADMISSIBLE_TOL:e} (relative to max |v|)"
            )));
        }
        Ok(())
    }

    /// `u̇ − 4u²`, the potential coefficient of the fixed-domain system.
    pub fn potential_coefficient(&self) -> Self {
        let d = self.derivative_samples();
        let samples = self
            .samples
            .iter()
            .zip(d.iter())
            .map(|(u, du)| du - 4.0 * u * u)
            .collect();
        Self {
            horizon: self.horizon,
            samples,
            derivative: None,
        }
    }

    /// Pointwise `a·self + b·other` on a shared grid.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if other.samples.len() != self.samples.len() || other.horizon != self.horizon {
            return Err(Error::InvalidParams("control grids differ".into()));
        }
        let lin = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        let derivative = match (&self.derivative, &other.derivative) {
            (Some(x), Some(y)) => Some(lin(x, y)),
            _ => None,
        };
        Ok(Self {
            horizon: self.horizon,
            samples: lin(&self.samples, &other.samples),
            derivative,
        })
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            horizon: self.horizon,
            samples: self.samples.iter().map(|s| a * s).collect(),
            derivative: self
                .derivative
                .as_ref()
                .map(|d| d.iter().map(|s| a * s).collect()),
        }
    }

    /// CSV `t,value[,derivative]`.
    pub fn to_csv(&self, name: &str) -> String {
        let mut out = String::new();
        let d = self.derivative.as_deref();
        let _ = match d {
            Some(_) => writeln!(out, "t,{name},d{name}"),
            None => writeln!(out, "t,{name}"),
        };
        for (i, t) in self.times().enumerate() {
            let _ = match d {
                Some(d) => writeln!(out, "{t:e},{:e},{:e}", self.samples[i], d[i]),
                None => writeln!(out, "{t:e},{:e}", self.samples[i]),
            };
        }
        out
    }

    /// Inverse of [`ControlSignal::to_csv`]; the grid must be uniform from 0.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty control CSV".into()))?;
        let cols = header.split(',').count();
        if !(2..=3).contains(&cols) {
            return Err(Error::Format(format!(
                "control CSV needs 2 or 3 columns, got {cols}"
            )));
        }
        let (mut t, mut v, mut d) = (Vec::new(), Vec::new(), Vec::new());
        for (no, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("line {}: {e}", no + 2)))?;
            if fields.len() != cols {
                return Err(Error::Format(format!(
                    "line {}: expected {cols} fields",
                    no + 2
                )));
            }
            t.push(fields[0]);
            v.push(fields[1]);
            if cols == 3 {
                d.push(fields[2]);
            }
        }
        if t.len() < 2 || t[0] != 0.0 {
            return Err(Error::Format(
                "control grid must start at t = 0 with 2+ points".into(),
            ));
        }
        let horizon = t[t.len() - 1];
        let h = horizon / (t.len() - 1) as f64;
        if t.iter()
            .enumerate()
            .any(|(i, &ti)| (ti - i as f64 * h).abs() > 1e-9 * horizon)
        {
            return Err(Error::Format("control grid is not uniform".into()));
        }
        if cols == 3 {
            Self::with_derivative(horizon, v, d)
        } else {
            Self::new(horizon, v)
        }
    }
}
