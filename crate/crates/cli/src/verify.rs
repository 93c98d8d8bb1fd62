// Copyright 2026 The discsteer Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use serde::Serialize;
use serde_json::{json, Value};

use discsteer::bessel::{bessel_j, weighted_integral, QuadratureRule, ZeroTable};
use discsteer::moment::{
    build_frequencies, check_nonresonance, eigen_bounds, gamma_tilde, gram_matrix,
};
use discsteer::par;
use discsteer::spectral::RadialBasis;

/// Regression limits on `j_{0,k}³ |⟨r²φ̂_p, φ̂_k⟩|`, `p ≤ 3`, `4 ≤ k ≤ 200`.
pub const COEFFICIENT_LOWER: f64 = 19.239169537340665;
pub const COEFFICIENT_UPPER: f64 = 325.18972803337283;

const ORTHOGONALITY_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-9;
const GAP_TOL: f64 = 1e-6;
const CONDITION_TOL: f64 = 1e8;
const MAX_LOCATED: usize = 20;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub measured: Value,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub pass: bool,
    pub k_max: usize,
    pub checks: Vec<Check>,
}

pub fn run(table: &ZeroTable) -> Report {
    let k_max = table.k_max();
    let checks = vec![
        table_invariants(table),
        orthogonality(table, k_max.min(30)),
        coupling_identity(table, k_max.min(40)),
        coefficient_bounds(table, k_max.min(200)),
        nonresonance(table, k_max.min(500)),
        gram(table, k_max.min(40)),
    ];
    Report {
        pass: checks.iter().all(|c| c.pass),
        k_max,
        checks,
    }
}

fn table_invariants(table: &ZeroTable) -> Check {
    let v = table.violations();
    Check {
        name: "zero_table",
        pass: v.is_empty(),
        measured: json!({ "violations": v.iter().take(MAX_LOCATED).collect::<Vec<_>>(), "count": v.len() }),
    }
}

fn orthogonality(table: &ZeroTable, n: usize) -> Check {
    let basis = match RadialBasis::new(table, n) {
        Ok(b) => b,
        Err(e) => return failed("orthogonality", e),
    };
    let rule = QuadratureRule::gauss_legendre(QuadratureRule::DEFAULT_ORDER);
    let rows = par::map_range(1..n + 1, |k| {
        (k..=n)
            .map(|l| {
                let g: f64 = weighted_integral(
                    |r| basis.mode(k, r).unwrap_or(f64::NAN) * basis.mode(l, r).unwrap_or(f64::NAN),
                    &rule,
                );
                (k, l, (g - if k == l { 1.0 } else { 0.0 }).abs())
            })
            .collect::<Vec<_>>()
    });
    let all: Vec<_> = rows.into_iter().flatten().collect();
    let worst = all.iter().map(|e| e.2).fold(0.0, f64::max);
    let bad: Vec<_> = all
        .iter()
        .filter(|e| e.2.is_nan() || e.2 > ORTHOGONALITY_TOL)
        .collect();
    let mut hits = vec![0usize; n + 1];
    for &&(k, l, _) in &bad {
        hits[k] += 1;
        if l != k {
            hits[l] += 1;
        }
    }
    let mut suspects: Vec<usize> = (1..=n).filter(|&k| hits[k] > 0).collect();
    suspects.sort_by_key(|&k| std::cmp::Reverse(hits[k]));
    Check {
        name: "orthogonality",
        pass: bad.is_empty(),
        measured: json!({
            "modes": n,
            "max_residual": worst,
            "failing_pairs": bad.iter().take(MAX_LOCATED).map(|e| json!({"k": e.0, "l": e.1, "residual": e.2})).collect::<Vec<_>>(),
            "suspect_modes": suspects.iter().take(MAX_LOCATED).collect::<Vec<_>>(),
        }),
    }
}

fn coupling_identity(table: &ZeroTable, n: usize) -> Check {
    let z = &table.order(0)[..n];
    let rule = QuadratureRule::gauss_legendre(256);
    let j = |nu: u32, x: f64| bessel_j(nu, x).unwrap_or(f64::NAN);
    let worst = par::map_range(0..n, |l| {
        (l + 1..n)
            .map(|k| {
                let (a, b) = (z[l], z[k]);
                let quad: f64 = weighted_integral(|r| r * r * j(0, a * r) * j(0, b * r), &rule);
                let closed = 4.0 * a * b * j(1, a) * j(1, b) / (b * b - a * a).powi(2);
                ((quad - closed).abs(), l + 1, k + 1)
            })
            .fold((0.0, 0, 0), |acc, e| {
                if e.0 > acc.0 || e.0.is_nan() {
                    e
                } else {
                    acc
                }
            })
    })
    .into_iter()
    .fold((0.0, 0, 0), |acc, e| {
        if e.0 > acc.0 || e.0.is_nan() {
            e
        } else {
            acc
        }
    });
    Check {
        name: "coupling_identity",
        pass: worst.0 <= IDENTITY_TOL,
        measured: json!({ "modes": n, "max_deviation": worst.0, "at": [worst.1, worst.2] }),
    }
}

fn coefficient_bounds(table: &ZeroTable, n: usize) -> Check {
    if n < 4 {
        return Check {
            name: "coefficient_bounds",
            pass: true,
            measured: json!({ "skipped": "k_max < 4" }),
        };
    }
    let basis = match RadialBasis::new(table, n) {
        Ok(b) => b,
        Err(e) => return failed("coefficient_bounds", e),
    };
    let mut per_p = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for p in 1..=3 {
        let (mut a, mut b) = (f64::INFINITY, 0.0f64);
        for k in 4..=n {
            let v = basis.zero(k).unwrap_or(f64::NAN).powi(3)
                * basis.coupling_closed_form(p, k).unwrap_or(f64::NAN).abs();
            a = a.min(v);
            b = b.max(v);
        }
        per_p.push(
            json!({ "p": p, "min": a, "max": b, "limit": 8.0 * basis.zero(p).unwrap_or(f64::NAN) }),
        );
        lo = lo.min(a);
        hi = hi.max(b);
    }
    let slack = 1e-9;
    Check {
        name: "coefficient_bounds",
        pass: lo >= COEFFICIENT_LOWER * (1.0 - slack) && hi <= COEFFICIENT_UPPER * (1.0 + slack),
        measured: json!({
            "modes": n,
            "c1": lo,
            "d1": hi,
            "regression_limits": [COEFFICIENT_LOWER, COEFFICIENT_UPPER],
            "per_p": per_p,
        }),
    }
}

fn nonresonance(table: &ZeroTable, n: usize) -> Check {
    match check_nonresonance(table, n) {
        Ok(r) => Check {
            name: "nonresonance",
            pass: r.min_gap > GAP_TOL,
            measured: json!({
                "n_max": n,
                "frequencies": r.count,
                "min_gap": r.min_gap,
                "closest": [r.closest.0.origin, r.closest.1.origin],
                "packet_min_gap": r.packet_min_gap,
                "gamma_tilde": r.gamma_tilde,
            }),
        },
        Err(e) => failed("nonresonance", e),
    }
}

fn gram(table: &ZeroTable, n: usize) -> Check {
    let run = || -> discsteer::Result<Value> {
        let horizon = 2.0 * PI / gamma_tilde(table)?;
        let freqs = build_frequencies(table, n)?.first(30);
        let (m, big) = eigen_bounds(&gram_matrix(&freqs, horizon, false));
        Ok(json!({
            "horizon": horizon,
            "frequencies": freqs.len(),
            "positive_definite": m > 0.0,
            "m": m,
            "M": big,
            "condition": big / m,
        }))
    };
    match run() {
        Ok(v) => {
            let pass = v["positive_definite"] == true
                && v["m"].as_f64().is_some_and(|m| m > 0.0)
                && v["condition"].as_f64().is_some_and(|c| c < CONDITION_TOL);
            Check {
                name: "ingham_gram",
                pass,
                measured: v,
            }
        }
        Err(e) => failed("ingham_gram", e),
    }
}

fn failed(name: &'static str, e: discsteer::Error) -> Check {
    Check {
        name,
        pass: false,
        measured: json!({ "error": e.to_string() }),
    }
}
