//! Smoothed count of `ad − bc ≡ 1 (mod p)` with all four variables weighted by
//! `V(·/X)`, against the main term `X⁴/p · (∫V)⁴`.

use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{is_prime, Modulus};
use crate::counting::{combine, enumerate_range, CountResult, Partial, WeightTable};
use crate::error::{Error, Result};
use crate::quad::QuadratureSpec;
use crate::scan::fit_loglog;
use crate::weights::{fourier, integral, sum_positive_dual, WeightSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModPQuery {
    pub p: u64,
    pub x: f64,
    /// Reporting slack `g(p) >= 1`.
    pub g_scale: f64,
}

impl ModPQuery {
    /// Checks that `p` is an odd prime and `p^{1/100} < X < p/2`.
    pub fn new(p: u64, x: f64, g_scale: f64) -> Result<Self> {
        if !is_prime(p) || p == 2 {
            return Err(Error::CompositeModulus(p));
        }
        let pf = p as f64;
        if !(x > pf.powf(0.01) && x < pf / 2.0) {
            return Err(Error::InvalidArgument(format!("X = {x} must lie in (p^(1/100), p/2) for p = {p}")));
        }
        if !(g_scale >= 1.0) || !g_scale.is_finite() {
            return Err(Error::InvalidArgument(format!("g_scale must be finite and >= 1, got {g_scale}")));
        }
        Ok(ModPQuery { p, x, g_scale })
    }
}

/// For each `(a, b, c)` the congruence fixes `d ≡ (1 + bc)·ā`, and `X < p/2`
/// leaves at most one representative in `(X, 2X)`.
pub fn count_modp(spec: &WeightSpec, q: &ModPQuery) -> Result<CountResult> {
    if !is_prime(q.p) {
        return Err(Error::CompositeModulus(q.p));
    }
    let started = Instant::now();
    let range = enumerate_range(q.x)?;
    let (lo, hi) = (*range.start(), *range.end());
    let w = WeightTable::new(spec, q.x, &range);
    let modulus = Modulus::new(q.p)?;
    let p = q.p as i64;
    let partials: Vec<Partial> = range
        .clone()
        .into_par_iter()
        .map(|a| {
            let mut part = Partial::default();
            let ar = modulus.reduce(a as i128);
            if ar == 0 {
                return part;
            }
            let ainv = crate::arith::mod_inverse(a, modulus).expect("a is a unit mod p");
            for b in range.clone() {
                for c in range.clone() {
                    let rhs = modulus.reduce(1 + b as i128 * c as i128);
                    let d0 = modulus.mul(rhs, ainv) as i64;
                    let d = lo + (d0 - lo).rem_euclid(p);
                    if d <= hi {
                        debug_assert!(d + p > hi, "two representatives of d in range");
                        debug_assert_eq!((a as i128 * d as i128 - b as i128 * c as i128).rem_euclid(p as i128), 1);
                        part.push(w.get(a) * w.get(b) * w.get(c) * w.get(d));
                    }
                }
            }
            part
        })
        .collect();
    Ok(combine(partials, started))
}

/// `X⁴/p · (∫V)⁴`, cross-checked against `X⁴/p · V̂(0)⁴`.
pub fn modp_main(spec: &WeightSpec, q: &ModPQuery, quad: &QuadratureSpec) -> Result<f64> {
    let i = integral(spec, quad)?;
    let v0 = fourier(spec, 0.0, quad)?;
    let scale = quad.abs_tol.max(quad.rel_tol * i.abs());
    if (v0.re - i).abs() > scale || v0.im.abs() > scale {
        return Err(Error::InvalidArgument(format!("V̂(0) = {v0} disagrees with the integral {i}")));
    }
    Ok(q.x.powi(4) / q.p as f64 * i.powi(4))
}

/// Rule choosing `X` from `p`: `X = ⌈c·√p·g⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XRule {
    pub c: f64,
}

impl XRule {
    pub fn x_for(&self, p: u64, g_scale: f64) -> f64 {
        (self.c * (p as f64).sqrt() * g_scale).ceil()
    }
}

impl Default for XRule {
    fn default() -> Self {
        XRule { c: 2.0 }
    }
}

impl FromStr for XRule {
    type Err = Error;

    /// Parses `"<c>sqrt"`, e.g. `"2sqrt"` or `"1.5sqrt"`; a bare `"sqrt"` means `c = 1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unrecognized X rule {s:?}; expected e.g. \"2sqrt\""));
        let head = s.trim().strip_suffix("sqrt").ok_or_else(bad)?;
        let c = if head.is_empty() { 1.0 } else { head.parse::<f64>().map_err(|_| bad())? };
        if !(c > 0.0) || !c.is_finite() {
            return Err(bad());
        }
        Ok(XRule { c })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModPRow {
    pub p: u64,
    pub x: f64,
    pub s: f64,
    pub m: f64,
    pub e: f64,
    pub e_over_x2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModPReport {
    pub rows: Vec<ModPRow>,
    /// Least-squares slope of `log|E|` against `log p`; `None` with fewer than two usable rows.
    pub fitted_slope: Option<f64>,
    pub fit_intercept: Option<f64>,
}

pub fn modp_row(spec: &WeightSpec, q: &ModPQuery, quad: &QuadratureSpec) -> Result<ModPRow> {
    let s = count_modp(spec, q)?.weighted_sum;
    let m = modp_main(spec, q, quad)?;
    let e = s - m;
    Ok(ModPRow { p: q.p, x: q.x, s, m, e, e_over_x2: e / (q.x * q.x) })
}

/// One row per prime, in input order.
pub fn modp_error_scan(
    spec: &WeightSpec,
    primes: &[u64],
    rule: XRule,
    g_scale: f64,
    quad: &QuadratureSpec,
) -> Result<ModPReport> {
    let queries = primes
        .iter()
        .map(|&p| ModPQuery::new(p, rule.x_for(p, g_scale), g_scale))
        .collect::<Result<Vec<_>>>()?;
    let rows = queries.iter().map(|q| modp_row(spec, q, quad)).collect::<Result<Vec<_>>>()?;
    let fit = fit_loglog(rows.iter().map(|r| (r.p as f64, r.e)));
    Ok(ModPReport { fitted_slope: fit.map(|f| f.0), fit_intercept: fit.map(|f| f.1), rows })
}

/// `Σ_{n≠0} V̂(n/x)`, which is `O(x)` for any `x > 0`.
pub fn dual_sum_nonzero(spec: &WeightSpec, x: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidArgument(format!("x must be positive, got {x}")));
    }
    let tail = sum_positive_dual(|n| fourier(spec, n as f64 / x, quad))?;
    Ok(2.0 * tail.re)
}
