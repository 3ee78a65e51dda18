//! Smoothed count `S_V(X, r) = Σ_{ad−bc=r} V(a/X)V(b/X)V(c/X)V(d/X)`.
//!
//! Two enumerations of the same solution set: a cubic scan that tests
//! `a | r + bc` directly, and a fast one that, for each `(a, b)`, walks the
//! arithmetic progression of admissible `c`. Both accumulate the identical
//! summands in ascending `(a, b, c)` order into per-`a` compensated partial
//! sums, so their outputs agree bit for bit.

use std::ops::RangeInclusive;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{gcd, mod_inverse, Modulus};
use crate::error::{Error, Result};
use crate::sum::NeumaierSum;
use crate::weights::{eval_weight, WeightSpec};

/// Largest accepted `X`; keeps `2X` and `3X²` well inside `i64`.
pub const MAX_X: f64 = 1e7;

/// A request for `S_V(X, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountQuery {
    pub x: f64,
    pub r: i64,
}

impl CountQuery {
    /// Validates `X >= 3`, `r != 0` and `|r| < 3X²`.
    pub fn new(x: f64, r: i64) -> Result<Self> {
        if !(3.0..=MAX_X).contains(&x) {
            return Err(Error::InvalidArgument(format!("X must lie in [3, {MAX_X:e}], got {x}")));
        }
        if r == 0 {
            return Err(Error::InvalidR("r must be nonzero".into()));
        }
        if (r.unsigned_abs() as f64) >= 3.0 * x * x {
            return Err(Error::InvalidR(format!("|r| = {} must be below 3X^2 = {}", r.unsigned_abs(), 3.0 * x * x)));
        }
        Ok(CountQuery { x, r })
    }

    /// Skips the support check on `r`; enumeration is still well defined and
    /// returns zero once `|r|` exceeds what the box can produce.
    pub fn unchecked(x: f64, r: i64) -> Self {
        CountQuery { x, r }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountResult {
    pub weighted_sum: f64,
    /// Number of tuples whose weight product is nonzero.
    pub solution_count: u64,
    pub elapsed: Duration,
}

/// Integers `n` with `X < n < 2X`.
pub fn enumerate_range(x: f64) -> Result<RangeInclusive<i64>> {
    if !(3.0..=MAX_X).contains(&x) {
        return Err(Error::InvalidArgument(format!("X must lie in [3, {MAX_X:e}], got {x}")));
    }
    let lo = x.floor() as i64 + 1;
    let hi = (2.0 * x).ceil() as i64 - 1;
    if lo > hi {
        return Err(Error::EmptyRange { x });
    }
    Ok(lo..=hi)
}

/// `V(n/X)` for every `n` in the enumeration range.
pub(crate) struct WeightTable {
    lo: i64,
    hi: i64,
    values: Vec<f64>,
}

impl WeightTable {
    pub(crate) fn new(spec: &WeightSpec, x: f64, range: &RangeInclusive<i64>) -> Self {
        let values = range.clone().map(|n| eval_weight(spec, n as f64 / x)).collect();
        WeightTable { lo: *range.start(), hi: *range.end(), values }
    }

    #[inline]
    pub(crate) fn get(&self, n: i64) -> f64 {
        self.values[(n - self.lo) as usize]
    }

    #[inline]
    pub(crate) fn contains(&self, n: i64) -> bool {
        n >= self.lo && n <= self.hi
    }
}

/// Per-`a` partial sum and solution tally.
#[derive(Default)]
pub(crate) struct Partial {
    pub(crate) sum: NeumaierSum,
    pub(crate) count: u64,
}

impl Partial {
    #[inline]
    pub(crate) fn push(&mut self, w: f64) {
        if w != 0.0 {
            self.sum.add(w);
            self.count += 1;
        }
    }
}

pub(crate) fn combine(partials: Vec<Partial>, started: Instant) -> CountResult {
    let mut sum = NeumaierSum::new();
    let mut count = 0;
    for p in &partials {
        sum.merge(&p.sum);
        count += p.count;
    }
    CountResult { weighted_sum: sum.value(), solution_count: count, elapsed: started.elapsed() }
}

#[inline]
fn product(w: &WeightTable, a: i64, b: i64, c: i64, d: i64) -> f64 {
    w.get(a) * w.get(b) * w.get(c) * w.get(d)
}

/// Cubic scan over `(a, b, c)`, keeping `d = (r + bc)/a` when it is an integer
/// in range.
pub fn count_naive(spec: &WeightSpec, q: &CountQuery) -> Result<CountResult> {
    let started = Instant::now();
    let range = enumerate_range(q.x)?;
    let w = WeightTable::new(spec, q.x, &range);
    let r = q.r as i128;
    let partials: Vec<Partial> = range
        .clone()
        .into_par_iter()
        .map(|a| {
            let mut part = Partial::default();
            for b in range.clone() {
                for c in range.clone() {
                    let num = r + b as i128 * c as i128;
                    if num % a as i128 != 0 {
                        continue;
                    }
                    let d = (num / a as i128) as i64;
                    if w.contains(d) {
                        debug_assert_eq!(a as i128 * d as i128 - b as i128 * c as i128, r);
                        part.push(product(&w, a, b, c, d));
                    }
                }
            }
            part
        })
        .collect();
    Ok(combine(partials, started))
}

/// Congruence-class enumeration: with `g = gcd(a, b)` and `g | r`, the
/// admissible `c` form the progression `c ≡ −(r/g)·(b/g)⁻¹ (mod a/g)`.
pub fn count_fast(spec: &WeightSpec, q: &CountQuery) -> Result<CountResult> {
    let started = Instant::now();
    let range = enumerate_range(q.x)?;
    let (lo, hi) = (*range.start(), *range.end());
    let w = WeightTable::new(spec, q.x, &range);
    let r = q.r;
    let partials: Vec<Partial> = range
        .clone()
        .into_par_iter()
        .map(|a| {
            let mut part = Partial::default();
            for b in range.clone() {
                let g = gcd(a, b) as i64;
                if r % g != 0 {
                    continue;
                }
                let step = a / g;
                let modulus = Modulus::new(step as u64).expect("a/g >= 1");
                let inv = mod_inverse(b / g, modulus).expect("b/g is a unit mod a/g");
                let residue = modulus.mul(modulus.reduce(-(r / g) as i128), inv) as i64;
                // first c >= lo in the class
                let mut c = lo + (residue - lo).rem_euclid(step);
                while c <= hi {
                    let num = r as i128 + b as i128 * c as i128;
                    debug_assert_eq!(num % a as i128, 0);
                    let d = (num / a as i128) as i64;
                    if w.contains(d) {
                        debug_assert_eq!(a as i128 * d as i128 - b as i128 * c as i128, r as i128);
                        part.push(product(&w, a, b, c, d));
                    }
                    c += step;
                }
            }
            part
        })
        .collect();
    Ok(combine(partials, started))
}
