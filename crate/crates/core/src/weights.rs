//! The smooth weight `V` supported in `[1, 2]`, its integral and Fourier
//! transform, and numerical Poisson-summation checks.
//!
//! Fourier convention: `V̂(ξ) = ∫ V(x) e(−ξx) dx` with `e(θ) = exp(2πiθ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_complex, QuadratureSpec};
use crate::sum::NeumaierSum;

pub use crate::quad::integrate_3d;

/// Terms of truncated dual sums below this magnitude are dropped.
pub const DUAL_TERM_CUTOFF: f64 = 1e-14;
/// A dual sum stops after this many consecutive terms below the cutoff.
const DUAL_STOP_RUN: usize = 4;
const DUAL_MAX_TERMS: i64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum WeightKind {
    /// `exp(−1/((x−1)(2−x)))` on `(1, 2)`.
    #[default]
    #[serde(rename = "canonical-bump")]
    CanonicalBump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub amplitude: f64,
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec { kind: WeightKind::CanonicalBump, amplitude: 1.0 }
    }
}

impl WeightSpec {
    pub fn with_amplitude(amplitude: f64) -> Self {
        WeightSpec { amplitude, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!("weight amplitude must be finite and >= 0, got {}", self.amplitude)));
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        eval_weight(self, x)
    }

    /// `sup V`, attained at the midpoint.
    pub fn sup(&self) -> f64 {
        self.amplitude * (-4.0f64).exp()
    }
}

/// `V(x)`; exactly zero outside the open interval `(1, 2)`.
#[inline]
pub fn eval_weight(spec: &WeightSpec, x: f64) -> f64 {
    if x <= 1.0 || x >= 2.0 {
        return 0.0;
    }
    match spec.kind {
        WeightKind::CanonicalBump => {
            let s = (x - 1.0) * (2.0 - x);
            spec.amplitude * (-1.0 / s).exp()
        }
    }
}

/// `V′(x) = V(x)·(3 − 2x)/s²` with `s = (x − 1)(2 − x)`.
pub fn eval_derivative(spec: &WeightSpec, x: f64) -> f64 {
    let v = eval_weight(spec, x);
    if v == 0.0 {
        return 0.0;
    }
    let s = (x - 1.0) * (2.0 - x);
    v * (3.0 - 2.0 * x) / (s * s)
}

/// `sup |V′|`: dense scan, then golden-section refinement around the best node.
/// `|V′|` is symmetric about 3/2, so only `(1, 3/2)` is searched.
pub fn sup_derivative(spec: &WeightSpec) -> f64 {
    let f = |x: f64| eval_derivative(spec, x).abs();
    let n = 10_000;
    let h = 0.5 / n as f64;
    let best = (1..n).max_by(|&i, &j| f(1.0 + i as f64 * h).total_cmp(&f(1.0 + j as f64 * h))).unwrap_or(1);
    let (mut a, mut b) = (1.0 + (best - 1) as f64 * h, 1.0 + (best + 1) as f64 * h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b)).max(f(1.0 + best as f64 * h))
}

/// `∫₁² V(t) dt`.
pub fn integral(spec: &WeightSpec, quad: &QuadratureSpec) -> Result<f64> {
    integrate(|x| eval_weight(spec, x), 1.0, 2.0, quad)
}

/// `V̂(ξ)`, using panels no wider than `1/(10|ξ|)`.
pub fn fourier(spec: &WeightSpec, xi: f64, quad: &QuadratureSpec) -> Result<Complex64> {
    let min_panels = (10.0 * xi.abs()).ceil() as usize;
    let w = -2.0 * PI * xi;
    integrate_complex(
        |x| Complex64::from_polar(eval_weight(spec, x), w * x),
        1.0,
        2.0,
        min_panels.max(1),
        quad,
    )
}

/// Sums `term(n)` over `n = 1, 2, ...` until `DUAL_STOP_RUN` consecutive terms
/// have modulus below the cutoff.
pub(crate) fn sum_positive_dual<F>(mut term: F) -> Result<Complex64>
where
    F: FnMut(i64) -> Result<Complex64>,
{
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    let mut quiet = 0;
    for n in 1..=DUAL_MAX_TERMS {
        let t = term(n)?;
        re.add(t.re);
        im.add(t.im);
        if t.norm() < DUAL_TERM_CUTOFF {
            quiet += 1;
            if quiet >= DUAL_STOP_RUN {
                return Ok(Complex64::new(re.value(), im.value()));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::InvalidArgument("dual sum did not fall below the cutoff".into()))
}

/// Residual of Poisson summation for `f(x) = V(x/scale)`:
/// `|Σₙ f(n) − scale·Σₙ V̂(scale·n)|`.
pub fn poisson_check(spec: &WeightSpec, scale: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
    }
    // integers in the open support (scale, 2 scale)
    let lo = scale.floor() as i64 + 1;
    let hi = (2.0 * scale).ceil() as i64 - 1;
    let lhs: NeumaierSum = (lo..=hi).map(|n| eval_weight(spec, n as f64 / scale)).collect();

    // V real, so V̂(−ξ) = conj V̂(ξ) and the ±n terms pair into 2 Re V̂
    let zero = fourier(spec, 0.0, quad)?;
    let tail = sum_positive_dual(|n| Ok(scale * fourier(spec, scale * n as f64, quad)?))?;
    let mut rhs = NeumaierSum::new();
    rhs.add(scale * zero.re);
    rhs.add(2.0 * tail.re);
    Ok((lhs.value() - rhs.value()).abs())
}
