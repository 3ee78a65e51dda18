//! Oscillatory weights `v`, `f` and their Bessel transforms
//!
//! ```text
//! f̌(η) = (4/π) ∫ K_{2iη}(t) f(t) dt/t
//! f̈(η) = (πi / sinh 2πη) ∫ (J_{2iη}(x) − J_{−2iη}(x)) f(x) dx/x
//! f̃(k) = 4 (k−1)! / (4πi)^k ∫ J_{k−1}(x) f(x) dx/x
//! ```
//!
//! plus weighted Kloosterman sums over `c` and two `J`-Bessel series identities.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expsums::ModulusTables;
use crate::quad::{integrate, integrate_complex, QuadratureSpec};
use crate::special::{j_bessel_all, j_bessel_imag_order, j_bessel_scaled, k_bessel_imag, J_IMAG_MAX_ARG, J_MAX_ORDER};
use crate::sum::{ComplexSum, NeumaierSum};
use crate::weights::{eval_derivative, eval_weight, WeightSpec};

pub use crate::mainterm::THETA;

/// The tuple `(m, n, r₁, l, X, x, y)` with the weight `V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscWeightParams {
    pub m: i64,
    pub n: i64,
    pub r1: i64,
    pub l: u64,
    pub big_x: f64,
    pub x: f64,
    pub y: f64,
    pub weight: WeightSpec,
}

impl OscWeightParams {
    /// Places `(x, y)` at the interior point `x = 3X/2`, `y = 3X/(2l)`.
    pub fn new(m: i64, n: i64, r1: i64, l: u64, big_x: f64, weight: WeightSpec) -> Result<Self> {
        let lf = l as f64;
        Self::with_point(m, n, r1, l, big_x, 1.5 * big_x, 1.5 * big_x / lf.max(1.0), weight)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_point(m: i64, n: i64, r1: i64, l: u64, big_x: f64, x: f64, y: f64, weight: WeightSpec) -> Result<Self> {
        if m == 0 || n == 0 || r1 == 0 {
            return Err(Error::InvalidArgument(format!("m, n, r1 must be nonzero, got ({m}, {n}, {r1})")));
        }
        if l == 0 {
            return Err(Error::InvalidArgument("l must be positive".into()));
        }
        if !(big_x > 0.0) || !big_x.is_finite() {
            return Err(Error::InvalidArgument(format!("X must be positive, got {big_x}")));
        }
        let ly = l as f64 * y;
        if !(x > big_x && x < 2.0 * big_x) || !(ly > big_x && ly < 2.0 * big_x) {
            return Err(Error::InvalidArgument(format!("need x and l*y in (X, 2X), got x = {x}, l*y = {ly}, X = {big_x}")));
        }
        weight.validate()?;
        Ok(OscWeightParams { m, n, r1, l, big_x, x, y, weight })
    }

    /// `√|m n r₁|`.
    pub fn root(&self) -> f64 {
        ((self.m as f64 * self.n as f64 * self.r1 as f64).abs()).sqrt()
    }

    /// `T = l √|m n r₁| / X`.
    pub fn scale_t(&self) -> f64 {
        self.l as f64 * self.root() / self.big_x
    }

    /// The open interval outside which `f` vanishes, `(2πT, 4πT)`.
    pub fn f_support(&self) -> (f64, f64) {
        let t = self.scale_t();
        (2.0 * PI * t, 4.0 * PI * t)
    }

    /// The open interval outside which `v` vanishes, `(X/l, 2X/l)`.
    pub fn v_support(&self) -> (f64, f64) {
        let lf = self.l as f64;
        (self.big_x / lf, 2.0 * self.big_x / lf)
    }

    fn phase_coeff(&self) -> f64 {
        self.n as f64 * self.x + self.m as f64 * self.y
    }

    fn inner_arg_numer(&self) -> f64 {
        (self.r1 as f64 + self.y * self.x) / self.big_x
    }
}

/// `v(u) = (X/(lu)) V(lu/X) V((r₁ + yx)/(uX)) e(−nx/u) e(−my/u)`.
pub fn v_weight(p: &OscWeightParams, u: f64) -> Complex64 {
    if !(u > 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    let lf = p.l as f64;
    let a = eval_weight(&p.weight, lf * u / p.big_x);
    if a == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let b = eval_weight(&p.weight, p.inner_arg_numer() / u);
    if b == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let amp = p.big_x / (lf * u) * a * b;
    Complex64::from_polar(amp, -2.0 * PI * p.phase_coeff() / u)
}

/// `v′(u)` by the product rule.
pub fn v_derivative(p: &OscWeightParams, u: f64) -> Complex64 {
    if !(u > 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    let lf = p.l as f64;
    let (s1, w) = (lf * u / p.big_x, p.inner_arg_numer() / u);
    let (a, da) = (eval_weight(&p.weight, s1), eval_derivative(&p.weight, s1) * lf / p.big_x);
    let (b, db) = (eval_weight(&p.weight, w), -eval_derivative(&p.weight, w) * w / u);
    let (c, dc) = (p.big_x / (lf * u), -p.big_x / (lf * u * u));
    let k = p.phase_coeff();
    let e = Complex64::from_polar(1.0, -2.0 * PI * k / u);
    let de = e * Complex64::new(0.0, 2.0 * PI * k / (u * u));
    e * (dc * a * b + c * da * b + c * a * db) + de * (c * a * b)
}

/// `f(t) = v(4π √|m n r₁| / t)`.
pub fn f_weight(p: &OscWeightParams, t: f64) -> Complex64 {
    if !(t > 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    v_weight(p, 4.0 * PI * p.root() / t)
}

fn check_eta(eta: f64) -> Result<()> {
    if eta == 0.0 || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!("eta must be finite and nonzero, got {eta}")));
    }
    Ok(())
}

/// Panels so that `f` (about two cycles of its phase over the support) and a
/// kernel oscillating like `cos(2η log t)` are both resolved.
fn panels_for(p: &OscWeightParams, eta: f64) -> usize {
    let phase_cycles = (p.phase_coeff().abs() * p.l as f64 / p.big_x).ceil();
    (4.0 + 4.0 * phase_cycles + 2.0 * eta.abs()) as usize
}

/// `f̌(η) = (4/π) ∫ K_{2iη}(t) f(t) dt/t`.
pub fn f_check(p: &OscWeightParams, eta: f64, quad: &QuadratureSpec) -> Result<Complex64> {
    check_eta(eta)?;
    let (a, b) = p.f_support();
    let kq = *quad;
    let kernel_err = std::sync::Mutex::new(None);
    let z = integrate_complex(
        |t| match k_bessel_imag(eta, t, &kq) {
            Ok(k) => f_weight(p, t) * (k / t),
            Err(e) => {
                kernel_err.lock().unwrap().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        a,
        b,
        panels_for(p, eta),
        quad,
    )?;
    if let Some(e) = kernel_err.into_inner().unwrap() {
        return Err(e);
    }
    Ok(4.0 / PI * z)
}

/// `f̈(η) = (πi / sinh 2πη) ∫ (J_{2iη} − J_{−2iη})(x) f(x) dx/x`.
/// For real `x, η`, `J_{−2iη}(x)` is the conjugate of `J_{2iη}(x)`, so the
/// bracket is `2i Im J_{2iη}(x)`.
pub fn f_ddot(p: &OscWeightParams, eta: f64, quad: &QuadratureSpec) -> Result<Complex64> {
    check_eta(eta)?;
    let (a, b) = p.f_support();
    if b > J_IMAG_MAX_ARG {
        return Err(Error::OutOfValidatedRange(format!("support of f reaches {b}, beyond x = {J_IMAG_MAX_ARG}")));
    }
    // validates η once; inside the integrand the same range cannot fail
    j_bessel_imag_order(eta, a.max(1e-300))?;
    let z = integrate_complex(
        |x| {
            let j = j_bessel_imag_order(eta, x).expect("validated range");
            f_weight(p, x) * (2.0 * j.im / x)
        },
        a,
        b,
        panels_for(p, eta),
        quad,
    )?;
    // (πi / sinh 2πη) · i · z
    Ok(-PI / (2.0 * PI * eta).sinh() * z)
}

/// `f̃(k) = 4 (k−1)!/(4πi)^k ∫ J_{k−1}(x) f(x) dx/x` for even `2 <= k <= 100`.
///
/// With `J_{k−1}(x) = s(x) (x/2)^{k−1}/(k−1)!` the factorials cancel:
/// `f̃(k) = (−1)^{k/2}/π ∫ s(x) (x/8π)^{k−1} f(x) dx/x`.
pub fn f_tilde(p: &OscWeightParams, k: u32, quad: &QuadratureSpec) -> Result<Complex64> {
    if !k.is_multiple_of(2) || !(2..=100).contains(&k) {
        return Err(Error::InvalidArgument(format!("k must be even in [2, 100], got {k}")));
    }
    let (a, b) = p.f_support();
    if b > 100.0 {
        return Err(Error::OutOfValidatedRange(format!("support of f reaches {b}, beyond x = 100")));
    }
    let order = k - 1;
    let z = integrate_complex(
        |x| {
            let s = j_bessel_scaled(order, x).expect("validated range");
            let pow = (order as f64 * (x / (8.0 * PI)).ln()).exp();
            f_weight(p, x) * (s * pow / x)
        },
        a,
        b,
        panels_for(p, 0.0),
        quad,
    )?;
    let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign / PI * z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedKloosterman {
    pub signed: Complex64,
    /// `Σ |S| |f| / c` over the same terms.
    pub absolute: f64,
    /// Number of `c` with a nonzero weight.
    pub terms: u64,
}

impl WeightedKloosterman {
    /// `|signed| / absolute`, or `None` when every term vanished.
    pub fn ratio(&self) -> Option<f64> {
        (self.absolute > 0.0).then(|| self.signed.norm() / self.absolute)
    }
}

/// `Σ_{c <= C_max} S(n r₁, −m; c)/c · f(4π√|m n r₁|/c)`. Since
/// `f(4π√|m n r₁|/c) = v(c)`, only `c` in `(X/l, 2X/l)` contribute.
pub fn weighted_kloosterman_sum(p: &OscWeightParams, c_max: u64) -> Result<WeightedKloosterman> {
    if c_max == 0 {
        return Err(Error::InvalidArgument("C_max must be positive".into()));
    }
    let (lo, hi) = p.v_support();
    let first = (lo.floor() as u64 + 1).max(1);
    let last = ((hi.ceil() as u64).saturating_sub(1)).min(c_max);
    let mut signed = ComplexSum::new();
    let mut absolute = NeumaierSum::new();
    let mut terms = 0;
    let a = p.n.checked_mul(p.r1).ok_or_else(|| Error::InvalidArgument("n * r1 overflows".into()))?;
    for c in first..=last {
        let w = v_weight(p, c as f64);
        if w.norm() == 0.0 {
            continue;
        }
        let s = ModulusTables::new(c)?.kloosterman(a, -p.m);
        signed.add(w * (s / c as f64));
        absolute.add(w.norm() * s.abs() / c as f64);
        terms += 1;
    }
    Ok(WeightedKloosterman { signed: signed.value(), absolute: absolute.value(), terms })
}

/// Residuals of
///
/// ```text
/// (a) Σ_{k even > 0} 2(k−1) J_{k−1}(x) J_{k−1}(y) = xy ∫₀¹ u J₀(ux) J₀(uy) du
/// (b) Σ_{k even > 0} (k−1) i^{−k} J_{k−1}(x)      = −(x/2) J₀(x)
/// ```
///
/// with both series cut at `k <= k_max`.
pub fn bessel_identity_residuals(x: f64, y: f64, k_max: u32, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    if !(x > 0.0 && x <= 20.0 && y > 0.0 && y <= 20.0) {
        return Err(Error::OutOfValidatedRange(format!("need 0 < x, y <= 20, got ({x}, {y})")));
    }
    if k_max < 40 || !k_max.is_multiple_of(2) || k_max > J_MAX_ORDER + 1 {
        return Err(Error::OutOfValidatedRange(format!("k_max must be even in [40, {}], got {k_max}", J_MAX_ORDER + 1)));
    }
    let jx = j_bessel_all(k_max - 1, x)?;
    let jy = j_bessel_all(k_max - 1, y)?;
    let mut lhs_a = NeumaierSum::new();
    let mut lhs_b = NeumaierSum::new();
    for k in (2..=k_max as usize).step_by(2) {
        let kk = (k - 1) as f64;
        lhs_a.add(2.0 * kk * jx[k - 1] * jy[k - 1]);
        // i^{−k} = (−1)^{k/2} for even k
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        lhs_b.add(sign * kk * jx[k - 1]);
    }
    let inner = integrate(
        |u| {
            let a = j_bessel_all(0, u * x).expect("in range")[0];
            let b = j_bessel_all(0, u * y).expect("in range")[0];
            u * a * b
        },
        0.0,
        1.0,
        quad,
    )?;
    let rhs_a = x * y * inner;
    let rhs_b = -0.5 * x * jx[0];
    Ok(((lhs_a.value() - rhs_a).abs(), (lhs_b.value() - rhs_b).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::k_imag_integral;

    fn params() -> OscWeightParams {
        OscWeightParams::new(1, 1, 1, 1, 100.0, WeightSpec::default()).unwrap()
    }

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn params_validation() {
        let v = WeightSpec::default();
        assert!(OscWeightParams::new(0, 1, 1, 1, 100.0, v).is_err());
        assert!(OscWeightParams::new(1, 1, 1, 0, 100.0, v).is_err());
        assert!(OscWeightParams::with_point(1, 1, 1, 2, 100.0, 150.0, 150.0, v).is_err());
        let p = OscWeightParams::new(2, -3, 5, 4, 100.0, v).unwrap();
        assert_eq!(p.y, 37.5);
        assert!((p.scale_t() - 4.0 * 30f64.sqrt() / 100.0).abs() < 1e-15);
    }

    #[test]
    fn v_support_and_modulus_bound() {
        let p = OscWeightParams::new(2, 3, 1, 2, 50.0, WeightSpec::default()).unwrap();
        let (lo, hi) = p.v_support();
        let sup2 = p.weight.sup().powi(2);
        for i in 0..=2000 {
            let u = 0.5 * lo + i as f64 * (2.5 * hi - 0.5 * lo) / 2000.0;
            let v = v_weight(&p, u);
            if u <= lo || u >= hi {
                assert_eq!(v.norm(), 0.0, "u = {u}");
            }
            assert!(v.norm() <= p.big_x / (p.l as f64 * u) * sup2 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn v_derivative_matches_finite_differences() {
        let p = OscWeightParams::new(2, 3, 1, 1, 50.0, WeightSpec::default()).unwrap();
        for &u in &[62.0, 70.0, 75.0, 81.5, 90.0] {
            let h = 1e-4;
            let fd = (v_weight(&p, u + h) - v_weight(&p, u - h)) / (2.0 * h);
            let an = v_derivative(&p, u);
            assert!((fd - an).norm() <= 1e-5 * an.norm(), "u = {u}: {fd} vs {an}");
        }
    }

    #[test]
    fn f_support_and_bounds() {
        let p = params();
        let t_scale = p.scale_t();
        let (lo, hi) = p.f_support();
        let sup2 = p.weight.sup().powi(2);
        for i in 0..=4000 {
            let t = i as f64 * 10.0 * PI * t_scale / 4000.0 + 1e-9;
            let f = f_weight(&p, t);
            if t < 2.0 * PI * t_scale || t > 8.0 * PI * t_scale || t <= lo || t >= hi {
                assert_eq!(f.norm(), 0.0, "t = {t}");
            }
            let bound = t / (4.0 * PI * p.l as f64 * p.root()) * p.big_x * sup2;
            assert!(f.norm() <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn f_second_derivative_envelope() {
        let p = params();
        let (lo, hi) = p.f_support();
        let h = 1e-5 * (hi - lo);
        let d2 = |t: f64| ((f_weight(&p, t + h) - 2.0 * f_weight(&p, t) + f_weight(&p, t - h)) / (h * h)).norm();
        let mid = 0.5 * (lo + hi);
        let c = d2(mid) * mid * mid;
        let grid: Vec<f64> = (1..=100).map(|i| lo + (hi - lo) * i as f64 / 101.0).collect();
        let worst = grid.iter().map(|&t| d2(t) * t * t).fold(0.0, f64::max);
        assert!(worst <= 10.0 * c, "t² |f''| peaks at {worst}, midpoint {c}");
    }

    #[test]
    fn transforms_vanish_for_zero_weight_and_scale_linearly() {
        let mut p = params();
        let a = f_check(&p, 1.0, &q()).unwrap();
        let b = f_ddot(&p, 1.0, &q()).unwrap();
        let c = f_tilde(&p, 2, &q()).unwrap();
        p.weight = WeightSpec::with_amplitude(0.0);
        assert_eq!(f_check(&p, 1.0, &q()).unwrap().norm(), 0.0);
        assert_eq!(f_ddot(&p, 1.0, &q()).unwrap().norm(), 0.0);
        assert_eq!(f_tilde(&p, 2, &q()).unwrap().norm(), 0.0);
        p.weight = WeightSpec::with_amplitude(2.0);
        // V enters v twice, so doubling the amplitude quadruples the transforms
        for (base, now) in [(a, f_check(&p, 1.0, &q()).unwrap()), (b, f_ddot(&p, 1.0, &q()).unwrap()), (c, f_tilde(&p, 2, &q()).unwrap())] {
            assert!((now - 4.0 * base).norm() <= 1e-12 * now.norm(), "{base} {now}");
        }
        assert!(f_check(&params(), 0.0, &q()).is_err());
        assert!(f_tilde(&params(), 3, &q()).is_err());
        assert!(f_tilde(&params(), 102, &q()).is_err());
    }

    #[test]
    fn f_check_against_cosh_kernel() {
        // on (π, 2π) with η = 1 the kernel takes the series route; compare with
        // the cosh integral
        let p = OscWeightParams::new(5, 5, 1, 1, 10.0, WeightSpec::default()).unwrap();
        let (lo, hi) = p.f_support();
        assert!(lo > 2.0 && hi < 6.3);
        let tight = QuadratureSpec { rel_tol: 1e-12, ..Default::default() };
        let direct = integrate_complex(
            |t| f_weight(&p, t) * (k_imag_integral(2.0, t, &tight).unwrap() / t),
            lo,
            hi,
            64,
            &tight,
        )
        .unwrap()
            * (4.0 / PI);
        let got = f_check(&p, 1.0, &q()).unwrap();
        assert!((got - direct).norm() <= 1e-8 * direct.norm(), "{got} vs {direct}");
    }

    /// `f` oscillates in `log t` at frequency `(n x + m y) t / (2√|m n r₁|)`, about
    /// `3π..6π` here; the kernels oscillate at `2η`. Past that resonance both
    /// normalized transforms decay.
    #[test]
    fn decay_envelopes_past_resonance() {
        let p = params();
        let env = |eta: f64, z: Complex64, pw: f64| z.norm() * (PI * eta).exp() * eta.powf(pw);
        let c0 = env(12.0, f_check(&p, 12.0, &q()).unwrap(), 2.0);
        let d0 = env(12.0, f_ddot(&p, 12.0, &q()).unwrap(), 2.5);
        for eta in [16.0, 24.0, 32.0] {
            let c = env(eta, f_check(&p, eta, &q()).unwrap(), 2.0);
            assert!(c <= c0, "check eta = {eta}: {c} vs {c0}");
        }
        for eta in [16.0, 24.0, 30.0] {
            let d = env(eta, f_ddot(&p, eta, &q()).unwrap(), 2.5);
            assert!(d <= d0, "ddot eta = {eta}: {d} vs {d0}");
        }
        // a tighter quadrature leaves the tiny values unchanged
        let tight = QuadratureSpec { rel_tol: 1e-13, max_refinement_depth: 12, ..Default::default() };
        let (a, b) = (f_check(&p, 24.0, &q()).unwrap(), f_check(&p, 24.0, &tight).unwrap());
        assert!((a - b).norm() <= 1e-8 * b.norm());
    }

    #[test]
    fn check_and_ddot_agree_at_small_argument() {
        // for t -> 0, (4/π) K_{2iη} and −(2π/sinh 2πη) Im J_{2iη} share the
        // leading term up to the factor π/2 in modulus
        let p = params();
        for eta in [1.0, 4.0] {
            let r = f_ddot(&p, eta, &q()).unwrap().norm() / f_check(&p, eta, &q()).unwrap().norm();
            assert!((r / (PI / 2.0) - 1.0).abs() < 0.02, "eta = {eta}: {r}");
        }
    }

    #[test]
    fn f_ddot_is_even_in_eta() {
        let p = params();
        for eta in [0.5, 1.0, 3.0] {
            let a = f_ddot(&p, eta, &q()).unwrap();
            let b = f_ddot(&p, -eta, &q()).unwrap();
            assert!((a - b).norm() <= 1e-12 * a.norm(), "eta = {eta}");
        }
    }

    #[test]
    fn f_tilde_decays_in_k() {
        let p = params();
        assert!(p.scale_t() <= 1.0);
        let small = (2..=12).step_by(2).map(|k| f_tilde(&p, k, &q()).unwrap().norm()).fold(0.0, f64::max);
        let large = (40..=100).step_by(2).map(|k| f_tilde(&p, k, &q()).unwrap().norm()).fold(0.0, f64::max);
        assert!(small > 0.0 && large <= small, "{large} vs {small}");
    }

    #[test]
    fn f_tilde_matches_unscaled_formula_at_low_order() {
        let p = OscWeightParams::new(3, 5, 2, 1, 10.0, WeightSpec::default()).unwrap();
        let tight = QuadratureSpec { rel_tol: 1e-12, ..Default::default() };
        let (lo, hi) = p.f_support();
        for k in [2u32, 4, 10] {
            let integral = integrate_complex(|x| f_weight(&p, x) * (j_bessel_all(k - 1, x).unwrap()[k as usize - 1] / x), lo, hi, 32, &tight).unwrap();
            let fact: f64 = (1..k).map(|i| i as f64).product();
            let ik = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let want = integral * (4.0 * fact / (4.0 * PI).powi(k as i32) * ik);
            let got = f_tilde(&p, k, &tight).unwrap();
            assert!((got - want).norm() <= 1e-9 * want.norm(), "k = {k}");
        }
    }

    #[test]
    fn weighted_kloosterman_examples() {
        let p = params();
        let below = weighted_kloosterman_sum(&p, 50).unwrap();
        assert_eq!((below.signed.norm(), below.absolute, below.terms), (0.0, 0.0, 0));
        assert!(below.ratio().is_none());
        let full = weighted_kloosterman_sum(&p, 1000).unwrap();
        assert!(full.terms > 0);
        assert!(full.signed.norm() <= full.absolute);
        // direct sum over every c up to C_max
        let mut direct = Complex64::new(0.0, 0.0);
        for c in 1..=400u64 {
            let s = ModulusTables::new(c).unwrap().kloosterman(p.n * p.r1, -p.m);
            direct += f_weight(&p, 4.0 * PI * p.root() / c as f64) * (s / c as f64);
        }
        assert!((direct - full.signed).norm() <= 1e-12 * full.absolute);
    }

    #[test]
    fn bessel_identities() {
        for &(x, y) in &[(1.0, 2.0), (5.0, 7.0), (0.3, 19.0)] {
            let (a, b) = bessel_identity_residuals(x, y, 60, &q()).unwrap();
            assert!(a < 1e-8 && b < 1e-8, "({x}, {y}): {a}, {b}");
        }
        let (a, b) = bessel_identity_residuals(1e-6, 2.0, 60, &q()).unwrap();
        assert!(a < 1e-10 && b < 1e-10);
        let (a40, b40) = bessel_identity_residuals(5.0, 7.0, 40, &q()).unwrap();
        let (a80, b80) = bessel_identity_residuals(5.0, 7.0, 80, &q()).unwrap();
        // both are at roundoff by k_max = 40; more terms must not make it worse
        assert!(a80 <= a40 + 1e-13 && b80 <= b40 + 1e-13);
        assert!(bessel_identity_residuals(21.0, 2.0, 60, &q()).is_err());
        assert!(bessel_identity_residuals(1.0, 2.0, 38, &q()).is_err());
    }
}
