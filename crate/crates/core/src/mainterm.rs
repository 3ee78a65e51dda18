//! Main term `M_V(X, r)` of the smoothed count and the limiting constant `K(V, r)`.
//!
//! After the substitution `x = Xu, y = Xv/(lk), z = Xt/(lk)` every `(l, k)` term of
//! the Möbius/divisor double sum becomes `X² μ(k)/(l k²) · I(r/X²)` with the same
//! reduced integral
//!
//! ```text
//! I(α) = ∭_{[1,2]³} V(u) V(v) V(t) V((α + uv)/t) du dv dt / t,
//! ```
//!
//! so the double sum collapses to `X² · σ(|r|)/|r| · ζ(2)⁻¹ · I(α)`. Both the
//! collapsed form and the literal truncated double sum are provided.

use std::f64::consts::PI;

use num_rational::Ratio;
use serde::Serialize;

use crate::arith::{divisors, mobius, sigma};
use crate::counting::{count_fast, CountQuery};
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_3d, QuadratureSpec};
use crate::sum::NeumaierSum;
use crate::weights::{eval_weight, integral, sup_derivative, WeightSpec};

/// Exponent toward the Ramanujan–Petersson conjecture (Kim–Sarnak).
pub const THETA: f64 = 7.0 / 64.0;

/// `1/ζ(2) = 6/π²`.
pub fn zeta2_inv() -> f64 {
    6.0 / (PI * PI)
}

/// `σ(n)/n` as an exact fraction.
pub fn divisor_factor(n: u64) -> Ratio<u64> {
    Ratio::new(sigma(n), n)
}

fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MainTermBreakdown {
    pub alpha: f64,
    pub i_alpha: f64,
    #[serde(serialize_with = "ser_ratio")]
    pub divisor_factor: Ratio<u64>,
    pub zeta2_inv: f64,
    pub closed_form: f64,
    pub truncated_value: Option<f64>,
    pub k_truncation: Option<u64>,
    pub tail_bound: Option<f64>,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

/// `I(α)`; identically zero once `|α| >= 3` since `(α + uv)/t` then leaves `(1, 2)`.
pub fn reduced_integral(spec: &WeightSpec, alpha: f64, quad: &QuadratureSpec) -> Result<f64> {
    if alpha.abs() >= 3.0 {
        return Ok(0.0);
    }
    integrate_3d(
        |u, v, t| {
            let outer = eval_weight(spec, (alpha + u * v) / t);
            if outer == 0.0 {
                return 0.0;
            }
            eval_weight(spec, u) * eval_weight(spec, v) * eval_weight(spec, t) * outer / t
        },
        quad,
    )
}

fn check_query(q: &CountQuery) -> Result<()> {
    if q.r == 0 {
        return Err(Error::InvalidR("r must be nonzero".into()));
    }
    if (q.r.unsigned_abs() as f64) >= 3.0 * q.x * q.x {
        return Err(Error::InvalidR(format!("|r| must be below 3X^2, got r = {}, X = {}", q.r, q.x)));
    }
    Ok(())
}

/// `M_V(X, r) = X² · σ(|r|)/|r| · ζ(2)⁻¹ · I(r/X²)`.
pub fn main_term_closed(spec: &WeightSpec, q: &CountQuery, quad: &QuadratureSpec) -> Result<MainTermBreakdown> {
    check_query(q)?;
    let alpha = q.r as f64 / (q.x * q.x);
    let i_alpha = reduced_integral(spec, alpha, quad)?;
    Ok(closed_breakdown(q, alpha, i_alpha))
}

fn closed_breakdown(q: &CountQuery, alpha: f64, i_alpha: f64) -> MainTermBreakdown {
    let df = divisor_factor(q.r.unsigned_abs());
    let z = zeta2_inv();
    MainTermBreakdown {
        alpha,
        i_alpha,
        divisor_factor: df,
        zeta2_inv: z,
        closed_form: q.x * q.x * ratio_to_f64(df) * z * i_alpha,
        truncated_value: None,
        k_truncation: None,
        tail_bound: None,
    }
}

/// `Σ_{l | r} Σ_{k <= K} μ(k)/(l k²)`.
pub fn truncated_coefficient(r: u64, k_max: u64) -> f64 {
    let mut acc = NeumaierSum::new();
    for l in divisors(r) {
        for k in 1..=k_max {
            let mu = mobius(k);
            if mu != 0 {
                acc.add(mu as f64 / (l as f64 * (k * k) as f64));
            }
        }
    }
    acc.value()
}

/// The double sum evaluated literally for `k <= K`, alongside the closed form.
/// The tail bound uses `Σ_{k > K} 1/k² < 1/K`.
pub fn main_term_truncated(
    spec: &WeightSpec,
    q: &CountQuery,
    k_max: u64,
    quad: &QuadratureSpec,
) -> Result<MainTermBreakdown> {
    check_query(q)?;
    if k_max == 0 {
        return Err(Error::InvalidArgument("truncation K must be positive".into()));
    }
    let alpha = q.r as f64 / (q.x * q.x);
    let i_alpha = reduced_integral(spec, alpha, quad)?;
    let mut out = closed_breakdown(q, alpha, i_alpha);
    let x2 = q.x * q.x;
    out.truncated_value = Some(x2 * truncated_coefficient(q.r.unsigned_abs(), k_max) * i_alpha);
    out.k_truncation = Some(k_max);
    out.tail_bound = Some(x2 * ratio_to_f64(out.divisor_factor) / k_max as f64);
    Ok(out)
}

/// `K(V, r) = ζ(2)⁻¹ · σ(|r|)/|r| · I(0)`.
pub fn k_constant(spec: &WeightSpec, r: i64, quad: &QuadratureSpec) -> Result<f64> {
    if r == 0 {
        return Err(Error::InvalidR("r must be nonzero".into()));
    }
    let i0 = reduced_integral(spec, 0.0, quad)?;
    Ok(ratio_to_f64(divisor_factor(r.unsigned_abs())) * zeta2_inv() * i0)
}

/// Constant `C` with `|M_V(X, r)/X² − K(V, r)| <= C·|r|/X²` at `r = 1`, from the
/// mean value theorem applied to the outer weight:
/// `|V((α + uv)/t) − V(uv/t)| <= sup|V′|·|α|/t`, hence
/// `C = ζ(2)⁻¹ · sup|V′| · (∫V)² · ∫V(t)/t² dt`.
/// For general `r` the bound scales by `σ(|r|)/|r|`.
pub fn corollary_constant(spec: &WeightSpec, quad: &QuadratureSpec) -> Result<f64> {
    let one = integral(spec, quad)?;
    let inv_sq = integrate(|t| eval_weight(spec, t) / (t * t), 1.0, 2.0, quad)?;
    Ok(zeta2_inv() * sup_derivative(spec) * one * one * inv_sq)
}

/// `E = S_V(X, r) − M_V(X, r)`.
pub fn error_term(spec: &WeightSpec, q: &CountQuery, quad: &QuadratureSpec) -> Result<f64> {
    let s = count_fast(spec, q)?;
    let m = main_term_closed(spec, q, quad)?;
    Ok(s.weighted_sum - m.closed_form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v() -> WeightSpec {
        WeightSpec::default()
    }

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn integral_vanishes_outside_support() {
        for a in [3.0, -3.0, 3.5, -10.0] {
            assert_eq!(reduced_integral(&v(), a, &q()).unwrap(), 0.0);
        }
        // just inside: the integrand support is tiny but the quadrature agrees with 0
        let near = reduced_integral(&v(), 2.99, &q()).unwrap();
        let mid = reduced_integral(&v(), 0.0, &q()).unwrap();
        assert!(near >= 0.0 && near < 1e-6 * mid);
    }

    #[test]
    fn reduced_integral_against_monte_carlo() {
        let i0 = reduced_integral(&v(), 0.0, &q()).unwrap();
        assert!(i0 > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 10_000_000usize;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let (u, w, t) = (1.0 + rng.gen::<f64>(), 1.0 + rng.gen::<f64>(), 1.0 + rng.gen::<f64>());
            let y = eval_weight(&v(), u) * eval_weight(&v(), w) * eval_weight(&v(), t) * eval_weight(&v(), u * w / t) / t;
            s += y;
            s2 += y * y;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((i0 - mean).abs() < 3.0 * se, "quad {i0} mc {mean} ± {se}");
    }

    #[test]
    fn divisor_factor_examples() {
        assert_eq!(divisor_factor(6), Ratio::new(2, 1));
        assert!((zeta2_inv() - 0.6079271).abs() < 1e-7);
        assert_eq!(THETA, 0.109375);
    }

    #[test]
    fn reciprocal_divisor_sum_is_sigma_over_n() {
        for n in 1..=10_000u64 {
            let s = divisors(n).into_iter().fold(Ratio::new(0u64, 1), |acc, l| acc + Ratio::new(1, l));
            assert_eq!(s, divisor_factor(n), "n = {n}");
        }
    }

    #[test]
    fn mobius_partial_sums_converge_to_inverse_zeta2() {
        for k in [10u64, 100, 1000] {
            let s = truncated_coefficient(1, k);
            assert!((s - zeta2_inv()).abs() < 1.0 / k as f64, "K = {k}");
        }
        let s = truncated_coefficient(1, 2000);
        assert!((s - zeta2_inv()).abs() / zeta2_inv() < 1e-3);
    }

    #[test]
    fn truncated_with_single_term() {
        let query = CountQuery::new(20.0, 6).unwrap();
        let b = main_term_truncated(&v(), &query, 1, &q()).unwrap();
        let want = 400.0 * 2.0 * b.i_alpha;
        assert!((b.truncated_value.unwrap() - want).abs() <= 1e-14 * want);
        assert_eq!(b.tail_bound, Some(800.0));
    }

    #[test]
    fn closed_form_within_tail_of_truncated() {
        let query = CountQuery::new(100.0, 1).unwrap();
        for k in [10u64, 100, 1000, 2000] {
            let b = main_term_truncated(&v(), &query, k, &q()).unwrap();
            let diff = (b.closed_form - b.truncated_value.unwrap()).abs();
            assert!(diff <= b.tail_bound.unwrap(), "K = {k}");
            // the scaled version of the tail bound, with I(α) included, also holds
            assert!(diff <= b.tail_bound.unwrap() * b.i_alpha, "K = {k}");
        }
        let b = main_term_truncated(&v(), &query, 2000, &q()).unwrap();
        let rel = (b.closed_form - b.truncated_value.unwrap()).abs() / b.closed_form;
        assert!(rel < 1e-5, "rel = {rel}");
    }

    #[test]
    fn k_constant_examples() {
        let k1 = k_constant(&v(), 1, &q()).unwrap();
        let i0 = reduced_integral(&v(), 0.0, &q()).unwrap();
        assert_eq!(k1, zeta2_inv() * i0);
        let k2 = k_constant(&v(), 2, &q()).unwrap();
        assert!((k2 / k1 - 1.5).abs() < 1e-15);
        assert!(k_constant(&v(), 0, &q()).is_err());
    }

    #[test]
    fn main_term_approaches_k_constant() {
        let c = corollary_constant(&v(), &q()).unwrap();
        assert!(c > 0.0);
        let x = 100.0;
        for r in [1i64, 5, 25] {
            let m = main_term_closed(&v(), &CountQuery::new(x, r).unwrap(), &q()).unwrap().closed_form;
            let k = k_constant(&v(), r, &q()).unwrap();
            assert!((m / (x * x) - k).abs() <= c * r as f64 / (x * x), "r = {r}");
        }
    }

    #[test]
    fn error_term_vanishes_when_both_sides_do() {
        let query = CountQuery::unchecked(3.0, 100);
        let s = count_fast(&v(), &query).unwrap().weighted_sum;
        let alpha = 100.0 / 9.0;
        assert_eq!(s, 0.0);
        assert_eq!(reduced_integral(&v(), alpha, &q()).unwrap(), 0.0);
        // the validated constructor rejects this r outright
        assert!(CountQuery::new(3.0, 100).is_err());
    }

    #[test]
    fn error_term_is_small_at_moderate_x() {
        let query = CountQuery::new(40.0, 1).unwrap();
        let e = error_term(&v(), &query, &q()).unwrap();
        assert!(e.abs() < 40f64.powf(1.3), "E = {e}");
        // r and -r computed independently
        let em = error_term(&v(), &CountQuery::new(40.0, -1).unwrap(), &q()).unwrap();
        let s = count_fast(&v(), &query).unwrap().weighted_sum;
        assert!((e - em).abs() < 1e-3 * s, "E(r) = {e}, E(-r) = {em}");
    }

    #[test]
    fn reduced_integral_is_lipschitz_on_a_grid() {
        let alphas: Vec<f64> = (0..=24).map(|i| -3.0 + 0.25 * i as f64).collect();
        let vals: Vec<f64> = alphas.iter().map(|&a| reduced_integral(&v(), a, &q()).unwrap()).collect();
        assert!(vals.iter().all(|&x| x >= 0.0));
        let slopes: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).abs() / 0.25).collect();
        let lip = slopes.iter().cloned().fold(0.0, f64::max);
        // no jump: each step is bounded by 10x the larger neighbouring slope
        for i in 1..slopes.len() - 1 {
            let local = slopes[i - 1].max(slopes[i + 1]).max(1e-3 * lip);
            assert!(slopes[i] <= 10.0 * local, "jump near alpha = {}", alphas[i]);
        }
    }
}
