//! Special functions: complex Gamma, integer-order `J_k`, `K` of purely
//! imaginary order and `J` of purely imaginary order.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{integrate_complex, QuadratureSpec};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

pub const J_MAX_ORDER: u32 = 200;
pub const J_MAX_ARG: f64 = 100.0;
pub const J_IMAG_MAX_ARG: f64 = 30.0;
pub const J_IMAG_MAX_ETA: f64 = 30.0;

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// A branch of `log Γ(z)`; `exp` of it is `Γ(z)`.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if is_pole(z) {
        return Err(Error::PoleAtNonpositiveInteger(z.re));
    }
    if z.re < 0.5 {
        // reflection: Γ(z) Γ(1 − z) = π / sin(πz)
        let s = (PI * z).sin();
        return Ok(Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(1.0 - z)?);
    }
    let z = z - 1.0;
    let mut a = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + a.ln())
}

/// `Γ(z)`, Lanczos in the right half plane and reflection for `Re z < 1/2`.
pub fn complex_gamma(z: Complex64) -> Result<Complex64> {
    Ok(ln_gamma(z)?.exp())
}

fn check_j_range(k: u32, x: f64) -> Result<()> {
    if k > J_MAX_ORDER || !(x.abs() <= J_MAX_ARG) {
        return Err(Error::OutOfValidatedRange(format!("J_k(x) needs k <= {J_MAX_ORDER}, |x| <= {J_MAX_ARG}; got k = {k}, x = {x}")));
    }
    Ok(())
}

/// `J_0(x), ..., J_kmax(x)` by Miller's downward recurrence, normalized with
/// `J_0 + 2 Σ J_{2m} = 1`.
pub fn j_bessel_all(kmax: u32, x: f64) -> Result<Vec<f64>> {
    check_j_range(kmax, x)?;
    let mut out = vec![0.0; kmax as usize + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    let ax = x.abs();
    let top = (kmax as f64).max(ax);
    let mut n = (top + 30.0 + (160.0 * top).sqrt()) as usize;
    n += n % 2;
    let (mut jp, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    for k in (1..=n).rev() {
        // j = J_k, jp = J_{k+1}
        if k <= kmax as usize {
            out[k] = j;
        }
        if k % 2 == 0 {
            norm += 2.0 * j;
        }
        let jm = 2.0 * k as f64 / ax * j - jp;
        jp = j;
        j = jm;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    out[0] = j;
    norm += j;
    for (k, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if x < 0.0 && k % 2 == 1 {
            *v = -*v;
        }
    }
    Ok(out)
}

/// `J_k(x)` for integer `k <= 200`, `|x| <= 100`.
pub fn j_bessel(k: u32, x: f64) -> Result<f64> {
    Ok(j_bessel_all(k, x)?[k as usize])
}

/// `s` with `J_k(x) = s · (x/2)^k / k!`, for `0 < x`. Avoids the underflow of
/// `J_k` itself when `x ≪ k`.
pub fn j_bessel_scaled(k: u32, x: f64) -> Result<f64> {
    check_j_range(k, x)?;
    if !(x > 0.0) {
        return Err(Error::OutOfValidatedRange(format!("scaled J needs x > 0, got {x}")));
    }
    let q = x * x / 4.0;
    if q <= k as f64 + 1.0 {
        // terms decrease monotonically from 1
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        let mut m = 0.0;
        while term.abs() > 1e-17 * sum.abs() {
            m += 1.0;
            term *= -q / (m * (k as f64 + m));
            sum += term;
        }
        return Ok(sum);
    }
    let j = j_bessel(k, x)?;
    let log_scale = ln_gamma(Complex64::new(k as f64 + 1.0, 0.0))?.re - k as f64 * (x / 2.0).ln();
    Ok(j * log_scale.exp())
}

/// `K_{iν}(t)` from `K_{iν} = −π Im I_{iν}(t) / sinh(νπ)` with the power series
/// of `I_{iν}`. Accurate when `t` is small or `ν` is large against `t²`.
pub fn k_imag_series(nu: f64, t: f64) -> Result<f64> {
    if nu == 0.0 {
        return Ok(k0_series(t));
    }
    let inu = Complex64::new(0.0, nu);
    let q = t * t / 4.0;
    // term_m = (t/2)^{2m + iν} / (m! Γ(m + 1 + iν))
    let mut term = ((t / 2.0).ln() * inu - ln_gamma(1.0 + inu)?).exp();
    let mut sum = term;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (m + inu));
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() && m > q.sqrt() {
            break;
        }
    }
    Ok(-PI * sum.im / (nu * PI).sinh())
}

/// `K_0(t)` by its ascending series.
fn k0_series(t: f64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let q = t * t / 4.0;
    let (mut term, mut h) = (1.0, 0.0);
    let mut i0 = 1.0;
    let mut rest = 0.0;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * m);
        h += 1.0 / m;
        i0 += term;
        rest += term * h;
        if term * h.max(1.0) < 1e-17 * i0 {
            break;
        }
    }
    -((t / 2.0).ln() + EULER_GAMMA) * i0 + rest
}

/// `K_{iν}(t) = ∫₀^∞ e^{−t cosh u} cos(νu) du`, cut where `e^{−t cosh u} < 10⁻¹⁸`.
pub fn k_imag_integral(nu: f64, t: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("K needs t > 0, got {t}")));
    }
    let cut = 18.0 * 10f64.ln();
    let u_max = (cut / t).max(1.0).acosh().max(1.0);
    let panels = (nu.abs() * u_max / PI).ceil() as usize + 1;
    let z = integrate_complex(|u| Complex64::new((-t * u.cosh()).exp() * (nu * u).cos(), 0.0), 0.0, u_max, panels, quad)?;
    Ok(z.re)
}

/// `K_{2iη}(t)`, real and even in `η`. Uses the `I`-series where it avoids the
/// cancellation that the cosh integral suffers when `K` is exponentially small,
/// and the cosh integral otherwise.
pub fn k_bessel_imag(eta: f64, t: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("K needs t > 0, got {t}")));
    }
    let nu = 2.0 * eta.abs();
    let loss = (2.0 * t).min(t * t / (4.0 * nu.max(1e-300)));
    if nu == 0.0 && t <= 2.0 || nu >= 1e-3 && (t <= 2.0 || loss <= 5.0) {
        k_imag_series(nu, t)
    } else {
        k_imag_integral(nu, t, quad)
    }
}

/// Double-double arithmetic: an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    fn quick(a: f64, b: f64) -> Self {
        let s = a + b;
        Dd { hi: s, lo: b - (s - a) }
    }

    fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Dd { hi: p, lo: a.mul_add(b, -p) }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let t = Dd::two_sum(self.lo, o.lo);
        let u = Dd::quick(s.hi, s.lo + t.hi);
        Dd::quick(u.hi, u.lo + t.lo)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = Dd::two_prod(self.hi, o.hi);
        Dd::quick(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }

    fn scale(self, b: f64) -> Dd {
        let p = Dd::two_prod(self.hi, b);
        Dd::quick(p.hi, p.lo + self.lo * b)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.add(o.scale(q1).neg());
        let q2 = r.hi / o.hi;
        let r = r.add(o.scale(q2).neg());
        let q3 = r.hi / o.hi;
        Dd::quick(q1, q2).add(Dd::new(q3))
    }
}

/// `J_{2iη}(x)` by its power series, for `0 < x <= 30`, `|η| <= 30`.
///
/// `J_ν(x) = (x/2)^ν/Γ(1+ν) · Σ_m c_m` with `c_m = Π_{j<=m} −(x²/4)/(j(j+ν))`.
/// The `c_m` grow to `~I_0(x)` before cancelling, so they are formed and summed
/// in double-double; only the common prefactor is rounded to `f64`.
pub fn j_bessel_imag_order(eta: f64, x: f64) -> Result<Complex64> {
    if !(x > 0.0 && x <= J_IMAG_MAX_ARG) || !(eta.abs() <= J_IMAG_MAX_ETA) {
        return Err(Error::OutOfValidatedRange(format!(
            "J_(2i eta)(x) needs 0 < x <= {J_IMAG_MAX_ARG}, |eta| <= {J_IMAG_MAX_ETA}; got x = {x}, eta = {eta}"
        )));
    }
    let nu = Complex64::new(0.0, 2.0 * eta);
    let prefactor = ((x / 2.0).ln() * nu - ln_gamma(1.0 + nu)?).exp();
    let q = Dd::two_prod(x, x).scale(0.25);
    let two_eta = 2.0 * eta;
    let four_eta2 = Dd::two_prod(two_eta, two_eta);
    // 1/(j(j + ν)) = (j − ν)/(j(j² + 4η²)), with j − ν = j − 2iη exact
    let (mut cre, mut cim) = (Dd::new(1.0), Dd::new(0.0));
    let (mut sre, mut sim) = (cre, cim);
    let mut m = 0.0;
    loop {
        m += 1.0;
        let denom = Dd::new(m * m).add(four_eta2).scale(m);
        let f = q.neg().div(denom);
        let (re, im) = (cre.mul(f), cim.mul(f));
        // (re + i im)(m − i·2η)
        cre = re.scale(m).add(im.scale(two_eta));
        cim = im.scale(m).add(re.scale(two_eta).neg());
        sre = sre.add(cre);
        sim = sim.add(cim);
        let (cn, sn) = (cre.hi.hypot(cim.hi), sre.hi.hypot(sim.hi));
        if cn == 0.0 || cn < 1e-33 * sn {
            break;
        }
    }
    Ok(prefactor * Complex64::new(sre.hi + sre.lo, sim.hi + sim.lo))
}
