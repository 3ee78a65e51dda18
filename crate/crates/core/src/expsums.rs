//! Kloosterman, Ramanujan and Salié sums by direct enumeration over units,
//! the Weil-bound ratio, and a numerical check of the twisted Poisson formula
//!
//! ```text
//! Σ_{(n,q)=1} g(n) e(a n̄/q) = (1/q) Σ_n ĝ(n/q) S(n, a; q).
//! ```
//!
//! Modulus 1 convention: the single residue 0 counts as a unit with inverse 0,
//! so every sum equals 1 there.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{divisors, gcd_u64, inverse_table, jacobi, mobius, tau, Modulus};
use crate::error::{Error, Result};
use crate::quad::QuadratureSpec;
use crate::sum::{ComplexSum, NeumaierSum};
use crate::weights::{eval_weight, fourier, sum_positive_dual, WeightSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KloostermanQuery {
    pub m: i64,
    pub n: i64,
    pub c: u64,
}

impl KloostermanQuery {
    pub fn new(m: i64, n: i64, c: u64) -> Result<Self> {
        Modulus::new(c)?;
        Ok(KloostermanQuery { m, n, c })
    }
}

/// Precomputed per-modulus data: inverses and the unit circle `e(k/c)`.
pub struct ModulusTables {
    pub modulus: Modulus,
    pub inverses: Vec<u64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl ModulusTables {
    pub fn new(c: u64) -> Result<Self> {
        let modulus = Modulus::new(c)?;
        let inverses = inverse_table(modulus);
        let (cos, sin) = (0..c)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / c as f64;
                (th.cos(), th.sin())
            })
            .unzip();
        Ok(ModulusTables { modulus, inverses, cos, sin })
    }

    /// Units `β` mod `c` paired with `β̄`; for `c = 1` the single pair `(0, 0)`.
    pub fn units(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        let c = self.modulus.get();
        let start = if c == 1 { 0 } else { 1 };
        (start..c).filter(move |&b| c == 1 || gcd_u64(b, c) == 1).map(move |b| (b, self.inverses[b as usize]))
    }

    #[inline]
    fn phase_index(&self, m: u64, n: u64, b: u64, binv: u64) -> usize {
        let q = self.modulus;
        ((q.mul(m, b) + q.mul(n, binv)) % q.get()) as usize
    }

    /// `S(m, n; c)` via the cosine pairing: the sum is real.
    pub fn kloosterman(&self, m: i64, n: i64) -> f64 {
        let q = self.modulus;
        let (mr, nr) = (q.reduce(m as i128), q.reduce(n as i128));
        let s: NeumaierSum = self.units().map(|(b, bi)| self.cos[self.phase_index(mr, nr, b, bi)]).collect();
        let v = s.value();
        debug_assert!(self.kloosterman_complex(m, n).im.abs() < 1e-9 * (q.get() as f64).max(1.0));
        v
    }

    /// `S(m, n; c)` summed as complex exponentials.
    pub fn kloosterman_complex(&self, m: i64, n: i64) -> Complex64 {
        let q = self.modulus;
        let (mr, nr) = (q.reduce(m as i128), q.reduce(n as i128));
        let mut acc = ComplexSum::new();
        for (b, bi) in self.units() {
            let k = self.phase_index(mr, nr, b, bi);
            acc.add(Complex64::new(self.cos[k], self.sin[k]));
        }
        acc.value()
    }

    /// Salié sum `Σ (β|c) e((mβ + nβ̄)/c)`; `c` must be odd.
    pub fn salie(&self, m: i64, n: i64) -> Result<Complex64> {
        let q = self.modulus;
        if q.get().is_multiple_of(2) {
            return Err(Error::EvenModulus(q.get()));
        }
        let (mr, nr) = (q.reduce(m as i128), q.reduce(n as i128));
        let mut acc = ComplexSum::new();
        for (b, bi) in self.units() {
            let chi = jacobi(b as i64, q.get()) as f64;
            let k = self.phase_index(mr, nr, b, bi);
            acc.add(Complex64::new(chi * self.cos[k], chi * self.sin[k]));
        }
        Ok(acc.value())
    }
}

/// Kloosterman sum `S(m, n; c) = Σ*_{β mod c} e((mβ + nβ̄)/c)`.
pub fn kloosterman(q: &KloostermanQuery) -> f64 {
    ModulusTables::new(q.c).expect("validated modulus").kloosterman(q.m, q.n)
}

/// Ramanujan sum `r_q(n) = Σ_{d | (q, n)} d μ(q/d)`.
pub fn ramanujan(q: u64, n: i64) -> i64 {
    assert!(q >= 1, "Ramanujan sums need q >= 1");
    let g = gcd_u64(q, n.unsigned_abs());
    divisors(g).into_iter().map(|d| d as i64 * mobius(q / d) as i64).sum()
}

pub fn salie(m: i64, n: i64, c: u64) -> Result<Complex64> {
    if c.is_multiple_of(2) {
        return Err(Error::EvenModulus(c));
    }
    ModulusTables::new(c)?.salie(m, n)
}

/// Weil-bound scale `τ(c) √c √gcd(m, n, c)`.
pub fn weil_scale(m: i64, n: i64, c: u64) -> f64 {
    let g = gcd_u64(gcd_u64(m.unsigned_abs(), n.unsigned_abs()), c);
    tau(c) as f64 * (c as f64).sqrt() * (g as f64).sqrt()
}

/// Weil-gap of one query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeilGap {
    pub sum: f64,
    pub gap: f64,
    /// Both frequencies vanish mod `c`; then `|S| = φ(c)` and the bound is not
    /// expected to hold.
    pub degenerate: bool,
}

/// `|S(m, n; c)| / (τ(c) √c √gcd(m, n, c))`.
pub fn weil_gap(q: &KloostermanQuery) -> WeilGap {
    let s = kloosterman(q);
    weil_gap_from(s, q)
}

pub(crate) fn weil_gap_from(s: f64, q: &KloostermanQuery) -> WeilGap {
    let c = q.c as i64;
    let degenerate = q.c > 1 && q.m % c == 0 && q.n % c == 0;
    WeilGap { sum: s, gap: s.abs() / weil_scale(q.m, q.n, q.c), degenerate }
}

/// Residual of the twisted Poisson formula for `g(x) = V(x/scale)`.
pub fn twisted_poisson_residual(spec: &WeightSpec, a: i64, q: u64, scale: f64, quad: &QuadratureSpec) -> Result<f64> {
    if q < 2 {
        return Err(Error::InvalidArgument(format!("modulus must be at least 2, got {q}")));
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
    }
    let tables = ModulusTables::new(q)?;
    let modulus = tables.modulus;

    // left side: n in the open support (scale, 2 scale), coprime to q
    let lo = scale.floor() as i64 + 1;
    let hi = (2.0 * scale).ceil() as i64 - 1;
    let mut lhs = ComplexSum::new();
    for n in lo..=hi {
        let nr = modulus.reduce(n as i128);
        if gcd_u64(nr, q) != 1 {
            continue;
        }
        let k = modulus.mul(modulus.reduce(a as i128), tables.inverses[nr as usize]);
        let th = 2.0 * PI * k as f64 / q as f64;
        lhs.add(Complex64::from_polar(eval_weight(spec, n as f64 / scale), th));
    }

    // right side: ĝ(ξ) = scale · V̂(scale ξ), both signs of n summed
    let term = |n: i64| -> Result<Complex64> {
        let ghat = scale * fourier(spec, scale * n as f64 / q as f64, quad)?;
        Ok(ghat * tables.kloosterman(n, a))
    };
    let mut rhs = ComplexSum::new();
    rhs.add(term(0)?);
    rhs.add(sum_positive_dual(term)?);
    rhs.add(sum_positive_dual(|n| term(-n))?);
    let rhs = rhs.value() / q as f64;
    Ok((lhs.value() - rhs).norm())
}
