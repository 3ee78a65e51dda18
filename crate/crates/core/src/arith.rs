//! Exact integer arithmetic: gcd, modular inverses, Möbius and divisor functions,
//! primality and Jacobi symbols.
//!
//! Factorization is trial division; inputs stay below ~10^9 here.

use crate::error::{Error, Result};

/// A modulus `q >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Modulus(u64);

impl Modulus {
    pub fn new(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidModulus(q));
        }
        Ok(Modulus(q))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// Reduces any signed integer into `[0, q)`.
    #[inline]
    pub fn reduce(self, a: i128) -> u64 {
        a.rem_euclid(self.0 as i128) as u64
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.0 as u128) as u64
    }
}

impl TryFrom<u64> for Modulus {
    type Error = Error;

    fn try_from(q: u64) -> Result<Self> {
        Modulus::new(q)
    }
}

/// Greatest common divisor of `|a|` and `|b|`; `gcd(0, 0) = 0`.
pub fn gcd(a: i64, b: i64) -> u64 {
    gcd_u64(a.unsigned_abs(), b.unsigned_abs())
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of `a` modulo `q` in `[0, q)`. For `q = 1` the answer is 0.
pub fn mod_inverse(a: i64, q: Modulus) -> Result<u64> {
    let m = q.get() as i128;
    if m == 1 {
        return Ok(0);
    }
    // extended Euclid on (a mod m, m)
    let (mut old_r, mut r) = ((a as i128).rem_euclid(m), m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return Err(Error::NotInvertible { a, q: q.get() });
    }
    Ok(old_s.rem_euclid(m) as u64)
}

/// Prime factorization as ascending `(prime, exponent)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1, "factorize needs n >= 1");
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn mobius(n: u64) -> i8 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// All positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    assert!(n >= 1, "divisors needs n >= 1");
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Sum of divisors.
pub fn sigma(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .map(|(p, e)| (0..=e).map(|k| p.pow(k)).sum::<u64>())
        .product()
}

/// Number of divisors.
pub fn tau(n: u64) -> u64 {
    factorize(n).into_iter().map(|(_, e)| e as u64 + 1).product()
}

/// Euler's totient.
pub fn totient(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .map(|(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let f = factorize(n);
    f.len() == 1 && f[0].1 == 1
}

/// Jacobi symbol `(a | n)` for odd `n >= 1`.
pub fn jacobi(a: i64, n: u64) -> i8 {
    assert!(n % 2 == 1, "Jacobi symbol needs an odd modulus");
    let mut a = (a as i128).rem_euclid(n as i128) as u64;
    let mut n = n;
    let mut result = 1i8;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Table of inverses modulo `q`: entry `b` holds `b^{-1} mod q` for units and
/// 0 otherwise. Built in O(q) from the identity `inv(i) = -(q / i) inv(q mod i)`,
/// which needs a prime modulus, so for composite `q` we fall back to Euclid per unit.
pub fn inverse_table(q: Modulus) -> Vec<u64> {
    let m = q.get();
    let mut inv = vec![0u64; m as usize];
    if m == 1 {
        return inv;
    }
    if is_prime(m) {
        inv[1] = 1;
        for i in 2..m {
            let k = m / i;
            let r = (m % i) as usize;
            inv[i as usize] = q.mul(m - k, inv[r]);
        }
    } else {
        for b in 1..m {
            if gcd_u64(b, m) == 1 {
                inv[b as usize] = mod_inverse(b as i64, q).expect("unit");
            }
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(gcd(0, 7), 7);
        assert_eq!(gcd(-4, 6), 2);
        assert_eq!(gcd(0, 0), 0);
    }

    #[test]
    fn mod_inverse_examples() {
        let q7 = Modulus::new(7).unwrap();
        assert_eq!(mod_inverse(3, q7).unwrap(), 5);
        for q in 2..50u64 {
            assert_eq!(mod_inverse(1, Modulus::new(q).unwrap()).unwrap(), 1);
        }
        assert_eq!(
            mod_inverse(2, Modulus::new(4).unwrap()),
            Err(Error::NotInvertible { a: 2, q: 4 })
        );
        assert_eq!(mod_inverse(5, Modulus::new(1).unwrap()).unwrap(), 0);
        assert_eq!(mod_inverse(-3, q7).unwrap(), 2);
        assert!(Modulus::new(0).is_err());
    }

    #[test]
    fn mobius_examples() {
        assert_eq!(mobius(1), 1);
        assert_eq!(mobius(12), 0);
        assert_eq!(mobius(30), -1);
    }

    #[test]
    fn divisor_examples() {
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(6), vec![1, 2, 3, 6]);
        assert_eq!(divisors(49), vec![1, 7, 49]);
        assert_eq!(sigma(1), 1);
        assert_eq!(sigma(6), 12);
        assert_eq!(sigma(10), 18);
    }

    #[test]
    fn mobius_sums_to_indicator() {
        for n in 1..=10_000u64 {
            let s: i64 = divisors(n).into_iter().map(|d| mobius(d) as i64).sum();
            assert_eq!(s, (n == 1) as i64, "n = {n}");
        }
    }

    #[test]
    fn sigma_is_divisor_sum() {
        for n in 1..=10_000u64 {
            assert_eq!(sigma(n), divisors(n).iter().sum::<u64>(), "n = {n}");
            assert_eq!(tau(n), divisors(n).len() as u64);
        }
    }

    #[test]
    fn jacobi_matches_euler_criterion_for_primes() {
        for &p in &[3u64, 5, 7, 11, 13, 101, 199] {
            let q = Modulus::new(p).unwrap();
            for a in 0..p {
                let e = (0..(p - 1) / 2).fold(1u64, |acc, _| q.mul(acc, a));
                let want = if a == 0 { 0 } else if e == 1 { 1 } else { -1 };
                assert_eq!(jacobi(a as i64, p), want, "({a}|{p})");
            }
        }
        // multiplicative in the modulus
        assert_eq!(jacobi(2, 15), jacobi(2, 3) * jacobi(2, 5));
    }

    #[test]
    fn inverse_table_is_correct() {
        for m in [1u64, 2, 7, 12, 97, 100, 101] {
            let q = Modulus::new(m).unwrap();
            let t = inverse_table(q);
            for b in 1..m {
                if gcd_u64(b, m) == 1 {
                    assert_eq!(q.mul(b, t[b as usize]), 1 % m);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn inverse_times_a_is_one(q in 2u64..(1u64 << 62), a in any::<i64>()) {
            let m = Modulus::new(q).unwrap();
            if gcd(a, q as i64) == 1 {
                let inv = mod_inverse(a, m).unwrap();
                prop_assert!(inv < q);
                prop_assert_eq!(m.mul(m.reduce(a as i128), inv), 1);
            } else {
                prop_assert!(mod_inverse(a, m).is_err());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn multiplicative_on_coprime_pairs(m in 1u64..5000, n in 1u64..5000) {
            prop_assume!(gcd_u64(m, n) == 1);
            prop_assert_eq!(sigma(m * n), sigma(m) * sigma(n));
            prop_assert_eq!(mobius(m * n), mobius(m) * mobius(n));
        }
    }
}
