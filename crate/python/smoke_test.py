"""Smoke test for the detcount extension module.

Build and install first, e.g.

    maturin build -m crates/py/Cargo.toml --release --out dist
    pip install dist/detcount-*.whl
    python python/smoke_test.py
"""

import cmath
import math
import sys

import detcount


def bump(x):
    if not 1.0 < x < 2.0:
        return 0.0
    return math.exp(-1.0 / ((x - 1.0) * (2.0 - x)))


def brute_count(x, r):
    ns = [n for n in range(1, int(2 * x) + 1) if x < n < 2 * x]
    w = {n: bump(n / x) for n in ns}
    total = 0.0
    hits = 0
    for a in ns:
        for b in ns:
            for c in ns:
                num = r + b * c
                if num % a == 0 and (num // a) in w:
                    v = w[a] * w[b] * w[c] * w[num // a]
                    if v > 0.0:
                        total += v
                        hits += 1
    return total, hits


def brute_kloosterman(m, n, c):
    s = 0.0
    for b in range(c):
        if math.gcd(b, c) == 1:
            bi = pow(b, -1, c) if c > 1 else 0
            s += math.cos(2 * math.pi * (m * b + n * bi) / c)
    return s


def check(name, ok, detail=""):
    print(("ok   " if ok else "FAIL ") + name + (f"  {detail}" if detail else ""))
    return ok


def main():
    results = []

    s, hits = detcount.count(8.0, 3)
    bs, bhits = brute_count(8.0, 3)
    results.append(check("count against brute force", hits == bhits and abs(s - bs) <= 1e-12 * bs, f"{s:.6e} vs {bs:.6e}"))
    results.append(check("naive and fast counts agree", detcount.count(9.0, -5, naive=True) == detcount.count(9.0, -5)))

    alpha, i_alpha, closed, trunc, tail = detcount.main_term(50.0, 1, truncate=2000)
    results.append(check("main term truncation within tail bound", abs(closed - trunc) <= tail, f"{abs(closed - trunc):.3e}"))
    results.append(check("K ratio sigma(2)/2", abs(detcount.k_constant(2) / detcount.k_constant(1) - 1.5) < 1e-12))

    worst = max(abs(detcount.kloosterman(m, n, c) - brute_kloosterman(m, n, c)) for m in range(-3, 4) for n in range(-3, 4) for c in (1, 2, 7, 12, 30))
    results.append(check("kloosterman against direct sum", worst < 1e-9, f"{worst:.2e}"))
    results.append(check("ramanujan r_12(0) = phi(12)", detcount.ramanujan(12, 0) == 4))
    results.append(check("weil gap at most 1", detcount.weil_gap(3, 5, 101) <= 1.0))

    g = detcount.complex_gamma(complex(5.0, 0.0))
    results.append(check("gamma(5) = 24", abs(g - 24.0) < 1e-12))
    z = complex(0.5, 3.0)
    gz, gz1 = detcount.complex_gamma(z), detcount.complex_gamma(z + 1)
    results.append(check("gamma functional equation", abs(gz1 - z * gz) < 1e-12 * abs(gz1)))

    try:
        import scipy.special as sp

        worst = max(abs(detcount.j_bessel(k, x) - sp.jv(k, x)) for k in (0, 1, 5, 30) for x in (0.5, 3.0, 17.0, 60.0))
        results.append(check("j_bessel against scipy", worst < 1e-10, f"{worst:.2e}"))
    except ImportError:
        print("skip j_bessel against scipy (scipy missing)")

    try:
        import mpmath

        worst = 0.0
        for eta, t in ((0.5, 0.5), (1.0, 3.0), (4.0, 1.0)):
            want = float(mpmath.besselk(2j * eta, t).real)
            worst = max(worst, abs(detcount.k_bessel_imag(eta, t) - want))
        results.append(check("k_bessel_imag against mpmath", worst < 1e-9, f"{worst:.2e}"))
    except ImportError:
        print("skip k_bessel_imag against mpmath (mpmath missing)")

    ra, rb = detcount.bessel_identity_residuals(1.0, 2.0, 80)
    results.append(check("J-Bessel identities", ra < 1e-8 and rb < 1e-8, f"{ra:.1e}, {rb:.1e}"))

    fc, fd = detcount.bessel_transforms(100.0, 1.0)
    results.append(check("transforms are finite and nonzero", all(cmath.isfinite(v) and v != 0 for v in (fc, fd))))
    signed, absolute = detcount.weighted_kloosterman_sum(100.0)
    results.append(check("triangle inequality on weighted sums", abs(signed) <= absolute, f"ratio {abs(signed) / absolute:.3f}"))

    rows, slope = detcount.error_scan(1, [20.0, 30.0, 45.0])
    results.append(check("error scan rows", len(rows) == 3 and slope is not None))

    for bad in (lambda: detcount.count(10.0, 0), lambda: detcount.kloosterman(1, 1, 0), lambda: detcount.salie(1, 1, 8)):
        try:
            bad()
            results.append(check("invalid input raises ValueError", False))
        except ValueError:
            results.append(check("invalid input raises ValueError", True))

    failed = results.count(False)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
