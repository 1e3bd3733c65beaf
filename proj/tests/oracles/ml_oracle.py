"""High-precision Mittag-Leffler reference values.

Partial sums of sum_n z^n / Gamma(alpha n + beta) evaluated with mpmath at
a working precision large enough to absorb the cancellation on the negative
axis. Truncation is stopped once the terms are monotonically decreasing and
the geometric tail bound drops below 1e-40 relative to the sum.
"""
import mpmath as mp

mp.mp.dps = 450


def ml(alpha, beta, z):
    alpha = mp.mpf(alpha)
    beta = mp.mpf(beta)
    z = mp.mpf(z)
    s = mp.mpf(0)
    n = 0
    prev = None
    while True:
        t = z ** n * mp.rgamma(alpha * n + beta)
        s += t
        if prev is not None and n > 10 and abs(t) < abs(prev):
            ratio = abs(t / prev)
            if ratio < 1:
                tail = abs(t) * ratio / (1 - ratio)
                if tail < mp.mpf(10) ** -40 * max(abs(s), mp.mpf(10) ** -300):
                    break
        prev = t
        n += 1
    return s


CASES = [
    (0.6, 0.6), (0.6, 1.0), (0.6, 2.0), (0.6, 3.0),
    (0.75, 0.75), (0.75, 1.0), (0.9, 0.9), (0.9, 1.0), (0.95, 1.0),
]
ZS = [-50, -30, -20, -10, -7, -5, -3, -2, -1, -0.5, 0.5, 1, 2, 5, 10, 30, 50]

if __name__ == "__main__":
    for a, b in CASES:
        for z in ZS:
            v = ml(a, b, z)
            print("    {%s, %s, %s, %s}," % (a, b, z, mp.nstr(v, 20, min_fixed=-1, max_fixed=1)))
