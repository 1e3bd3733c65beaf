# Reference values for the forward-variance link and the conditional curve.
from mpmath import mp, mpf, gamma, quad, nsum, inf

mp.dps = 40
alpha, lam, v0 = mpf("0.6"), mpf(2), mpf("0.04")


def ml(a, b, z):
    return nsum(lambda n: z**n / gamma(a * n + b), [0, inf])


# theta0(t) = v0 (1 + t):  xi(t) = v0 (1 + t - t E_{a,2}(-lam t^a)).
for t in ["0.1", "0.25", "0.5", "1"]:
    t = mpf(t)
    print("xi", t, mp.nstr(v0 * (1 + t - t * ml(alpha, 2, -lam * t**alpha)), 20))

# Linear path V_v = v0 (1 + v) on [0, 1], theta0 = v0, t0 = 1.
c = 1 / (lam * gamma(1 - alpha))
for u in ["0.05", "0.2", "0.5", "1"]:
    u = mpf(u)
    k = quad(lambda v: (1 + u - v) ** (-1 - alpha) * v0 * (v - 1), [0, mpf("0.5"), 1])
    th = v0 + c * (alpha * k + (u + 1) ** (-alpha) * (v0 - 2 * v0))
    print("cond", u, mp.nstr(th, 20))
