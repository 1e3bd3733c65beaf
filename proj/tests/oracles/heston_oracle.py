# Classical Heston call prices (Lewis single-integral form) for the alpha = 1
# CLI fixture: flat theta0 = V0 = 0.04, lambda 2, nu 0.3, rho -0.7, S0 = 1.
from mpmath import mp, mpf, mpc, sqrt, exp, log, quad, pi, inf

mp.dps = 30
lam, nu, rho, v0, theta = mpf(2), mpf("0.3"), mpf("-0.7"), mpf("0.04"), mpf("0.04")


def cf(u, t):
    # E[exp(i u log S_t)], principal-branch form.
    i = mpc(0, 1)
    b = lam - rho * nu * i * u
    d = sqrt(b * b + nu * nu * (u * u + i * u))
    g = (b - d) / (b + d)
    e = exp(-d * t)
    D = (b - d) / nu**2 * (1 - e) / (1 - g * e)
    C = lam * theta / nu**2 * ((b - d) * t - 2 * log((1 - g * e) / (1 - g)))
    return exp(C + D * v0)


def call(k, t):
    # C = S - sqrt(S K)/pi int_0^inf Re(e^{i u x} phi(u - i/2)) / (u^2 + 1/4) du, x = log(S/K).
    x = -log(k)
    f = lambda u: (exp(mpc(0, 1) * u * x) * cf(mpc(u, -0.5), t)).real / (u * u + mpf(1) / 4)
    return 1 - sqrt(k) / pi * quad(f, [0, 5, 20, 80, inf])


print("strike,maturity,price")
for t in ["0.5", "1"]:
    for k in ["0.8", "0.9", "1", "1.1", "1.2"]:
        print(f"{k},{t},{mp.nstr(call(mpf(k), mpf(t)), 17)}")
