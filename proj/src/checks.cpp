#include "roughhedge/checks.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <numbers>

#include "roughhedge/charfn.hpp"
#include "roughhedge/error.hpp"
#include "roughhedge/hedging.hpp"
#include "roughhedge/model.hpp"
#include "roughhedge/pricing.hpp"
#include "roughhedge/riccati.hpp"
#include "roughhedge/simulate.hpp"

namespace rh {
namespace {

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

struct Moments {
    double mean = 0.0, se = 0.0, sd = 0.0;
};

template <class F>
Moments moments(std::size_t n, F f) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = f(i);
        s += x;
        s2 += x * x;
    }
    const double m = s / n, var = std::max(0.0, (s2 - n * m * m) / (n - 1));
    return {m, std::sqrt(var / n), std::sqrt(var)};
}

// Collects sub-assertions; the criterion passes when all of them hold.
struct Report {
    bool ok = true;
    std::string text;
    void add(bool pass, const std::string& what) {
        ok = ok && pass;
        if (!text.empty()) text += "; ";
        text += (pass ? "" : "FAILED ") + what;
    }
};

MeanReversionCurve flat_theta(double v) { return {RealGridFn(TimeGrid::uniform(1.0, 1), v)}; }

MeanReversionCurve generic_theta() {
    return {RealGridFn(TimeGrid({0.0, 0.5, 1.0}), std::vector<double>{0.05, 0.03, 0.04})};
}

bool full(const CheckOptions& o) { return o.scale == CheckScale::full; }

// Classical Heston E[exp(i u log(S_T/S0))] with flat long-run variance theta,
// in the form that stays on the principal branch.
cplx heston_cf(const RoughHestonParams& p, double theta, cplx u, double t) {
    const cplx i(0.0, 1.0);
    const cplx b = p.lambda - p.rho * p.nu * i * u;
    const cplx d = std::sqrt(b * b + p.nu * p.nu * (u * u + i * u));
    const cplx g = (b - d) / (b + d);
    const cplx e = std::exp(-d * t);
    const cplx D = (b - d) / (p.nu * p.nu) * (1.0 - e) / (1.0 - g * e);
    const cplx C = p.lambda * theta / (p.nu * p.nu) * ((b - d) * t - 2.0 * std::log((1.0 - g * e) / (1.0 - g)));
    return std::exp(C + D * p.v0);
}

// Gil-Pelaez two-probability call price, adaptive Gauss-Kronrod.
double heston_call(const RoughHestonParams& p, double theta, double k, double t) {
    using boost::math::quadrature::gauss_kronrod;
    const cplx i(0.0, 1.0);
    const double x = std::log(p.s0 / k);
    auto p2 = [&](double u) { return (std::exp(i * u * x) * heston_cf(p, theta, u, t) / (i * u)).real(); };
    auto p1 = [&](double u) { return (std::exp(i * u * x) * heston_cf(p, theta, cplx(u, -1.0), t) / (i * u)).real(); };
    const double inf = std::numeric_limits<double>::infinity();
    const double P1 = 0.5 + gauss_kronrod<double, 61>::integrate(p1, 0.0, inf, 15, 1e-13) / std::numbers::pi;
    const double P2 = 0.5 + gauss_kronrod<double, 61>::integrate(p2, 0.0, inf, 15, 1e-13) / std::numbers::pi;
    return p.s0 * P1 - k * P2;
}

Report heston_limit(const CheckOptions&) {
    Report r;
    RoughHestonParams p;
    p.alpha = 1.0;
    const ForwardVarianceCurve xi = forward_variance_from_theta(p, flat_theta(0.04), riccati_grid(1.0, 512, 1.0));
    double worst = 0.0;
    for (double k : {0.8, 0.9, 1.0, 1.1, 1.2}) {
        const double a = price_vanilla(p, xi, {k, 1.0, OptionKind::call}).price, ref = heston_call(p, 0.04, k, 1.0);
        worst = std::max(worst, std::abs(a - ref) / ref);
    }
    r.add(worst < 1e-3, fmt("max relative error vs Gil-Pelaez Heston %.3e (< 1e-3) over K in 0.8..1.2", worst));
    return r;
}

Report charfn_identities(const CheckOptions&) {
    Report r;
    const RoughHestonParams p;
    double trivial = 0.0, bridge = 0.0;
    for (const MeanReversionCurve& th : {flat_theta(0.04), generic_theta()}) {
        const ForwardVarianceCurve xi = forward_variance_from_theta(p, th, riccati_grid(1.0, 512, p.alpha));
        for (double z : {0.0, 1.0}) {
            trivial = std::max(trivial, std::abs(char_fn(p, th, z, 1.0) - 1.0));
            trivial = std::max(trivial, std::abs(char_fn_fv(p, xi, z, 1.0) - 1.0));
        }
        for (cplx z : {cplx(0.5, 0.5), cplx(1.5, 1.0), cplx(-0.5, 2.0), cplx(0.3, 0.0), cplx(1.5, 5.0),
                       cplx(1.5, 15.0), cplx(3.0, 0.0), cplx(-2.0, 0.0)})
            bridge = std::max(bridge, std::abs(char_fn(p, th, z, 1.0) - char_fn_fv(p, xi, z, 1.0)));
    }
    r.add(trivial < 1e-10, fmt("max |R(0)-1|, |R(1)-1| = %.2e (< 1e-10)", trivial));
    r.add(bridge < 1e-6, fmt("max |char_fn - char_fn_fv| = %.2e (< 1e-6) over 8 z, 2 curves", bridge));
    return r;
}

Report forward_variance_consistency(const CheckOptions& o) {
    Report r;
    const RoughHestonParams p;
    const MeanReversionCurve th = flat_theta(0.04);
    const std::size_t n_paths = full(o) ? 50000 : 5000, n = 100;
    const TimeGrid g = TimeGrid::uniform(1.0, n);
    const PathSet ps = simulate_rough_heston(p, th, g, n_paths, o.seed);
    const ForwardVarianceCurve xi = forward_variance_from_theta(p, th, g);
    double worst = 0.0;
    std::size_t worst_k = 0;
    bool ok = ps.state(0, 0) == xi.xi[0];
    for (std::size_t k = 1; k < g.size(); ++k) {
        const Moments m = moments(n_paths, [&](std::size_t i) { return ps.state(i, k); });
        const double z = std::abs(m.mean - xi.xi[k]) / m.se;
        if (z > worst) worst = z, worst_k = k;
    }
    ok = ok && worst <= 3.0;
    r.add(ok, fmt("%zu paths, %zu nodes: max |mean V - xi| / se = %.2f at t=%.2f (<= 3)", n_paths, g.size(), worst,
                  g[worst_k]));
    const Moments s = moments(n_paths, [&](std::size_t i) { return ps.s(i, n); });
    const double zs = std::abs(s.mean - p.s0) / s.se;
    r.add(zs <= 3.0, fmt("E[S_T]/S0 = %.5f, |z| = %.2f (<= 3)", s.mean / p.s0, zs));
    return r;
}

RiccatiCoeffs moment_coeffs(const RoughHestonParams& p, double a) { return {a, -p.lambda, 0.5 * p.nu * p.nu, p.alpha}; }

double max_diff(const ComplexGridFn& a, const ComplexGridFn& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Report riccati_quality(const CheckOptions&) {
    Report r;
    const RoughHestonParams p;
    const double as[] = {-2.0, -1.0, 0.0, 0.5};
    const TimeGrid g = riccati_grid(1.0, 512, p.alpha);
    const AdamsSolver adams(g, p.alpha);
    const VolterraSolver volterra(g, p.alpha, p.lambda);
    double gap = 0.0;
    std::vector<ComplexGridFn> sols;
    for (double a : as) {
        sols.push_back(adams.solve(moment_coeffs(p, a)).h);
        gap = std::max(gap, max_diff(sols.back(), volterra.solve(moment_coeffs(p, a)).h));
    }
    r.add(gap < 1e-6, fmt("Adams vs Volterra at 512 nodes: %.2e (< 1e-6)", gap));

    double order = std::numeric_limits<double>::infinity();
    for (const RiccatiCoeffs& c : {price_riccati(p, cplx(0.5, 2.0)), moment_coeffs(p, -1.0)}) {
        const RiccatiSolution ref = solve_riccati_adams(c, riccati_grid(1.0, 4096, p.alpha));
        double prev = 0.0;
        for (std::size_t n : {128u, 256u, 512u}) {
            const RiccatiSolution s = solve_riccati_adams(c, riccati_grid(1.0, n, p.alpha));
            const std::size_t stride = 4096 / n;
            double err = 0.0;
            for (std::size_t i = 0; i < s.h.size(); ++i) err = std::max(err, std::abs(s.h[i] - ref.h[i * stride]));
            if (prev > 0.0) order = std::min(order, std::log2(prev / err));
            prev = err;
        }
    }
    r.add(order >= 1.0, fmt("empirical order %.2f (>= 1)", order));

    std::size_t bad = 0;
    for (std::size_t k = 0; k + 1 < sols.size(); ++k)
        for (std::size_t i = 0; i < g.size(); ++i) bad += sols[k][i].real() > sols[k + 1][i].real();
    for (std::size_t k = 0; k < sols.size(); ++k)
        for (std::size_t i = 0; i + 1 < g.size(); ++i) {
            const double d = sols[k][i + 1].real() - sols[k][i].real();
            bad += (as[k] < 0.0 && d > 0.0) || (as[k] > 0.0 && d < 0.0) || (as[k] == 0.0 && d != 0.0);
        }
    r.add(bad == 0, fmt("monotonicity in a and t for a in {-2,-1,0,0.5}: %zu violations", bad));
    return r;
}

Report moment_bounds(const CheckOptions& o) {
    Report r;
    const RoughHestonParams p;
    const MeanReversionCurve th = flat_theta(0.04);
    const MomentBounds b = price_moment_bounds(p, 1.0);
    for (double a : {0.9 * b.a_plus, 0.9 * b.a_minus}) {
        const MomentValue m = price_moment(p, th, a, 1.0);
        r.add(!m.blew_up && std::isfinite(m.value),
              fmt("E[S_T^a] at a=%.4f finite (%.6g)", a, m.value));
    }
    const double a0 = 0.9 * moment_bound_a0(p, 1.0);
    const MomentValue m0 = exp_int_variance_moment(p, th, a0, 1.0);
    r.add(!m0.blew_up && std::isfinite(m0.value), fmt("E[exp(a int V)] at a=0.9 a0=%.3f finite (%.6g)", a0, m0.value));

    // Against Monte Carlo of the scheme state, trapezoid in time.
    const std::size_t n_paths = full(o) ? 50000 : 5000, n = 100;
    const TimeGrid g = TimeGrid::uniform(1.0, n);
    const PathSet ps = simulate_rough_heston(p, th, g, n_paths, o.seed + 1);
    const double ref = exp_int_variance_moment(p, th, -1.0, 1.0).value, dt = g.step();
    const Moments m = moments(n_paths, [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += 0.5 * dt * (ps.state(i, k) + ps.state(i, k + 1));
        return std::exp(-s);
    });
    const double z = std::abs(m.mean - ref) / m.se;
    r.add(z <= 3.0, fmt("E[exp(-int V)] = %.6f vs MC %.6f (se %.1e), |z| = %.2f (<= 3)", ref, m.mean, m.se, z));
    return r;
}

Report hedging_replication(const CheckOptions& o) {
    Report r;
    const RoughHestonParams p;
    const MeanReversionCurve th = flat_theta(0.04);
    const VanillaSpec spec{1.0, 1.0, OptionKind::call};
    const std::vector<std::size_t> steps = full(o) ? std::vector<std::size_t>{64, 128, 256, 512}
                                                   : std::vector<std::size_t>{16, 32};
    const std::size_t n_paths = full(o) ? 1000 : 100;
    double prev = std::numeric_limits<double>::infinity(), last = 0.0, premium = 0.0;
    bool decreasing = true;
    std::string stds;
    for (std::size_t n : steps) {
        const HedgeReport h = replicate(p, th, spec, {}, n, n_paths, o.seed);
        premium = h.initial_price;
        const double z = std::abs(h.pnl_terminal) / h.pnl_stderr;
        r.add(z <= 3.0 && h.n_completed == n_paths,
              fmt("n=%zu: mean P&L %.3e (se %.1e, |z| %.1f, %zu/%zu paths)", n, h.pnl_terminal, h.pnl_stderr, z,
                  h.n_completed, n_paths));
        decreasing = decreasing && h.pnl_std_across_paths < prev;
        prev = last = h.pnl_std_across_paths;
        stds += fmt("%s%.3e", stds.empty() ? "" : " > ", last);
    }
    r.add(decreasing, "std strictly decreasing: " + stds);
    r.add(last < 0.05 * premium, fmt("std at n=%zu is %.2f%% of premium %.5f (< 5%%)", steps.back(),
                                     100.0 * last / premium, premium));
    return r;
}

ForwardVarianceCurve bumped(const ForwardVarianceCurve& xi, const RealGridFn& zeta, double eps) {
    ForwardVarianceCurve out = xi;
    for (std::size_t i = 0; i < out.xi.size(); ++i) out.xi[i] += eps * zeta.at(out.xi.grid[i]);
    return out;
}

template <class F>
double richardson(F f, double h) {
    const double d1 = (f(h) - f(-h)) / (2.0 * h), d2 = (f(0.5 * h) - f(-0.5 * h)) / h;
    return (4.0 * d2 - d1) / 3.0;
}

Report hedge_ratio_fd(const CheckOptions&) {
    Report r;
    const RoughHestonParams p;
    const ForwardVarianceCurve xi = forward_variance_from_theta(p, generic_theta(), riccati_grid(1.0, 256, p.alpha));
    const VanillaSpec spec{1.0, 1.0, OptionKind::call};
    QuadratureConfig tight;
    tight.tol = 1e-14;
    tight.max_tail = 1e-9;
    auto price = [&](const ForwardVarianceCurve& c, double s) {
        RoughHestonParams q = p;
        q.s0 = s;
        return price_vanilla(q, c, spec, tight).price;
    };
    double worst_delta = 0.0, worst_fv = 0.0;
    for (double s : {0.8, 0.9, 1.0, 1.1, 1.2}) {
        const HedgeRatios h = hedge_ratios(p, xi, spec, {}, s);
        const double fd = richardson([&](double e) { return price(xi, s + e); }, 1e-3);
        worst_delta = std::max(worst_delta, std::abs(h.delta - fd) / std::abs(fd));
        for (int kind : {0, 1, 2}) {
            std::vector<double> v(xi.xi.size());
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double t = xi.xi.grid[i];
                v[i] = kind == 0 ? 1.0 : kind == 1 ? std::exp(-3.0 * t) : std::exp(-50.0 * (t - 0.6) * (t - 0.6));
            }
            const RealGridFn zeta(xi.xi.grid, v);
            const double an = fv_directional(h.fv_kernel, zeta, 1.0);
            const double fv = richardson([&](double e) { return price(bumped(xi, zeta, e), s); }, 1e-4);
            worst_fv = std::max(worst_fv, std::abs(an - fv) / std::abs(fv));
        }
    }
    r.add(worst_delta < 1e-4, fmt("delta vs Richardson FD at 5 spots: max rel %.2e (< 1e-4)", worst_delta));
    r.add(worst_fv < 1e-4, fmt("fv_gradient vs Richardson FD, 5 spots x 3 shapes: max rel %.2e (< 1e-4)", worst_fv));
    return r;
}

Report hawkes_appendix(const CheckOptions& o) {
    Report r;
    double worst_mass = 0.0;
    bool mass_ok = true;
    for (double nu : {0.2, 0.5, 0.9}) {
        double mass = 0.0;
        for (std::size_t n = 0; n <= 1000; ++n) mass += cluster_pmf(nu, n);
        // Stirling bound on the terms past n = 1000.
        const double q = nu * std::exp(1.0 - nu);
        const double tail = std::exp(1.0 - nu) * std::pow(q, 1001.0) /
                            (std::sqrt(2.0 * std::numbers::pi) * std::pow(1001.0, 1.5) * (1.0 - q));
        mass_ok = mass_ok && std::abs(mass - 1.0) <= 1e-10 + tail;
        worst_mass = std::max(worst_mass, std::abs(mass - 1.0) - tail);
    }
    r.add(mass_ok, fmt("cluster_pmf mass: max |sum - 1| - tail = %.2e (<= 1e-10), nu in {0.2,0.5,0.9}", worst_mass));

    double worst_ulps = 0.0;
    bool edge_ok = true;
    for (double nu = 0.05; nu < 1.0; nu += 0.05) {
        const long double ref = (long double)nu - 1.0L - std::log((long double)nu);
        const double t = exp_moment_threshold(nu);
        worst_ulps = std::max(worst_ulps, double(std::abs(t - ref) / (std::numeric_limits<double>::epsilon() * ref)));
        edge_ok = edge_ok && exp_moment_admissible(t, nu) && !exp_moment_admissible(std::nextafter(t, 2.0 * t), nu);
    }
    r.add(worst_ulps <= 2.0 && edge_ok, fmt("threshold vs extended-precision nu-1-log nu: %.2f eps", worst_ulps));

    const RealGridFn mu(TimeGrid::uniform(1.0, 1), 1.0), phi(TimeGrid::uniform(1.0, 1), 0.6);
    const double a = 0.1, ref = hawkes_exp_moment(mu, phi, a, 1.0);
    std::mt19937_64 rng = path_rng(o.seed, 0);
    const std::size_t reps = full(o) ? 100000 : 10000;
    std::vector<double> x(reps);
    for (double& v : x) v = std::exp(a * double(simulate_hawkes_events(mu, phi, 1.0, rng).size()));
    const Moments m = moments(reps, [&](std::size_t i) { return x[i]; });
    const double z = std::abs(m.mean - ref) / m.se;
    r.add(z <= 3.0, fmt("E[e^{0.1 N_1}] = %.6f vs thinning %.6f (se %.1e), |z| = %.2f", ref, m.mean, m.se, z));

    HawkesConfig c;
    c.grid = TimeGrid::uniform(1.0, 4);
    const std::size_t n_rep = full(o) ? 300 : 30;
    const Moments l = moments(n_rep, [&](std::size_t i) { return simulate_hawkes(c, o.seed + i).lambda_int.back(); });
    const ForwardVarianceCurve xi = forward_variance_from_theta(c.params, c.theta0, TimeGrid::uniform(1.0, 256));
    double int_xi = 0.0;
    for (std::size_t k = 0; k + 1 < xi.xi.size(); ++k) int_xi += 0.5 * (xi.xi[k] + xi.xi[k + 1]) / 256.0;
    const double rel = std::abs(l.mean / int_xi - 1.0);
    r.add(rel < 0.1, fmt("T=200: mean Lambda_1 = %.5f (se %.1e) vs int xi = %.5f, rel %.1f%% (< 10%%)", l.mean, l.se,
                         int_xi, 100.0 * rel));
    return r;
}

struct Criterion {
    const char* name;
    double budget;  // seconds
    Report (*run)(const CheckOptions&);
};

const Criterion criteria[n_criteria] = {
    {"heston-limit", 10.0, heston_limit},
    {"charfn-identities", 5.0, charfn_identities},
    {"forward-variance-consistency", 120.0, forward_variance_consistency},
    {"riccati-quality", 30.0, riccati_quality},
    {"moment-bounds", 120.0, moment_bounds},
    {"hedging-replication", 600.0, hedging_replication},
    {"hedge-ratio-fd", 60.0, hedge_ratio_fd},
    {"hawkes-appendix", 300.0, hawkes_appendix},
};

}  // namespace

CheckResult run_check(int id, const CheckOptions& o) {
    if (id < 1 || id > n_criteria) throw DomainError("check id out of range");
    const Criterion& c = criteria[id - 1];
    CheckResult out;
    out.id = id;
    out.name = c.name;
    const auto t0 = std::chrono::steady_clock::now();
    Report r;
    try {
        r = c.run(o);
    } catch (const std::exception& e) {
        r.add(false, std::string("exception: ") + e.what());
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.budget = c.budget;
    out.within_budget = !full(o) || out.seconds < c.budget;
    out.passed = r.ok && out.within_budget;
    out.detail = r.text;
    return out;
}

std::vector<CheckResult> run_checks(const CheckOptions& o) {
    std::vector<CheckResult> out;
    for (int id = 1; id <= n_criteria; ++id) out.push_back(run_check(id, o));
    return out;
}

}  // namespace rh
