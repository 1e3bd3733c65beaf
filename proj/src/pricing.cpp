#include "roughhedge/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "roughhedge/charfn.hpp"
#include "roughhedge/parallel.hpp"
#include "roughhedge/quadrature.hpp"

namespace rh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// int_0^t of the piecewise-linear interpolant.
double integrate_pl(const RealGridFn& f, double t) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < f.size() && f.grid[i] < t; ++i) {
        const double hi = std::min(f.grid[i + 1], t);
        acc += 0.5 * (hi - f.grid[i]) * (f[i] + f.at(hi));
    }
    if (t > f.grid.horizon()) acc += (t - f.grid.horizon()) * f.values.back();
    return acc;
}

struct Pair {
    double log_s, s, k;
};

struct Builder {
    const RoughHestonParams& p;
    const ForwardVarianceCurve& xi;
    const QuadratureConfig& q;
    TimeGrid t_grid;
    FourierGrid g;
    std::vector<Pair> pairs;

    struct Node {
        double b;
        cplx expo;
        std::shared_ptr<const RiccatiSolution> h;
    };

    Node eval(double b) const {
        const cplx z(g.a, b);
        auto sol = cached_riccati(price_riccati(p, z), t_grid);
        if (sol->blew_up) throw NumericalError("Riccati blow-up at a Fourier node inside the strip");
        const cplx e = lag_integral(chi_from_h(*sol, z, p.rho, p.nu), g.tau, xi.xi);
        return {b, e, std::move(sol)};
    }

    std::vector<Node> eval_all(const std::vector<double>& bs) const {
        std::vector<Node> out(bs.size());
        parallel_for(bs.size(), [&](std::size_t i) { out[i] = eval(bs[i]); });
        return out;
    }

    std::vector<double> nodes(double lo, double hi) const {
        const GaussRule& r = gauss_legendre(q.n_nodes);
        std::vector<double> x(r.x.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * r.x[i];
        return x;
    }

    cplx integrand(const Pair& pr, double b, cplx expo) const {
        const cplx z(g.a, b);
        const cplx zl = z * pr.log_s;
        const cplx d = std::exp(zl + expo) - std::exp(zl + 0.5 * (z * z - z) * g.var);
        return payoff_transform(g.a, pr.k, -b) * d;
    }

    double panel_sum(const Pair& pr, double lo, double hi, const std::vector<Node>& ns) const {
        const GaussRule& r = gauss_legendre(q.n_nodes);
        double acc = 0.0;
        for (std::size_t i = 0; i < ns.size(); ++i) acc += r.w[i] * integrand(pr, ns[i].b, ns[i].expo).real();
        return 0.5 * (hi - lo) * acc;
    }

    void append(double lo, double hi, std::vector<Node>&& ns) {
        const GaussRule& r = gauss_legendre(q.n_nodes);
        for (std::size_t i = 0; i < ns.size(); ++i) {
            g.b.push_back(ns[i].b);
            g.w.push_back(0.5 * (hi - lo) * r.w[i]);
            g.expo.push_back(ns[i].expo);
            g.h.push_back(std::move(ns[i].h));
        }
    }

    // Adds [lo, hi]; with the adaptive rule, halves until two levels agree.
    void add_panel(double lo, double hi, int depth = 0) {
        std::vector<Node> ns = eval_all(nodes(lo, hi));
        if (q.rule == QuadRule::adaptive && depth < 8) {
            const double mid = 0.5 * (lo + hi);
            std::vector<Node> left = eval_all(nodes(lo, mid)), right = eval_all(nodes(mid, hi));
            bool ok = true;
            for (const Pair& pr : pairs) {
                const double whole = panel_sum(pr, lo, hi, ns);
                const double halves = panel_sum(pr, lo, mid, left) + panel_sum(pr, mid, hi, right);
                if (std::abs(whole - halves) > q.tol * pr.s) ok = false;
            }
            if (!ok) {
                add_panel(lo, mid, depth + 1);
                add_panel(mid, hi, depth + 1);
                return;
            }
            append(lo, mid, std::move(left));
            append(mid, hi, std::move(right));
        } else {
            append(lo, hi, std::move(ns));
        }
        g.panel_end.push_back(g.b.size());
    }

    // Largest phase change of the integrand across the last panel.
    double phase_change(std::size_t first, std::size_t last) const {
        double m = 0.0;
        for (const Pair& pr : pairs) {
            const double d = (g.b[last] - g.b[first]) * (pr.log_s - std::log(pr.k)) + (g.expo[last] - g.expo[first]).imag();
            m = std::max(m, std::abs(d));
        }
        return m;
    }
};

}  // namespace

cplx payoff_transform(double a, double strike, double b) {
    const cplx ib(0.0, b);
    return std::exp((1.0 - a + ib) * std::log(strike)) / ((ib - a) * (ib - a + 1.0));
}

double default_damping(const RoughHestonParams& p, double maturity) {
    const MomentBounds mb = price_moment_bounds(p, maturity);
    double a = std::min(1.5, 0.5 * (1.0 + mb.a_plus));
    if (p.rho > 0.0) {
        const double cap = p.lambda / (p.rho * p.nu);
        if (!(cap > 1.0)) throw DomainError("no damping a > 1 satisfies lambda - rho nu a > 0");
        a = std::min(a, 0.5 * (1.0 + cap));
    }
    return a;
}

double bs_call(double s, double k, double var) {
    if (!(var > 0.0)) return std::max(s - k, 0.0);
    const double sd = std::sqrt(var), d1 = (std::log(s / k) + 0.5 * var) / sd;
    return s * norm_cdf(d1) - k * norm_cdf(d1 - sd);
}

double bs_call_delta(double s, double k, double var) {
    if (!(var > 0.0)) return s > k ? 1.0 : (s < k ? 0.0 : 0.5);
    return norm_cdf((std::log(s / k) + 0.5 * var) / std::sqrt(var));
}

double bs_call_dvar(double s, double k, double var) {
    if (!(var > 0.0)) return s == k ? std::numeric_limits<double>::infinity() : 0.0;
    const double sd = std::sqrt(var), d1 = (std::log(s / k) + 0.5 * var) / sd;
    return s * std::exp(-0.5 * d1 * d1) / (std::sqrt(2.0 * std::numbers::pi) * 2.0 * sd);
}

FourierGrid fourier_grid(const RoughHestonParams& p, const ForwardVarianceCurve& xi, double tau,
                         const QuadratureConfig& q, std::span<const double> spots, std::span<const double> strikes) {
    validate_params(p);
    if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("maturity must be positive");
    if (q.n_nodes < 1 || q.n_time < 2) throw DomainError("quadrature needs n_nodes >= 1 and n_time >= 2");
    if (xi.xi.values.empty()) throw DomainError("empty forward variance curve");
    Builder bl{p, xi, q, riccati_grid(tau, q.n_time, p.alpha), {}, {}};
    FourierGrid& g = bl.g;
    g.params = p;
    g.tau = tau;
    g.a = q.damping > 0.0 ? q.damping : default_damping(p, tau);
    if (!(g.a > 1.0)) throw DomainError("damping must exceed 1");
    if (!in_price_strip(p, g.a, tau)) throw DomainError("damping outside the price-moment strip at this maturity");
    g.var = integrate_pl(xi.xi, tau);
    for (double s : spots)
        for (double k : strikes) {
            if (!(s > 0.0) || !(k > 0.0)) throw DomainError("spot and strike must be positive");
            bl.pairs.push_back({std::log(s), s, k});
        }
    if (bl.pairs.empty()) throw DomainError("no (spot, strike) pair to price");

    const double b_end = q.b_max > 0.0 ? q.b_max : q.b_limit;
    double lo = 0.0, width = std::min(1.0, b_end);
    while (lo < b_end) {
        const double hi = std::min(lo + width, b_end);
        const std::size_t first = g.b.size();
        bl.add_panel(lo, hi);
        lo = hi;
        if (q.b_max <= 0.0) {
            bool done = true;
            for (const Pair& pr : bl.pairs)
                if (!(fourier_tail(g, pr.s, pr.k) <= q.tol * pr.s)) done = false;
            if (done) break;
        }
        const double dphi = bl.phase_change(first, g.b.size() - 1);
        width = std::clamp(6.0 * width / std::max(dphi, 1e-12), 0.5 * width, 2.0 * width);
    }
    return g;
}

double fourier_tail(const FourierGrid& g, double spot, double strike) {
    const std::size_t n = g.b.size();
    if (n == 0) return kInf;
    const double log_s = std::log(spot);
    // Exact zero integrand (xi = 0): nothing is truncated.
    bool zero = true;
    for (std::size_t i = 0; i < n && zero; ++i) zero = (g.expo[i] == 0.0 && g.var == 0.0);
    if (zero) return 0.0;
    std::size_t prev = g.panel_end.size() >= 2 ? g.panel_end[g.panel_end.size() - 2] - 1 : 0;
    const std::size_t last = n - 1;
    if (prev == last) prev = 0;
    const double bl = g.b[last], bp = g.b[prev];
    // log|L| = a log S + Re expo; chord slope gives the exponential decay rate.
    const double c = (g.expo[prev].real() - g.expo[last].real()) / (bl - bp);
    if (!(c > 0.0) || !(bl > 0.0)) return kInf;
    const double ka = std::pow(strike, 1.0 - g.a) * std::exp(g.a * log_s);
    double tail = ka * std::exp(g.expo[last].real()) / (c * bl * bl);
    if (g.var > 0.0) {
        // Gaussian envelope of L_bs.
        tail += ka * std::exp(0.5 * (g.a * g.a - g.a) * g.var - 0.5 * bl * bl * g.var) / (g.var * bl * bl * bl);
    }
    return tail / std::numbers::pi;
}

FourierValue fourier_value(const FourierGrid& g, double spot, double strike) {
    const double log_s = std::log(spot);
    double c = 0.0, d = 0.0;
    for (std::size_t i = 0; i < g.b.size(); ++i) {
        const cplx z(g.a, g.b[i]);
        const cplx zl = z * log_s;
        const cplx diff = std::exp(zl + g.expo[i]) - std::exp(zl + 0.5 * (z * z - z) * g.var);
        const cplx I = payoff_transform(g.a, strike, -g.b[i]) * diff;
        c += g.w[i] * I.real();
        d += g.w[i] * (I * z).real();
    }
    FourierValue v;
    v.call = bs_call(spot, strike, g.var) + c / std::numbers::pi;
    v.delta = bs_call_delta(spot, strike, g.var) + d / (std::numbers::pi * spot);
    v.tail_bound = fourier_tail(g, spot, strike);
    return v;
}

FourierGrid fourier_rebase(const FourierGrid& g, const ForwardVarianceCurve& xi) {
    FourierGrid out = g;
    out.var = integrate_pl(xi.xi, g.tau);
    for (std::size_t i = 0; i < g.b.size(); ++i)
        out.expo[i] = lag_integral(chi_from_h(*g.h[i], cplx(g.a, g.b[i]), g.params.rho, g.params.nu), g.tau, xi.xi);
    return out;
}

namespace {

PriceResult finish(const FourierGrid& g, const FourierValue& v, double s, const VanillaSpec& spec,
                   const QuadratureConfig& q) {
    if (!(v.tail_bound <= q.max_tail * s))
        throw AccuracyError("Fourier tail bound " + std::to_string(v.tail_bound) + " above tolerance", v.tail_bound);
    const double slack = std::max(1e-7 * s, 10.0 * v.tail_bound);
    if (!(v.call >= std::max(s - spec.strike, 0.0) - slack && v.call <= s + slack))
        throw AccuracyError("Fourier call price violates static bounds", v.tail_bound);
    PriceResult r;
    r.price = spec.kind == OptionKind::call ? v.call : v.call - s + spec.strike;
    r.damping_used = g.a;
    r.tail_bound = v.tail_bound;
    return r;
}

}  // namespace

PriceResult price_vanilla(const RoughHestonParams& p, const ForwardVarianceCurve& xi, const VanillaSpec& spec,
                          const QuadratureConfig& q) {
    if (!(spec.strike > 0.0) || !(spec.maturity > 0.0)) throw DomainError("strike and maturity must be positive");
    const double s = p.s0, k = spec.strike;
    const FourierGrid g = fourier_grid(p, xi, spec.maturity, q, {&s, 1}, {&k, 1});
    return finish(g, fourier_value(g, s, k), s, spec, q);
}

std::vector<std::vector<SurfaceCell>> price_surface(const RoughHestonParams& p, const ForwardVarianceCurve& xi,
                                                    std::span<const double> strikes,
                                                    std::span<const double> maturities, const QuadratureConfig& q,
                                                    OptionKind kind) {
    std::vector<std::vector<SurfaceCell>> out(maturities.size(), std::vector<SurfaceCell>(strikes.size()));
    auto fail = [](SurfaceCell& c, const std::exception& e) {
        c.ok = false;
        c.error = e.what();
        const auto* re = dynamic_cast<const Error*>(&e);
        c.error_kind = re ? re->kind() : ErrorKind::numerical;
        if (const auto* ae = dynamic_cast<const AccuracyError*>(&e)) c.result.tail_bound = ae->tail_bound();
    };
    const double s = p.s0;
    for (std::size_t i = 0; i < maturities.size(); ++i) {
        std::vector<double> good;
        for (double k : strikes)
            if (k > 0.0 && std::isfinite(k)) good.push_back(k);
        FourierGrid g;
        try {
            if (good.empty()) throw DomainError("no valid strike");
            g = fourier_grid(p, xi, maturities[i], q, {&s, 1}, good);
        } catch (const std::exception& e) {
            for (SurfaceCell& c : out[i]) fail(c, e);
            continue;
        }
        for (std::size_t j = 0; j < strikes.size(); ++j) {
            try {
                if (!(strikes[j] > 0.0) || !std::isfinite(strikes[j])) throw DomainError("strike must be positive");
                const VanillaSpec spec{strikes[j], maturities[i], kind};
                out[i][j].result = finish(g, fourier_value(g, s, strikes[j]), s, spec, q);
            } catch (const std::exception& e) {
                fail(out[i][j], e);
            }
        }
    }
    return out;
}

}  // namespace rh
