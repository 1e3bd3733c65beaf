#include "roughhedge/charfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "roughhedge/error.hpp"
#include "roughhedge/special_fn.hpp"

namespace rh {

namespace {

void check_horizon(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("horizon must be positive");
}

void check_strip(const RoughHestonParams& p, cplx z, double t) {
    if (!in_price_strip(p, z, t)) throw DomainError("argument outside the price-moment strip");
}

std::shared_ptr<const RiccatiSolution> solve_on(const RiccatiCoeffs& c, double t, const CharFnOptions& o) {
    if (o.n_time < 2) throw DomainError("n_time must be at least 2");
    return cached_riccati(c, riccati_grid(t, o.n_time, c.alpha));
}

}  // namespace

RiccatiCoeffs price_riccati(const RoughHestonParams& p, cplx z) {
    return {0.5 * (z * z - z), z * p.rho * p.nu - p.lambda, 0.5 * p.nu * p.nu, p.alpha};
}

RiccatiCoeffs variance_riccati(const RoughHestonParams& p, cplx a) {
    return {a, -p.lambda, 0.5 * p.nu * p.nu, p.alpha};
}

RiccatiCoeffs joint_riccati(const RoughHestonParams& p, cplx z, double x) {
    return {z - 0.5 * x * x, cplx(-p.lambda, x * p.nu), 0.5 * p.nu * p.nu, p.alpha};
}

double moment_bound_a0(const RoughHestonParams& p, double t) {
    validate_params(p);
    check_horizon(t);
    const double x = p.lambda + p.alpha * std::pow(t, -p.alpha) * rgamma(1.0 - p.alpha);
    return x * x / (2.0 * p.nu * p.nu);
}

MomentBounds price_moment_bounds(const RoughHestonParams& p, double t) {
    validate_params(p);
    check_horizon(t);
    if (std::abs(p.rho) >= 1.0) throw DomainError("price moment bounds need |rho| < 1");
    MomentBounds b;
    b.x_t = p.lambda + p.alpha * std::pow(t, -p.alpha) * rgamma(1.0 - p.alpha);
    b.a0 = b.x_t * b.x_t / (2.0 * p.nu * p.nu);
    const double nu2 = p.nu * p.nu, lin = 2.0 * p.nu * b.x_t - p.rho * nu2;
    b.delta_t = lin * lin + nu2 * nu2 * (1.0 - p.rho * p.rho);
    const double sq = std::sqrt(b.delta_t), den = 2.0 * nu2 * (1.0 - p.rho * p.rho);
    b.a_minus = (nu2 - 2.0 * p.rho * p.nu * b.x_t - sq) / den;
    b.a_plus = (nu2 - 2.0 * p.rho * p.nu * b.x_t + sq) / den;
    return b;
}

bool in_price_strip(const RoughHestonParams& p, cplx z, double t) {
    const MomentBounds b = price_moment_bounds(p, t);
    const double a = z.real();
    return p.lambda - p.rho * p.nu * a > 0.0 && a > b.a_minus && a < b.a_plus;
}

cplx lag_integral(const ComplexGridFn& k, double t, const RealGridFn& w) {
    check_horizon(t);
    if (k.grid.horizon() < t * (1.0 - 1e-12)) throw DomainError("kernel grid does not cover the horizon");
    std::vector<double> s;
    s.reserve(k.size() + w.size() + 2);
    s.push_back(0.0);
    s.push_back(t);
    for (std::size_t i = 0; i < k.size() && k.grid[i] < t; ++i) s.push_back(t - k.grid[i]);
    for (std::size_t i = 0; i < w.size() && w.grid[i] < t; ++i) s.push_back(w.grid[i]);
    std::sort(s.begin(), s.end());
    const double tiny = 1e-14 * t;
    std::size_t m = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i] >= 0.0 && s[i] <= t && (m == 0 || s[i] - s[m - 1] > tiny)) s[m++] = s[i];
    s.resize(m);
    s.back() = t;
    cplx acc = 0.0;
    cplx k0 = k.at(t - s[0]);
    double w0 = w.at(s[0]);
    for (std::size_t i = 1; i < s.size(); ++i) {
        const cplx k1 = k.at(t - s[i]);
        const double w1 = w.at(s[i]);
        acc += (s[i] - s[i - 1]) / 6.0 * (2.0 * k0 * w0 + k0 * w1 + k1 * w0 + 2.0 * k1 * w1);
        k0 = k1;
        w0 = w1;
    }
    return acc;
}

cplx theta_exponent(const RoughHestonParams& p, const MeanReversionCurve& theta, const ComplexGridFn& h, double t) {
    cplx out = p.lambda * lag_integral(h, t, theta.theta);
    if (p.alpha == 1.0) return out + p.v0 * h.at(t);
    // V0 (I^(1-alpha) h)(t): exact power weights on the cells of h's grid.
    const TimeGrid& g = h.grid;
    const double q = 1.0 - p.alpha;
    cplx sing = 0.0;
    for (std::size_t j = 0; j + 1 < g.size() && g[j] < t; ++j) {
        const double hi_tau = std::min(g[j + 1], t);
        const double a = t - g[j], b = std::max(0.0, t - hi_tau);
        if (!(a > b)) continue;
        const cplx h1 = g[j + 1] <= t ? h[j + 1] : h.at(t);
        const HatIntegrals w = power_hat_integrals(a, b, q);
        sing += h[j] * w.near_a + h1 * w.near_b;
    }
    return out + p.v0 * rgamma(q) * sing;
}

MomentValue exp_int_variance_moment(const RoughHestonParams& p, const MeanReversionCurve& theta, double a, double t,
                                    const CharFnOptions& o) {
    MomentValue m;
    m.guaranteed = a < moment_bound_a0(p, t);
    if (a == 0.0) {
        m.value = 1.0;
        return m;
    }
    const auto sol = solve_on(variance_riccati(p, a), t, o);
    if (sol->blew_up) {
        if (m.guaranteed) throw NumericalError("Riccati blow-up below the exponential-moment bound");
        m.blew_up = true;
        m.value = std::numeric_limits<double>::infinity();
        return m;
    }
    m.value = std::exp(theta_exponent(p, theta, sol->h, t).real());
    return m;
}

MomentValue price_moment(const RoughHestonParams& p, const MeanReversionCurve& theta, double a, double t,
                         const CharFnOptions& o) {
    MomentValue m;
    m.guaranteed = in_price_strip(p, a, t);
    const auto sol = solve_on(price_riccati(p, a), t, o);
    if (sol->blew_up) {
        if (m.guaranteed) throw NumericalError("Riccati blow-up inside the price-moment strip");
        m.blew_up = true;
        m.value = std::numeric_limits<double>::infinity();
        return m;
    }
    m.value = std::pow(p.s0, a) * std::exp(theta_exponent(p, theta, sol->h, t).real());
    return m;
}

cplx joint_mgf(const RoughHestonParams& p, const MeanReversionCurve& theta, cplx z, double x, double t,
               const CharFnOptions& o) {
    if (!(z.real() < moment_bound_a0(p, t))) throw DomainError("joint transform needs Re z < a0(t)");
    const auto sol = solve_on(joint_riccati(p, z, x), t, o);
    if (sol->blew_up) throw NumericalError("Riccati blow-up below the exponential-moment bound");
    return std::exp(theta_exponent(p, theta, sol->h, t));
}

cplx char_fn(const RoughHestonParams& p, const MeanReversionCurve& theta, cplx z, double t, const CharFnOptions& o) {
    check_strip(p, z, t);
    const auto sol = solve_on(price_riccati(p, z), t, o);
    if (sol->blew_up) throw NumericalError("Riccati blow-up inside the price-moment strip");
    return std::exp(theta_exponent(p, theta, sol->h, t));
}

cplx char_fn_fv(const RoughHestonParams& p, const ForwardVarianceCurve& xi, cplx z, double t, const CharFnOptions& o) {
    check_strip(p, z, t);
    const auto sol = solve_on(price_riccati(p, z), t, o);
    if (sol->blew_up) throw NumericalError("Riccati blow-up inside the price-moment strip");
    return std::exp(lag_integral(chi_from_h(*sol, z, p.rho, p.nu), t, xi.xi));
}

cplx conditional_char(const RoughHestonParams& p, double s_t, const ForwardVarianceCurve& xi_t, cplx z, double tau,
                      const CharFnOptions& o) {
    if (!(s_t > 0.0)) throw DomainError("spot must be positive");
    return std::exp(z * std::log(s_t)) * char_fn_fv(p, xi_t, z, tau, o);
}

}  // namespace rh
