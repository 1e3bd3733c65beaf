#include "roughhedge/special_fn.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <type_traits>
#include <vector>

#include "roughhedge/error.hpp"
#include "roughhedge/quadrature.hpp"

namespace rh {

namespace {

constexpr double pi = std::numbers::pi;
constexpr int kMaxTaylorTerms = 20000;
// Above this alpha the optimally truncated asymptotic series misses
// exponentially small terms that are not negligible at moderate |z|.
constexpr double kAsymptoticMaxAlpha = 0.8;

void check_params(const MittagLefflerParams& p) {
    if (!(p.alpha > 0.0 && p.alpha <= 1.0)) throw DomainError("Mittag-Leffler alpha must lie in (0, 1]");
    if (!(p.beta > 0.0) || !std::isfinite(p.beta)) throw DomainError("Mittag-Leffler beta must be positive");
}

bool is_integer(double x) { return x == std::floor(x); }

// 1/Gamma(alpha n + beta) in long double, per thread, grown on demand. Callers
// use a handful of (alpha, beta) pairs, so the cache stays small.
const std::vector<long double>& series_coefficients(double alpha, double beta, std::size_t n_max) {
    struct Entry {
        double alpha, beta;
        std::vector<long double> c;
    };
    thread_local std::vector<Entry> cache;
    Entry* e = nullptr;
    for (auto& x : cache)
        if (x.alpha == alpha && x.beta == beta) e = &x;
    if (!e) {
        if (cache.size() >= 64) cache.clear();
        cache.push_back({alpha, beta, {}});
        e = &cache.back();
    }
    for (std::size_t n = e->c.size(); n <= n_max; ++n) {
        const long double arg = static_cast<long double>(alpha) * n + beta;
        e->c.push_back(std::exp(-std::lgamma(arg)));
    }
    return e->c;
}

// Power series with long double accumulation; powers of z stay inside the
// long double range for every |z| <= 50 this is used with.
template <class Z>
Z taylor(double alpha, double beta, Z z) {
    using LD = long double;
    using ZL = std::conditional_t<std::is_same_v<Z, double>, LD, std::complex<LD>>;
    if (z == Z(0)) return Z(rgamma(beta));
    const LD r = static_cast<LD>(std::abs(z));
    const LD peak = std::pow(r, 1.0L / alpha);
    // Terms decrease once alpha n + beta passes |z|^(1/alpha); allow generous slack.
    const std::size_t n_est = static_cast<std::size_t>((peak + 12.0L * std::sqrt(peak) + 60.0L) / alpha) + 16;
    const std::vector<long double>& c = series_coefficients(alpha, beta, std::min<std::size_t>(n_est, kMaxTaylorTerms));
    ZL zl;
    if constexpr (std::is_same_v<Z, double>) {
        zl = static_cast<LD>(z);
    } else {
        zl = ZL(z.real(), z.imag());
    }
    ZL sum = 0.0L, pw = 1.0L;
    for (std::size_t n = 0; n < c.size(); ++n) {
        const ZL term = pw * c[n];
        sum += term;
        const LD mag = std::abs(term);
        if (static_cast<LD>(alpha) * n + beta > peak + 2.0L && mag < 1e-21L * std::abs(sum)) break;
        pw *= zl;
    }
    if constexpr (std::is_same_v<Z, double>) {
        return static_cast<double>(sum);
    } else {
        return cplx(static_cast<double>(sum.real()), static_cast<double>(sum.imag()));
    }
}

// -sum_{k>=1} z^-k / Gamma(beta - alpha k), truncated at its smallest term.
// Returns false when the smallest term is not negligible.
template <class Z>
bool asymptotic(double alpha, double beta, Z z, Z& out) {
    Z sum(0.0);
    Z zinv = Z(1.0) / z;
    Z zp = zinv;
    double prev = std::numeric_limits<double>::infinity();
    double smallest = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 400; ++k) {
        // beta - alpha k often lands on a pole up to rounding; snap it so the
        // term vanishes exactly instead of masquerading as a tiny one.
        double x = beta - alpha * k;
        if (std::abs(x - std::round(x)) < 1e-10 * std::max(1.0, std::abs(x))) x = std::round(x);
        const double g = rgamma(x);
        const Z term = -zp * g;
        const double mag = std::abs(term);
        if (g != 0.0) {
            if (mag > prev) break;
            prev = mag;
            smallest = mag;
        }
        sum += term;
        zp *= zinv;
    }
    out = sum;
    return smallest <= 1e-17 * std::abs(sum);
}

// Branch-cut integral (rho-substituted variable), valid for beta < 1 + alpha
// and |arg z| > alpha*pi; the caller adds the pole residue inside that sector.
double cut_integral(double alpha, double beta, double z) {
    thread_local boost::math::quadrature::tanh_sinh<double> ts;
    thread_local boost::math::quadrature::exp_sinh<double> es;
    const double s1 = std::sin(pi * (1.0 - beta));
    const double s2 = std::sin(pi * (1.0 - beta + alpha));
    const double c = std::cos(pi * alpha);
    auto f = [&](double rho) {
        if (rho <= 0.0) return 0.0;
        const double ra = std::pow(rho, alpha);
        const double num = ra * s1 - z * s2;
        const double den = ra * ra - 2.0 * ra * z * c + z * z;
        return std::exp(-rho) * std::pow(rho, alpha - beta) * num / den;
    };
    const double pk = std::pow(std::max(std::abs(z * c), std::abs(z) * 0.1), 1.0 / alpha);
    const double tol = 1e-11;
    const double lo = ts.integrate(f, 0.0, pk, tol);
    const double hi = es.integrate(f, pk, std::numeric_limits<double>::infinity(), tol);
    return (lo + hi) / pi;
}

cplx cut_integral(double alpha, double beta, cplx z) {
    thread_local boost::math::quadrature::tanh_sinh<double> ts;
    thread_local boost::math::quadrature::exp_sinh<double> es;
    const double s1 = std::sin(pi * (1.0 - beta));
    const double s2 = std::sin(pi * (1.0 - beta + alpha));
    const double c = std::cos(pi * alpha);
    auto f = [&](double rho) {
        if (rho <= 0.0) return cplx(0.0);
        const double ra = std::pow(rho, alpha);
        const cplx num = ra * s1 - z * s2;
        const cplx den = ra * ra - 2.0 * ra * z * c + z * z;
        return std::exp(-rho) * std::pow(rho, alpha - beta) * num / den;
    };
    const double pk = std::pow(std::abs(z), 1.0 / alpha);
    const double tol = 1e-11;
    auto re = [&](double r) { return f(r).real(); };
    auto im = [&](double r) { return f(r).imag(); };
    const double inf = std::numeric_limits<double>::infinity();
    const double vr = ts.integrate(re, 0.0, pk, tol) + es.integrate(re, pk, inf, tol);
    const double vi = ts.integrate(im, 0.0, pk, tol) + es.integrate(im, pk, inf, tol);
    cplx v = cplx(vr, vi) / pi;
    if (std::abs(std::arg(z)) < alpha * pi) v += std::pow(z, (1.0 - beta) / alpha) * std::exp(std::pow(z, 1.0 / alpha)) / alpha;
    return v;
}

// alpha == 1, integer beta: E_{1,1} = exp and the downward recurrence
// E_{1,m}(z) = (E_{1,m-1}(z) - 1/Gamma(m-1)) / z, stable for |z| > 1.
template <class Z>
Z closed_form_alpha1(double beta, Z z) {
    using std::exp;
    Z e = exp(z);
    for (int m = 2; m <= static_cast<int>(beta); ++m) e = (e - rgamma(m - 1.0)) / z;
    return e;
}

// Large |z| route for alpha < 1, beta < 1 + alpha.
template <class Z>
Z large_argument(double alpha, double beta, Z z) {
    Z out{};
    const bool allow_asym = alpha <= kAsymptoticMaxAlpha && std::abs(std::arg(z)) >= std::min(pi, alpha * pi + 0.5);
    if (allow_asym && asymptotic(alpha, beta, z, out)) return out;
    return cut_integral(alpha, beta, z);
}

template <class Z>
Z ml_eval(const MittagLefflerParams& p, Z z) {
    check_params(p);
    if (!std::isfinite(std::abs(z))) throw DomainError("Mittag-Leffler argument must be finite");
    const double a = p.alpha, b = p.beta;
    const double r = std::abs(z);
    if (r <= ml_taylor_radius(a)) return taylor(a, b, z);
    if (a == 1.0) {
        if (!is_integer(b)) throw DomainError("E_{1,beta} with non-integer beta needs |z| <= 4");
        return closed_form_alpha1(b, z);
    }
    // Positive real (or near-positive) arguments: the series has no cancellation.
    const double th = std::abs(std::arg(z));
    if (th == 0.0) return taylor(a, b, z);
    if (th < a * pi / 2.0 && std::pow(r, 1.0 / a) * (1.0 - std::cos(th / a)) < 13.0) return taylor(a, b, z);
    // Reduce beta below 1 + alpha:
    // E_{a,b}(z) = z^-k E_{a,b-ka}(z) - sum_{m=1..k} z^-m / Gamma(b - m a).
    int k = 0;
    double b0 = b;
    while (b0 >= 1.0 + a) {
        b0 -= a;
        ++k;
    }
    Z base = large_argument(a, b0, z);
    // Fold back up from b0 to b.
    double bb = b0;
    for (int m = 0; m < k; ++m) {
        bb += a;
        base = (base - rgamma(bb - a)) / z;
    }
    return base;
}

}  // namespace

double ml_taylor_radius(double alpha) { return std::min(4.0, std::pow(10.0, alpha)); }

double rgamma(double x) {
    if (x <= 0.0 && is_integer(x)) return 0.0;
    if (x > 170.0) return std::exp(-std::lgamma(x));
    if (x < -170.0) {
        const double sign = (static_cast<long long>(std::floor(x)) % 2 == 0) ? 1.0 : -1.0;
        return sign * std::exp(-std::lgamma(x));
    }
    return 1.0 / std::tgamma(x);
}

double mittag_leffler(const MittagLefflerParams& p, double z) { return ml_eval(p, z); }
cplx mittag_leffler(const MittagLefflerParams& p, cplx z) {
    if (z.imag() == 0.0) return cplx(ml_eval(p, z.real()), 0.0);
    return ml_eval(p, z);
}

MlRoute mittag_leffler_route(const MittagLefflerParams& p, double z) {
    check_params(p);
    if (std::abs(z) <= ml_taylor_radius(p.alpha) || z > 0.0) return MlRoute::taylor;
    if (p.alpha == 1.0) return MlRoute::closed_form;
    double b0 = p.beta;
    while (b0 >= 1.0 + p.alpha) b0 -= p.alpha;
    double out = 0.0;
    if (p.alpha <= kAsymptoticMaxAlpha && asymptotic(p.alpha, b0, z, out)) return MlRoute::asymptotic;
    return MlRoute::integral;
}

namespace {

void check_ml_family(double alpha, double lambda, double t) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be non-negative");
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("t must be non-negative and finite");
}

}  // namespace

double ml_density(double alpha, double lambda, double t) {
    check_ml_family(alpha, lambda, t);
    if (t == 0.0) throw DomainError("ml_density needs t > 0");
    if (alpha == 1.0) return lambda * std::exp(-lambda * t);
    const double x = lambda * std::pow(t, alpha);
    return lambda * std::pow(t, alpha - 1.0) * mittag_leffler({alpha, alpha}, -x);
}

// F, G and H via E_{a,b}(z) = 1/Gamma(b) + z E_{a,a+b}(z), which removes the
// cancellation at small arguments.
double ml_cdf(double alpha, double lambda, double t) {
    check_ml_family(alpha, lambda, t);
    if (t == 0.0 || lambda == 0.0) return 0.0;
    if (alpha == 1.0) return -std::expm1(-lambda * t);
    const double x = lambda * std::pow(t, alpha);
    if (x <= ml_taylor_radius(alpha)) return x * mittag_leffler({alpha, alpha + 1.0}, -x);
    return 1.0 - mittag_leffler({alpha, 1.0}, -x);
}

double ml_cdf_integral(double alpha, double lambda, double t) {
    check_ml_family(alpha, lambda, t);
    if (t == 0.0 || lambda == 0.0) return 0.0;
    const double x = lambda * std::pow(t, alpha);
    if (x <= ml_taylor_radius(alpha)) return t * x * mittag_leffler({alpha, alpha + 2.0}, -x);
    return t * (1.0 - mittag_leffler({alpha, 2.0}, -x));
}

double ml_cdf_double_integral(double alpha, double lambda, double t) {
    check_ml_family(alpha, lambda, t);
    if (t == 0.0 || lambda == 0.0) return 0.0;
    const double x = lambda * std::pow(t, alpha);
    if (x <= ml_taylor_radius(alpha)) return t * t * x * mittag_leffler({alpha, alpha + 3.0}, -x);
    return t * t * (0.5 - mittag_leffler({alpha, 3.0}, -x));
}

namespace {

// a^q - b^q for a > b >= 0 without cancellation when a ~ b.
double pow_diff(double a, double b, double q) {
    if (b > 0.0 && (a - b) < 0.5 * b) return std::pow(b, q) * std::expm1(q * std::log1p((a - b) / b));
    return std::pow(a, q) - std::pow(b, q);
}

}  // namespace

HatIntegrals power_hat_integrals(double a, double b, double p) {
    const double h = a - b;
    if (!(h > 0.0) || b < 0.0) throw DomainError("power_hat_integrals needs a > b >= 0");
    if (p == 1.0) return {0.5 * h, 0.5 * h};
    if (b > 4.0 * h) {
        // Far from the singularity: the integrand is smooth on [b, a].
        const GaussRule& r = gauss_legendre(8);
        const double c = 0.5 * (a + b), hh = 0.5 * h;
        double nb = 0.0, na = 0.0;
        for (std::size_t i = 0; i < r.x.size(); ++i) {
            const double u = c + hh * r.x[i];
            const double k = r.w[i] * std::pow(u, p - 1.0);
            nb += k * (a - u);
            na += k * (u - b);
        }
        return {nb * hh / h, na * hh / h};
    }
    const double i0 = pow_diff(a, b, p) / p;
    const double iu = pow_diff(a, b, p + 1.0) / (p + 1.0) - b * i0;
    const double na = iu / h;
    return {i0 - na, na};
}

PowerKernelWeights::PowerKernelWeights(const TimeGrid& grid, double p) : grid_(grid), p_(p), uniform_(grid.is_uniform()) {
    if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("kernel exponent must be positive");
    const std::size_t n = grid.size() - 1;
    if (uniform_) {
        scale_ = std::pow(grid.step(), p);
        left_.assign(n + 1, 0.0);
        right_.assign(n + 1, 0.0);
        for (std::size_t m = 1; m <= n; ++m) {
            const HatIntegrals hi = power_hat_integrals(static_cast<double>(m), static_cast<double>(m - 1), p);
            left_[m] = hi.near_a;
            right_[m] = hi.near_b;
        }
    } else {
        left_.assign(n * (n + 1) / 2, 0.0);
        right_.assign(n * (n + 1) / 2, 0.0);
        for (std::size_t k = 1; k <= n; ++k) {
            for (std::size_t j = 0; j < k; ++j) {
                const HatIntegrals hi = power_hat_integrals(grid[k] - grid[j], grid[k] - grid[j + 1], p);
                left_[tri(k, j)] = hi.near_a;
                right_[tri(k, j)] = hi.near_b;
            }
        }
    }
}

double PowerKernelWeights::left(std::size_t n, std::size_t j) const noexcept {
    return uniform_ ? scale_ * left_[n - j] : left_[tri(n, j)];
}

double PowerKernelWeights::right(std::size_t n, std::size_t j) const noexcept {
    return uniform_ ? scale_ * right_[n - j] : right_[tri(n, j)];
}

namespace {

template <class T>
GridFn<T> frac_integral_impl(const GridFn<T>& f, double r) {
    if (f.values.empty()) throw DomainError("fractional integral of an empty grid function");
    if (!(r >= 0.0 && r <= 1.0)) throw DomainError("fractional integral order must lie in [0, 1]");
    if (r == 0.0) return f;
    const PowerKernelWeights w(f.grid, r);
    const double g = rgamma(r);
    std::vector<T> out(f.size());
    const std::span<const T> v(f.values);
    for (std::size_t n = 0; n < f.size(); ++n) out[n] = w.trapezoid(n, v) * g;
    return GridFn<T>(f.grid, std::move(out));
}

}  // namespace

RealGridFn frac_integral(const RealGridFn& f, double r) { return frac_integral_impl(f, r); }
ComplexGridFn frac_integral(const ComplexGridFn& f, double r) { return frac_integral_impl(f, r); }

RealGridFn frac_derivative(const RealGridFn& f, double r) {
    if (f.values.empty()) throw DomainError("fractional derivative of an empty grid function");
    if (!(r >= 0.0 && r < 1.0)) throw DomainError("fractional derivative order must lie in [0, 1)");
    if (r == 0.0) return f;
    const TimeGrid& g = f.grid;
    const double q = 1.0 - r, c = rgamma(q);
    std::vector<double> out(f.size());
    const double f0 = f.values[0];
    out[0] = f0 == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), f0);
    for (std::size_t n = 1; n < f.size(); ++n) {
        // RL derivative of the interpolant = f(0) t^-r / Gamma(1-r) + Caputo part.
        double acc = f0 * std::pow(g[n], -r);
        for (std::size_t j = 0; j < n; ++j) {
            const double slope = (f.values[j + 1] - f.values[j]) / (g[j + 1] - g[j]);
            acc += slope * pow_diff(g[n] - g[j], g[n] - g[j + 1], q) / q;
        }
        out[n] = acc * c;
    }
    return RealGridFn(g, std::move(out));
}

}  // namespace rh
