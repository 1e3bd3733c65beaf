#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "roughhedge/error.hpp"
#include "roughhedge/model.hpp"
#include "roughhedge/pricing.hpp"

using namespace rh;

namespace {

RoughHestonParams desk() { return {}; }

ForwardVarianceCurve flat_xi(double v) { return {RealGridFn(TimeGrid::uniform(1.0, 1), v)}; }

// Classical Heston E[exp(i u log(S_T/S0))], flat long-run variance theta.
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

// Gil-Pelaez two-probability form with adaptive Gauss-Kronrod.
double heston_call(const RoughHestonParams& p, double theta, double s, double k, double t) {
    using boost::math::quadrature::gauss_kronrod;
    const cplx i(0.0, 1.0);
    const double x = std::log(s / k);
    auto p2 = [&](double u) { return (std::exp(i * u * x) * heston_cf(p, theta, u, t) / (i * u)).real(); };
    auto p1 = [&](double u) {
        return (std::exp(i * u * x) * heston_cf(p, theta, cplx(u, -1.0), t) / (i * u)).real();
    };
    const double P1 = 0.5 + gauss_kronrod<double, 61>::integrate(p1, 0.0, INFINITY, 15, 1e-13) / std::numbers::pi;
    const double P2 = 0.5 + gauss_kronrod<double, 61>::integrate(p2, 0.0, INFINITY, 15, 1e-13) / std::numbers::pi;
    return s * P1 - k * P2;
}

ForwardVarianceCurve desk_xi() {
    const RoughHestonParams p = desk();
    return forward_variance_from_theta(p, {RealGridFn(TimeGrid::uniform(2.0, 1), 0.04)},
                                       riccati_grid(2.0, 512, p.alpha));
}

}  // namespace

TEST_CASE("payoff transform") {
    CHECK(std::abs(payoff_transform(2.0, 1.0, 0.0) - 0.5) < 1e-15);
    for (double b : {0.3, 2.0, 17.0}) {
        const cplx g = payoff_transform(1.5, 1.3, b);
        CHECK(std::abs(payoff_transform(1.5, 1.3, -b) - std::conj(g)) < 1e-15);
    }
    const double b = 1e6;
    CHECK(std::abs(payoff_transform(1.5, 1.3, b)) * b * b == doctest::Approx(std::pow(1.3, -0.5)).epsilon(1e-9));
}

TEST_CASE("default damping") {
    const RoughHestonParams p = desk();
    CHECK(default_damping(p, 1.0) == 1.5);
    RoughHestonParams q = p;
    q.rho = 0.99;
    q.nu = 1.5;
    q.lambda = 1.6;
    const double a = default_damping(q, 1.0);
    CHECK(a > 1.0);
    CHECK(q.lambda - q.rho * q.nu * a > 0.0);
}

TEST_CASE("zero forward variance gives intrinsic value") {
    const RoughHestonParams p = desk();
    const ForwardVarianceCurve zero = flat_xi(0.0);
    for (double k : {0.5, 1.0, 1.7}) {
        const PriceResult r = price_vanilla(p, zero, {k, 1.0, OptionKind::call});
        CHECK(r.price == doctest::Approx(std::max(1.0 - k, 0.0)).epsilon(1e-14));
        CHECK(r.tail_bound == 0.0);
        CHECK(price_vanilla(p, zero, {k, 1.0, OptionKind::put}).price ==
              doctest::Approx(std::max(k - 1.0, 0.0)).epsilon(1e-12));
    }
}

TEST_CASE("deep in the money") {
    RoughHestonParams p = desk();
    p.s0 = 100.0;
    const PriceResult r = price_vanilla(p, desk_xi(), {1.0, 1.0, OptionKind::call});
    CHECK(std::abs(r.price - 99.0) < 1e-6 * p.s0);
}

TEST_CASE("classical Heston limit") {
    RoughHestonParams p = desk();
    p.alpha = 1.0;
    for (double k : {0.8, 0.9, 1.0, 1.1, 1.2}) {
        const double ref = heston_call(p, 0.04, 1.0, k, 1.0);
        const PriceResult r = price_vanilla(p, flat_xi(0.04), {k, 1.0, OptionKind::call});
        INFO("K = " << k << " ref " << ref << " got " << r.price);
        CHECK(std::abs(r.price - ref) / ref < 1e-3);
        CHECK(r.damping_used == 1.5);
        CHECK(r.tail_bound < 1e-9);
    }
}

TEST_CASE("put-call parity and shape") {
    const RoughHestonParams p = desk();
    const ForwardVarianceCurve xi = desk_xi();
    const std::vector<double> ks{0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3};
    const std::vector<double> ts{0.25, 0.5, 1.0, 2.0};
    const auto calls = price_surface(p, xi, ks, ts);
    const auto puts = price_surface(p, xi, ks, ts, {}, OptionKind::put);
    for (std::size_t i = 0; i < ts.size(); ++i)
        for (std::size_t j = 0; j < ks.size(); ++j) {
            REQUIRE(calls[i][j].ok);
            REQUIRE(puts[i][j].ok);
            CHECK(std::abs(calls[i][j].result.price - puts[i][j].result.price - (1.0 - ks[j])) < 1e-12);
            CHECK(calls[i][j].result.price >= std::max(1.0 - ks[j], 0.0));
            if (j > 0) CHECK(calls[i][j].result.price < calls[i][j - 1].result.price);
            if (j > 1) {
                const double c0 = calls[i][j - 2].result.price, c1 = calls[i][j - 1].result.price,
                             c2 = calls[i][j].result.price;
                CHECK(c0 - 2.0 * c1 + c2 > 0.0);
            }
        }
    // Increasing in maturity for a flat curve.
    const ForwardVarianceCurve flat = flat_xi(0.04);
    const auto fs = price_surface(p, flat, ks, ts);
    for (std::size_t i = 1; i < ts.size(); ++i)
        for (std::size_t j = 0; j < ks.size(); ++j) CHECK(fs[i][j].result.price > fs[i - 1][j].result.price);
}

TEST_CASE("single surface cell equals price_vanilla") {
    const RoughHestonParams p = desk();
    const ForwardVarianceCurve xi = desk_xi();
    const double k = 0.95, t = 0.7;
    const auto s = price_surface(p, xi, {&k, 1}, {&t, 1});
    REQUIRE(s[0][0].ok);
    const PriceResult r = price_vanilla(p, xi, {k, t, OptionKind::call});
    CHECK(s[0][0].result.price == r.price);
    CHECK(s[0][0].result.damping_used == r.damping_used);
}

TEST_CASE("quadrature self-consistency") {
    const RoughHestonParams p = desk();
    const ForwardVarianceCurve xi = desk_xi();
    for (double k : {0.8, 1.0, 1.25}) {
        const VanillaSpec spec{k, 1.0, OptionKind::call};
        const PriceResult base = price_vanilla(p, xi, spec);
        const FourierGrid g = fourier_grid(p, xi, 1.0, {}, std::vector<double>{1.0}, std::vector<double>{k});
        QuadratureConfig q;
        q.n_nodes = 32;
        q.b_max = 2.0 * g.b.back();
        const PriceResult fine = price_vanilla(p, xi, spec, q);
        CHECK(std::abs(fine.price - base.price) <= std::max(base.tail_bound, 1e-12));
        QuadratureConfig qa;
        qa.rule = QuadRule::adaptive;
        CHECK(std::abs(price_vanilla(p, xi, spec, qa).price - base.price) < 1e-9);
    }
}

TEST_CASE("pricing domain and accuracy errors") {
    const RoughHestonParams p = desk();
    const ForwardVarianceCurve xi = desk_xi();
    QuadratureConfig q;
    q.damping = 0.9;
    CHECK_THROWS_AS(price_vanilla(p, xi, {1.0, 1.0, OptionKind::call}, q), DomainError);
    q.damping = 30.0;
    CHECK_THROWS_AS(price_vanilla(p, xi, {1.0, 1.0, OptionKind::call}, q), DomainError);
    CHECK_THROWS_AS(price_vanilla(p, xi, {-1.0, 1.0, OptionKind::call}), DomainError);
    // Truncating far too early leaves a large tail.
    QuadratureConfig small;
    small.b_max = 2.0;
    CHECK_THROWS_AS(price_vanilla(p, xi, {1.0, 1.0, OptionKind::call}, small), AccuracyError);
    // Per-cell errors do not abort the surface.
    const std::vector<double> ks{1.0, -1.0};
    const double t = 1.0;
    const auto s = price_surface(p, xi, ks, {&t, 1});
    CHECK(s[0][0].ok);
    CHECK(!s[0][1].ok);
    CHECK(s[0][1].error_kind == ErrorKind::domain);
}
