#include <doctest.h>

#include <cmath>
#include <random>

#include "roughhedge/error.hpp"
#include "roughhedge/riccati.hpp"

using namespace rh;

namespace {

constexpr double kAlpha = 0.6, kLambda = 2.0, kNu = 0.3, kRho = -0.7;

RiccatiCoeffs price_coeffs(cplx z, double alpha = kAlpha) {
    return {0.5 * (z * z - z), z * kRho * kNu - kLambda, 0.5 * kNu * kNu, alpha};
}

RiccatiCoeffs moment_coeffs(double a) { return {a, -kLambda, 0.5 * kNu * kNu, kAlpha}; }

double max_diff(const ComplexGridFn& a, const ComplexGridFn& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Classical Heston Riccati h' = c + b h + a h^2, h(0) = 0, in closed form.
cplx heston_h(cplx z, double t) {
    const cplx a = 0.5 * kNu * kNu, b = z * kRho * kNu - kLambda, c = 0.5 * (z * z - z);
    cplx d = std::sqrt(b * b - 4.0 * a * c);
    if (d.real() < 0.0) d = -d;
    const cplx m1 = 0.5 * (b + d), m2 = 0.5 * (b - d);
    const cplx e = std::exp(-d * t);
    return -c * (1.0 - e) / (m2 - m1 * e);
}

}  // namespace

TEST_CASE("zero coefficients give the zero solution") {
    const TimeGrid g = riccati_grid(1.0, 64, kAlpha);
    const RiccatiSolution a = solve_riccati_adams({0.0, 0.0, 0.0, kAlpha}, g);
    const RiccatiSolution v = solve_riccati_volterra({0.0, -kLambda, 0.0, kAlpha}, kLambda, g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(a.h[i] == cplx(0.0));
        CHECK(v.h[i] == cplx(0.0));
    }
    CHECK_FALSE(a.blew_up);
    CHECK(a.valid == g.size());
}

TEST_CASE("linear equation is solved by (c0/lambda) F") {
    const cplx c0(-0.8, 0.3);
    const TimeGrid g = riccati_grid(2.0, 512, kAlpha);
    const RiccatiCoeffs c{c0, -kLambda, 0.0, kAlpha};
    const RiccatiSolution a = solve_riccati_adams(c, g);
    const RiccatiSolution v = solve_riccati_volterra(c, kLambda, g);
    double ea = 0.0, ev = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const cplx want = c0 / kLambda * ml_cdf(kAlpha, kLambda, g[i]);
        ea = std::max(ea, std::abs(a.h[i] - want));
        ev = std::max(ev, std::abs(v.h[i] - want));
    }
    CHECK(ea <= 2e-6);
    // The Volterra form integrates a constant exactly.
    CHECK(ev <= 1e-12);
}

TEST_CASE("alpha = 1 reproduces the classical Heston Riccati") {
    const TimeGrid g = riccati_grid(1.0, 512, 1.0);
    for (cplx z : {cplx(0.5, 2.0), cplx(1.5, -7.0), cplx(-0.3, 0.0)}) {
        const RiccatiSolution a = solve_riccati_adams(price_coeffs(z, 1.0), g);
        const RiccatiSolution v = solve_riccati_volterra(price_coeffs(z, 1.0), kLambda, g);
        double ea = 0.0, ev = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            ea = std::max(ea, std::abs(a.h[i] - heston_h(z, g[i])));
            ev = std::max(ev, std::abs(v.h[i] - heston_h(z, g[i])));
        }
        INFO("z=" << z);
        CHECK(ea <= 1e-5 * std::max(1.0, std::abs(heston_h(z, 1.0))));
        CHECK(ev <= 1e-5 * std::max(1.0, std::abs(heston_h(z, 1.0))));
    }
}

TEST_CASE("Adams and Volterra solvers agree on 512 nodes") {
    const TimeGrid g = riccati_grid(1.0, 512, kAlpha);
    const AdamsSolver adams(g, kAlpha);
    const VolterraSolver volterra(g, kAlpha, kLambda);
    for (double a : {-2.0, -1.0, 0.0, 0.5}) {
        INFO("a=" << a);
        CHECK(max_diff(adams.solve(moment_coeffs(a)).h, volterra.solve(moment_coeffs(a)).h) < 1e-6);
    }
    for (cplx z : {cplx(0.5, 1.0), cplx(-0.5, 0.0), cplx(1.2, 0.0)}) {
        INFO("z=" << z);
        CHECK(max_diff(adams.solve(price_coeffs(z)).h, volterra.solve(price_coeffs(z)).h) < 1e-6);
    }
}

TEST_CASE("random coefficient draws: solvers agree within scheme tolerance") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const TimeGrid g = riccati_grid(1.0, 256, kAlpha);
    const AdamsSolver adams(g, kAlpha);
    const VolterraSolver volterra(g, kAlpha, kLambda);
    for (int k = 0; k < 12; ++k) {
        const RiccatiCoeffs c{cplx(-3.0 * u(rng), 6.0 * u(rng) - 3.0), cplx(-kLambda + 0.5 * u(rng), 2.0 * u(rng) - 1.0),
                              cplx(0.5 * u(rng), 0.2 * u(rng) - 0.1), kAlpha};
        const RiccatiSolution a = adams.solve(c), v = volterra.solve(c);
        REQUIRE_FALSE(a.blew_up);
        double scale = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) scale = std::max(scale, std::abs(v.h[i]));
        INFO("draw " << k << " c0=" << c.c0 << " c1=" << c.c1 << " c2=" << c.c2);
        CHECK(max_diff(a.h, v.h) <= 5e-5 * std::max(1.0, scale));
    }
}

TEST_CASE("exponential-moment family is monotone in a and in time") {
    const TimeGrid g = riccati_grid(1.0, 256, kAlpha);
    const AdamsSolver adams(g, kAlpha);
    const double as[] = {-2.0, -1.0, 0.0, 0.5};
    std::vector<ComplexGridFn> sols;
    for (double a : as) sols.push_back(adams.solve(moment_coeffs(a)).h);
    for (std::size_t k = 0; k + 1 < sols.size(); ++k)
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(sols[k][i].real() <= sols[k + 1][i].real());
    for (std::size_t k = 0; k < sols.size(); ++k) {
        for (std::size_t i = 0; i + 1 < g.size(); ++i) {
            const double d = sols[k][i + 1].real() - sols[k][i].real();
            if (as[k] < 0.0) CHECK(d <= 0.0);
            if (as[k] > 0.0) CHECK(d >= 0.0);
            if (as[k] == 0.0) CHECK(d == 0.0);
        }
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(sols[k][i].imag() == 0.0);
    }
}

TEST_CASE("conjugate coefficients give conjugate solutions") {
    const TimeGrid g = riccati_grid(1.0, 128, kAlpha);
    const cplx z(0.7, 4.0);
    const RiccatiSolution a = solve_riccati_adams(price_coeffs(z), g);
    const RiccatiSolution b = solve_riccati_adams(price_coeffs(std::conj(z)), g);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(a.h[i] - std::conj(b.h[i])) <= 1e-14 * (1.0 + std::abs(a.h[i])));
}

TEST_CASE("convergence order under grid doubling") {
    const double target = std::pow(2.0, std::min(2.0, 1.0 + kAlpha) - 0.2);
    for (const RiccatiCoeffs& c : {price_coeffs(cplx(0.5, 2.0)), moment_coeffs(-1.0)}) {
        const RiccatiSolution ref = solve_riccati_adams(c, riccati_grid(1.0, 4096, kAlpha));
        double prev = 0.0;
        for (std::size_t n : {128u, 256u, 512u}) {
            const RiccatiSolution s = solve_riccati_adams(c, riccati_grid(1.0, n, kAlpha));
            const std::size_t stride = 4096 / n;
            double err = 0.0;
            for (std::size_t i = 0; i < s.h.size(); ++i) err = std::max(err, std::abs(s.h[i] - ref.h[i * stride]));
            if (prev > 0.0) CHECK(prev / err >= target);
            prev = err;
        }
    }
}

TEST_CASE("blow-up is flagged, not thrown") {
    // a - lambda g + (nu^2/2) g^2 has no real root once a > lambda^2 / (2 nu^2).
    const TimeGrid g = riccati_grid(5.0, 256, kAlpha);
    const RiccatiSolution s = solve_riccati_adams(moment_coeffs(100.0), g);
    CHECK(s.blew_up);
    REQUIRE(s.blowup_time.has_value());
    CHECK(*s.blowup_time > 0.0);
    CHECK(*s.blowup_time < 5.0);
    CHECK(s.valid < g.size());
    CHECK(std::isnan(s.h.values.back().real()));
    const RiccatiSolution v = solve_riccati_volterra(moment_coeffs(100.0), kLambda, g);
    CHECK(v.blew_up);
    // Complex coefficients are capped by magnitude.
    RiccatiOptions opt;
    opt.blowup_cap = 10.0;
    CHECK(solve_riccati_adams({cplx(100.0, 1.0), -kLambda, 0.045, kAlpha}, g, opt).blew_up);
    const RiccatiSolution pece = solve_riccati_adams(moment_coeffs(100.0), g, {1e8, RiccatiCorrector::pece});
    CHECK(pece.blew_up);
}

TEST_CASE("predictor-corrector variant") {
    const TimeGrid g = riccati_grid(1.0, 512, kAlpha);
    const RiccatiCoeffs c = price_coeffs(cplx(0.5, 1.0));
    const RiccatiSolution a = solve_riccati_adams(c, g);
    const RiccatiSolution p = solve_riccati_adams(c, g, {1e8, RiccatiCorrector::pece});
    CHECK(max_diff(a.h, p.h) <= 1e-5);
}

TEST_CASE("bad input") {
    const TimeGrid g = riccati_grid(1.0, 16, kAlpha);
    CHECK_THROWS_AS(solve_riccati_adams({std::nan(""), 0.0, 0.0, kAlpha}, g), NumericalError);
    CHECK_THROWS_AS(solve_riccati_adams({0.0, 0.0, 0.0, 0.4}, g), DomainError);
    CHECK_THROWS_AS(solve_riccati_volterra({0.0, 0.0, 0.0, kAlpha}, -1.0, g), DomainError);
}

TEST_CASE("upper bound on the negative exponential moment solution") {
    const TimeGrid g = riccati_grid(3.0, 512, kAlpha);
    for (double a : {0.5, 1.0, 2.0, 5.0}) {
        const RiccatiSolution s = solve_riccati_volterra(moment_coeffs(-a), kLambda, g);
        for (std::size_t i = 1; i < g.size(); ++i) {
            const double F = ml_cdf(kAlpha, kLambda, g[i]);
            const double bound =
                (1.0 - std::sqrt(1.0 + 2.0 * kNu * kNu * a * F * F / (kLambda * kLambda))) / (kNu * kNu / kLambda * F);
            CHECK(s.h[i].real() <= bound + 1e-9);
        }
    }
}

TEST_CASE("chi recovers h through the resolvent kernel") {
    const TimeGrid g = riccati_grid(1.0, 512, kAlpha);
    CHECK(max_diff(chi_from_h(solve_riccati_adams(price_coeffs(0.0), g), 0.0, kRho, kNu), ComplexGridFn(g, cplx(0.0))) == 0.0);
    CHECK(max_diff(chi_from_h(solve_riccati_adams(price_coeffs(1.0), g), 1.0, kRho, kNu), ComplexGridFn(g, cplx(0.0))) == 0.0);
    for (cplx z : {cplx(0.5, 1.5), cplx(1.4, -3.0)}) {
        const RiccatiSolution s = solve_riccati_adams(price_coeffs(z), g);
        const ComplexGridFn back = ml_kernel_convolve(chi_from_h(s, z, kRho, kNu), kAlpha, kLambda);
        INFO("z=" << z);
        CHECK(max_diff(back, s.h) <= 1e-5);
    }
}
