#include <doctest.h>

#include <cmath>
#include <numbers>

#include "roughhedge/error.hpp"
#include "roughhedge/hedging.hpp"
#include "roughhedge/simulate.hpp"
#include "roughhedge/special_fn.hpp"

using namespace rh;

namespace {

RoughHestonParams desk() { return {}; }

MeanReversionCurve flat_theta(double v) { return {RealGridFn(TimeGrid::uniform(1.0, 1), v)}; }

ForwardVarianceCurve desk_xi() {
    const RoughHestonParams p = desk();
    return forward_variance_from_theta(p, {RealGridFn(TimeGrid({0.0, 0.5, 1.0}), std::vector<double>{0.05, 0.03, 0.04})},
                                       riccati_grid(1.0, 256, p.alpha));
}

ForwardVarianceCurve bumped(const ForwardVarianceCurve& xi, const RealGridFn& zeta, double eps) {
    ForwardVarianceCurve out = xi;
    for (std::size_t i = 0; i < out.xi.size(); ++i) out.xi[i] += eps * zeta.at(out.xi.grid[i]);
    return out;
}

RealGridFn shape(const TimeGrid& g, int kind) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double s = g[i];
        v[i] = kind == 0 ? 1.0 : kind == 1 ? std::exp(-3.0 * s) : std::exp(-50.0 * (s - 0.6) * (s - 0.6));
    }
    return RealGridFn(g, v);
}

double price_at(RoughHestonParams p, const ForwardVarianceCurve& xi, double spot, const QuadratureConfig& q) {
    p.s0 = spot;
    return price_vanilla(p, xi, {1.0, 1.0, OptionKind::call}, q).price;
}

// Richardson-extrapolated central difference.
template <class F>
double richardson(F f, double h) {
    const double d1 = (f(h) - f(-h)) / (2.0 * h), d2 = (f(0.5 * h) - f(-0.5 * h)) / h;
    return (4.0 * d2 - d1) / 3.0;
}

}  // namespace

TEST_CASE("delta against bump and reprice") {
    const RoughHestonParams p = desk();
    const ForwardVarianceCurve xi = desk_xi();
    QuadratureConfig tight;
    tight.tol = 1e-14;
    tight.max_tail = 1e-9;
    for (double s : {0.85, 1.0, 1.15}) {
        const HedgeRatios r = hedge_ratios(p, xi, {1.0, 1.0, OptionKind::call}, {}, s);
        const double fd = richardson([&](double h) { return price_at(p, xi, s + h, tight); }, 1e-3);
        INFO("spot " << s);
        CHECK(std::abs(r.delta - fd) < 1e-6 * std::abs(fd));
        CHECK(r.delta > 0.0);
        CHECK(r.delta < 1.0);
        CHECK(r.price == doctest::Approx(price_at(p, xi, s, {})).epsilon(1e-9));
        CHECK(delta(p, xi, {1.0, 1.0, OptionKind::put}, {}, s) == doctest::Approx(r.delta - 1.0).epsilon(1e-12));
    }
}

TEST_CASE("forward-variance gradient against bump and reprice") {
    const RoughHestonParams p = desk();
    const ForwardVarianceCurve xi = desk_xi();
    const double s = 1.05;
    const VanillaSpec spec{1.0, 1.0, OptionKind::call};
    const HedgeRatios r = hedge_ratios(p, xi, spec, {}, s);
    CHECK(r.fv_kernel.grid[0] == 0.0);
    CHECK(r.fv_kernel.grid.horizon() == 1.0);
    QuadratureConfig qs;
    qs.tol = 1e-13;
    const double spots[] = {s}, strikes[] = {1.0};
    const FourierGrid g = fourier_grid(p, xi, 1.0, qs, spots, strikes);
    QuadratureConfig tight;
    tight.tol = 1e-14;
    tight.max_tail = 1e-9;
    for (int kind : {0, 1, 2}) {
        const RealGridFn zeta = shape(xi.xi.grid, kind);
        const double an = fv_directional(r.fv_kernel, zeta, 1.0);
        // Same frequency nodes: differentiates the discretized price exactly.
        const double fixed = richardson(
            [&](double e) { return fourier_value(fourier_rebase(g, bumped(xi, zeta, e)), s, 1.0).call; }, 1e-4);
        const double full = richardson([&](double e) { return price_at(p, bumped(xi, zeta, e), s, tight); }, 1e-4);
        INFO("shape " << kind << " analytic " << an << " fixed " << fixed << " full " << full);
        CHECK(std::abs(an - fixed) < 1e-7 * std::abs(fixed));
        CHECK(std::abs(an - full) < 1e-5 * std::abs(full));
        CHECK(an > 0.0);
    }
    // Linear in the direction.
    const RealGridFn z1 = shape(xi.xi.grid, 1), z2 = shape(xi.xi.grid, 2);
    std::vector<double> mix(z1.size());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.0 * z1[i] - 0.5 * z2[i];
    CHECK(fv_directional(r.fv_kernel, RealGridFn(z1.grid, mix), 1.0) ==
          doctest::Approx(2.0 * fv_directional(r.fv_kernel, z1, 1.0) - 0.5 * fv_directional(r.fv_kernel, z2, 1.0))
              .epsilon(1e-12));
    // Put kernel equals the call kernel.
    const RealGridFn kp = fv_gradient(p, xi, {1.0, 1.0, OptionKind::put}, {}, s);
    CHECK(fv_directional(kp, z1, 1.0) == doctest::Approx(fv_directional(r.fv_kernel, z1, 1.0)).epsilon(1e-12));
}

TEST_CASE("zero forward variance") {
    const RoughHestonParams p = desk();
    const ForwardVarianceCurve zero{RealGridFn(TimeGrid::uniform(1.0, 1), 0.0)};
    const HedgeRatios itm = hedge_ratios(p, zero, {1.0, 1.0, OptionKind::call}, {}, 1.2);
    CHECK(itm.delta == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(itm.price == doctest::Approx(0.2).epsilon(1e-12));
    const HedgeRatios otm = hedge_ratios(p, zero, {1.0, 1.0, OptionKind::call}, {}, 0.8);
    CHECK(std::abs(otm.delta) < 1e-12);
    for (double v : otm.fv_kernel.values) CHECK(v == 0.0);
    CHECK_THROWS_AS(hedge_ratios(p, zero, {1.0, 1.0, OptionKind::call}, {}, 1.0), DomainError);
}

TEST_CASE("hedge ratio domain errors") {
    RoughHestonParams p = desk();
    const ForwardVarianceCurve xi = desk_xi();
    CHECK_THROWS_AS(hedge_ratios(p, xi, {1.0, 1.0, OptionKind::call}, {}, -1.0), DomainError);
    p.rho = 0.3;
    CHECK_THROWS_AS(hedge_ratios(p, xi, {1.0, 1.0, OptionKind::call}, {}, 1.0), DomainError);
}

TEST_CASE("curve innovation") {
    const RoughHestonParams p = desk();
    const TimeGrid g = TimeGrid::uniform(1.0, 10);
    for (double v : curve_innovation(p, 0.04, 0.0, g).values) CHECK(v == 0.0);
    const RealGridFn c = curve_innovation(p, 0.04, 0.1, g);
    const double scale = 0.3 * 0.2 * 0.1 / 2.0;
    CHECK(c[0] == c[1]);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(c[i] == doctest::Approx(scale * ml_density(0.6, 2.0, g[i])).epsilon(1e-14));
    CHECK_THROWS_AS(curve_innovation(p, -0.1, 0.1, g), DomainError);
}

TEST_CASE("scheme curve roll matches the conditional model") {
    const RoughHestonParams p = desk();
    const MeanReversionCurve th = flat_theta(0.04);
    const TimeGrid g = TimeGrid::uniform(1.0, 256);
    const PathSet ps = simulate_rough_heston(p, th, g, 3, 5);
    const ForwardVarianceCurve xi0 = forward_variance_from_theta(p, th, g);
    const std::size_t k = 128;
    std::vector<double> t(k + 1), v(k + 1);
    for (std::size_t j = 0; j <= k; ++j) {
        t[j] = g[j];
        v[j] = ps.v(0, j);
    }
    const auto m = scheme_conditional_mean(p, xi0, ps, 0, k);
    const TimeGrid rest = TimeGrid::uniform(0.5, 128);
    const ForwardVarianceCurve c = conditional_forward_variance(p, th, RealGridFn(TimeGrid(t), v), 0.5, rest);
    // Far from t0 both forget the last few increments; nodewise agreement to
    // the scheme's discretization level.
    for (std::size_t i = 16; i <= 128; i += 16) {
        INFO("lag " << rest[i]);
        CHECK(std::abs(m[i] - c.xi[i]) < 0.05 * c.xi[i]);
    }
}

TEST_CASE("replication basics") {
    RoughHestonParams p = desk();
    const MeanReversionCurve th = flat_theta(0.04);
    QuadratureConfig q;
    q.b_max = 400.0;
    const VanillaSpec spec{1.0, 1.0, OptionKind::call};
    const HedgeReport a = replicate(p, th, spec, q, 8, 6, 42);
    const HedgeReport b = replicate(p, th, spec, q, 8, 6, 42);
    CHECK(a.pnl == b.pnl);
    CHECK(a.spot.size() == 9);
    CHECK(a.delta.size() == 9);
    CHECK(a.times.size() == 9);
    CHECK(a.n_completed == 6);
    CHECK(!a.partial);
    const ForwardVarianceCurve xi = forward_variance_from_theta(p, th, TimeGrid::uniform(1.0, 8));
    CHECK(a.initial_price == doctest::Approx(price_vanilla(p, xi, spec).price).epsilon(1e-5));
    CHECK(a.portfolio_value.front() == a.initial_price);
    for (std::size_t k = 0; k + 1 < a.delta.size(); ++k) {
        CHECK(a.delta[k] > 0.0);
        CHECK(a.delta[k] < 1.0);
    }
    // Zero strike: one unit of stock replicates exactly.
    const HedgeReport z = replicate(p, th, {0.0, 1.0, OptionKind::call}, q, 8, 4, 1);
    for (double x : z.pnl) CHECK(std::abs(x) < 1e-14);
    CHECK_THROWS_AS(replicate(p, th, spec, q, 0, 4, 1), DomainError);
}

TEST_CASE("replication without vol of vol is Black-Scholes delta hedging") {
    RoughHestonParams p = desk();
    p.nu = 1e-6;
    const MeanReversionCurve th = flat_theta(0.04);
    QuadratureConfig q;
    q.b_max = 300.0;
    const HedgeReport r = replicate(p, th, {1.0, 1.0, OptionKind::call}, q, 16, 400, 3);
    CHECK(r.n_completed == 400);
    CHECK(std::abs(r.pnl_terminal) < 3.0 * r.pnl_stderr);
    // Discrete delta-hedging error of an at-the-money call: sqrt(pi / 4n) sigma vega.
    const double pi = std::numbers::pi, vega = std::exp(-0.005) / std::sqrt(2.0 * pi);
    const double theory = std::sqrt(pi / 64.0) * 0.2 * vega;
    CHECK(r.pnl_std_across_paths == doctest::Approx(theory).epsilon(0.2));
}
