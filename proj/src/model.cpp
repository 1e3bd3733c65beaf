#include "roughhedge/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "json.hpp"
#include "roughhedge/error.hpp"
#include "roughhedge/riccati.hpp"
#include "roughhedge/special_fn.hpp"

namespace rh {

namespace {

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

std::string node_list(const std::vector<std::size_t>& nodes) {
    std::string s;
    for (std::size_t i = 0; i < nodes.size() && i < 8; ++i) s += (i ? "," : "") + std::to_string(nodes[i]);
    if (nodes.size() > 8) s += ",...";
    return s;
}

// Forward variance for a start value v0 (possibly 0, as after conditioning).
ForwardVarianceCurve forward_variance_impl(double alpha, double lambda, double v0, const MeanReversionCurve& theta,
                                           const TimeGrid& grid) {
    const std::size_t n = grid.size();
    std::vector<double> th(n), xi(n);
    for (std::size_t i = 0; i < n; ++i) th[i] = theta.at(grid[i]);
    xi[0] = v0;
    if (n > 1) {
        const auto k = volterra_solver(grid, alpha, lambda);
        for (std::size_t m = 1; m < n; ++m) {
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) acc += k->left(m, j) * th[j] + k->right(m, j) * th[j + 1];
            xi[m] = v0 * (1.0 - ml_cdf(alpha, lambda, grid[m])) + lambda * acc;
            if (std::isnan(xi[m])) throw NumericalError("forward variance convolution produced NaN");
        }
    }
    return {RealGridFn(grid, std::move(xi))};
}

// Index of t0 among the nodes of g (relative tolerance 1e-12).
std::size_t node_index(const TimeGrid& g, double t0) {
    const std::size_t i = g.locate(t0);
    for (std::size_t k : {i, i + 1})
        if (k < g.size() && std::abs(g[k] - t0) <= 1e-12 * std::max(1.0, t0)) return k;
    throw DomainError("v_path must have a node at t0");
}

// int_0^t0 (t0 + u - v)^(-1-alpha) (V_v - V_t0) dv for piecewise-linear V,
// integrated exactly cell by cell in w = t0 + u - v.
double conditional_kernel_integral(double alpha, const RealGridFn& v, std::size_t m, double u) {
    const TimeGrid& g = v.grid;
    const double t0 = g[m], vt = v[m];
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double hi = t0 + u - g[j], lo = t0 + u - g[j + 1];
        const double d_hi = v[j] - vt, d_lo = j + 1 == m ? 0.0 : v[j + 1] - vt;
        if (lo <= 0.0) {
            // Last cell at u = 0: the increment vanishes linearly at w = 0.
            acc += d_hi * std::pow(hi, -alpha) / (1.0 - alpha);
            continue;
        }
        const HatIntegrals w = power_hat_integrals(hi, lo, -alpha);
        acc += d_lo * w.near_b + d_hi * w.near_a;
    }
    return acc;
}

double conditional_theta_impl(const RoughHestonParams& p, const MeanReversionCurve& theta0, const RealGridFn& v,
                              std::size_t m, double u) {
    const double t0 = v.grid[m];
    double out = theta0.at(t0 + u);
    if (p.alpha < 1.0 && m > 0) {
        const double c = rgamma(1.0 - p.alpha) / p.lambda;
        out += c * p.alpha * conditional_kernel_integral(p.alpha, v, m, u);
        out += c * std::pow(u + t0, -p.alpha) * (p.v0 - v[m]);
    }
    return out;
}

// xi - V0 starts like a t^alpha + b t; a piecewise-linear interpolant misses
// the t^alpha part by O(1) relative on every graded cell near 0. Fit a from
// nodes 1 and 2, differentiate a t^alpha analytically and the rest on the grid.
double start_coefficient(double alpha, const TimeGrid& g, const std::vector<double>& d) {
    const double t1 = g[1], t2 = g[2];
    const double p1 = std::pow(t1, alpha), p2 = std::pow(t2, alpha);
    const double a = (d[1] * t2 - d[2] * t1) / (p1 * t2 - p2 * t1);
    return std::isfinite(a) ? a : 0.0;
}

}  // namespace

void validate_params(const RoughHestonParams& p) {
    if (!(p.alpha > 0.5 && p.alpha <= 1.0)) throw DomainError("alpha must lie in (1/2, 1]");
    if (!finite_positive(p.lambda)) throw DomainError("lambda must be positive");
    if (!finite_positive(p.nu)) throw DomainError("nu must be positive");
    if (!(p.rho >= -1.0 && p.rho <= 1.0)) throw DomainError("rho must lie in [-1, 1]");
    if (!finite_positive(p.v0)) throw DomainError("v0 must be positive");
    if (!finite_positive(p.s0)) throw DomainError("s0 must be positive");
}

void validate_hedging_params(const RoughHestonParams& p) {
    validate_params(p);
    if (!(p.rho <= 0.0 && p.rho > -1.0)) throw DomainError("hedging requires -1 < rho <= 0");
}

void validate_theta(const RoughHestonParams& p, const MeanReversionCurve& theta, const CurveBounds& b, double tol) {
    const double eps = b.eps < 0.0 ? 0.5 * (p.alpha - 0.5) : b.eps;
    const double c1 = p.v0 * rgamma(1.0 - p.alpha) / p.lambda;
    std::vector<std::size_t> bad;
    const RealGridFn& f = theta.theta;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double u = f.grid[i], v = f[i];
        bool ok = std::isfinite(v);
        if (ok && u > 0.0) {
            ok = v >= -c1 * std::pow(u, -p.alpha) - tol;
            if (ok && u <= 1.0) ok = v <= b.k_eps * std::pow(u, -0.5 - eps) + tol;
        }
        if (!ok) bad.push_back(i);
    }
    if (!bad.empty()) {
        const std::string msg = "mean-reversion curve violates its admissibility bounds at nodes " + node_list(bad);
        throw ValidationError(msg, std::move(bad));
    }
}

void validate_xi(const RoughHestonParams& p, const ForwardVarianceCurve& xi) {
    std::vector<std::size_t> bad;
    const RealGridFn& f = xi.xi;
    if (f.values.empty()) throw ValidationError("forward variance curve is empty", {});
    if (!(std::abs(f[0] - p.v0) <= 1e-9 * std::max(1.0, p.v0))) bad.push_back(0);
    for (std::size_t i = 1; i < f.size(); ++i)
        if (!(std::isfinite(f[i]) && f[i] >= 0.0)) bad.push_back(i);
    if (!bad.empty()) {
        const std::string msg =
            "forward variance curve must start at v0 and stay nonnegative; bad nodes " + node_list(bad);
        throw ValidationError(msg, std::move(bad));
    }
}

ForwardVarianceCurve forward_variance_from_theta(const RoughHestonParams& p, const MeanReversionCurve& theta,
                                                 const TimeGrid& grid) {
    validate_params(p);
    return forward_variance_impl(p.alpha, p.lambda, p.v0, theta, grid);
}

MeanReversionCurve theta_from_forward_variance(const RoughHestonParams& p, const ForwardVarianceCurve& xi,
                                               const CurveBounds& b) {
    validate_params(p);
    validate_xi(p, xi);
    const TimeGrid& g = xi.xi.grid;
    const std::size_t n = g.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = xi.xi[i] - p.v0;
    d[0] = 0.0;
    std::vector<double> dal(n, 0.0);
    double start = 0.0;  // limit of D^alpha(xi - V0) at 0
    if (p.alpha < 1.0) {
        const double a = n > 2 ? start_coefficient(p.alpha, g, d) : 0.0;
        std::vector<double> rest(n);
        for (std::size_t i = 0; i < n; ++i) rest[i] = d[i] - a * std::pow(g[i], p.alpha);
        dal = frac_derivative(RealGridFn(g, rest), p.alpha).values;
        start = a * std::tgamma(1.0 + p.alpha);
        for (std::size_t i = 1; i < n; ++i) dal[i] += start;
    } else {
        // Left derivative of the interpolant, the alpha -> 1 limit of the above.
        for (std::size_t i = 1; i < n; ++i) dal[i] = (d[i] - d[i - 1]) / (g[i] - g[i - 1]);
    }
    std::vector<double> th(n);
    for (std::size_t i = 1; i < n; ++i) th[i] = (dal[i] + p.lambda * d[i]) / p.lambda + p.v0;
    th[0] = p.alpha < 1.0 ? p.v0 + start / p.lambda : (n > 1 ? th[1] : p.v0);
    MeanReversionCurve out{RealGridFn(g, std::move(th))};
    validate_theta(p, out, b);
    return out;
}

double conditional_theta_at(const RoughHestonParams& p, const MeanReversionCurve& theta0, const RealGridFn& v_path,
                            double t0, double u) {
    validate_params(p);
    if (!(u > 0.0)) throw DomainError("conditional theta is defined for u > 0");
    if (!(t0 >= 0.0)) throw DomainError("t0 must be nonnegative");
    return conditional_theta_impl(p, theta0, v_path, node_index(v_path.grid, t0), u);
}

MeanReversionCurve conditional_theta(const RoughHestonParams& p, const MeanReversionCurve& theta0,
                                     const RealGridFn& v_path, double t0, const TimeGrid& u_grid) {
    validate_params(p);
    if (!(t0 >= 0.0)) throw DomainError("t0 must be nonnegative");
    const std::size_t m = node_index(v_path.grid, t0);
    std::vector<double> th(u_grid.size());
    for (std::size_t i = 0; i < th.size(); ++i) th[i] = conditional_theta_impl(p, theta0, v_path, m, u_grid[i]);
    MeanReversionCurve out{RealGridFn(u_grid, std::move(th))};
    RoughHestonParams q = p;
    q.v0 = v_path[m];
    validate_theta(q, out, {}, 1e-6 * std::max(p.v0, q.v0));
    return out;
}

ForwardVarianceCurve conditional_forward_variance(const RoughHestonParams& p, const MeanReversionCurve& theta0,
                                                  const RealGridFn& v_path, double t0, const TimeGrid& grid) {
    const MeanReversionCurve th = conditional_theta(p, theta0, v_path, t0, grid);
    const double vt = v_path[node_index(v_path.grid, t0)];
    if (!(vt >= 0.0)) throw DomainError("conditioning path must be nonnegative");
    return forward_variance_impl(p.alpha, p.lambda, vt, th, grid);
}

CurveFile parse_curve_json(const std::string& text) {
    CurveFile c;
    try {
        const nlohmann::json j = nlohmann::json::parse(text);
        c.kind = j.at("kind").get<std::string>();
        c.grid = j.at("grid").get<std::vector<double>>();
        c.values = j.at("values").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed curve JSON: ") + e.what(), {});
    }
    validate_curve_file(c);
    return c;
}

void validate_curve_file(const CurveFile& c) {
    if (c.kind != "theta" && c.kind != "xi") throw ValidationError("curve kind must be \"theta\" or \"xi\"", {});
    if (c.grid.size() != c.values.size() || c.grid.empty())
        throw ValidationError("curve grid and values must be nonempty and of equal length", {});
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
        const bool ok = std::isfinite(c.grid[i]) && std::isfinite(c.values[i]) &&
                        (i == 0 ? c.grid[0] >= 0.0 : c.grid[i] > c.grid[i - 1]);
        if (!ok) bad.push_back(i);
    }
    if (!bad.empty()) {
        const std::string msg = "curve grid must be finite, nonnegative and increasing; bad nodes " + node_list(bad);
        throw ValidationError(msg, std::move(bad));
    }
}

RealGridFn curve_function(const CurveFile& c) {
    std::vector<double> g = c.grid, v = c.values;
    if (g.front() > 0.0) {
        g.insert(g.begin(), 0.0);
        v.insert(v.begin(), v.front());
    }
    return RealGridFn(TimeGrid(std::move(g)), std::move(v));
}

}  // namespace rh
