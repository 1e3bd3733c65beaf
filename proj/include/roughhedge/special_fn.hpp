#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "roughhedge/grid.hpp"

namespace rh {

struct MittagLefflerParams {
    double alpha = 1.0;  // (0, 1]
    double beta = 1.0;   // > 0
};

// Which evaluation route mittag_leffler takes for a given argument.
enum class MlRoute {
    closed_form,  // alpha == 1 with integer beta
    taylor,       // power series, long double accumulation
    asymptotic,   // -sum z^-k / Gamma(beta - alpha k), optimally truncated
    integral,     // branch-cut integral, double-exponential quadrature
};

// Arguments with |z| <= ml_taylor_radius(alpha) always use the power series;
// the bound keeps the series' cancellation below exp(10).
double ml_taylor_radius(double alpha);

// E_{alpha,beta}(z) = sum_n z^n / Gamma(alpha n + beta).
double mittag_leffler(const MittagLefflerParams& p, double z);
cplx mittag_leffler(const MittagLefflerParams& p, cplx z);
MlRoute mittag_leffler_route(const MittagLefflerParams& p, double z);

// 1/Gamma(x); exactly 0 at the poles.
double rgamma(double x);

// Mittag-Leffler density f(t) = lambda t^(alpha-1) E_{alpha,alpha}(-lambda t^alpha), t > 0.
double ml_density(double alpha, double lambda, double t);
// F(t) = 1 - E_{alpha,1}(-lambda t^alpha), t >= 0.
double ml_cdf(double alpha, double lambda, double t);
// int_0^t F(s) ds.
double ml_cdf_integral(double alpha, double lambda, double t);
// int_0^t int_0^s F(u) du ds.
double ml_cdf_double_integral(double alpha, double lambda, double t);

// Product-integration weights for the kernel (t_n - s)^(p-1) on a grid,
// against the piecewise-linear interpolant of the integrand:
//   int_0^{t_n} (t_n - s)^(p-1) phi(s) ds ~ sum_{j<n} left(n,j) phi_j + right(n,j) phi_{j+1}
// where (left, right) belong to interval [t_j, t_{j+1}]. No 1/Gamma(p) factor.
// p == 1 is the plain trapezoid rule.
class PowerKernelWeights {
public:
    PowerKernelWeights(const TimeGrid& grid, double p);

    const TimeGrid& grid() const noexcept { return grid_; }
    double exponent() const noexcept { return p_; }

    double left(std::size_t n, std::size_t j) const noexcept;
    double right(std::size_t n, std::size_t j) const noexcept;
    // int_{t_j}^{t_{j+1}} (t_n - s)^(p-1) ds, the product-rectangle weight.
    double rect(std::size_t n, std::size_t j) const noexcept { return left(n, j) + right(n, j); }

    // Trapezoid sum over nodes 0..n-1 only (the weight of node n is right(n, n-1)).
    template <class T>
    T trapezoid_history(std::size_t n, std::span<const T> v) const {
        T acc{};
        for (std::size_t j = 0; j < n; ++j) {
            acc += left(n, j) * v[j];
            if (j + 1 < n) acc += right(n, j) * v[j + 1];
        }
        return acc;
    }
    template <class T>
    T trapezoid(std::size_t n, std::span<const T> v) const {
        if (n == 0) return T{};
        return trapezoid_history(n, v) + right(n, n - 1) * v[n];
    }
    template <class T>
    T rectangle(std::size_t n, std::span<const T> v) const {
        T acc{};
        for (std::size_t j = 0; j < n; ++j) acc += rect(n, j) * v[j];
        return acc;
    }

private:
    std::size_t tri(std::size_t n, std::size_t j) const noexcept { return n * (n - 1) / 2 + j; }

    TimeGrid grid_;
    double p_;
    bool uniform_;
    double scale_ = 1.0;        // h^p on uniform grids
    std::vector<double> left_;  // uniform: indexed by n-j; otherwise triangular
    std::vector<double> right_;
};

// Exact integrals of u^(p-1) against the two hat functions on [b, a], a > b >= 0.
struct HatIntegrals {
    double near_b;  // int_b^a u^(p-1) (a-u)/(a-b) du
    double near_a;  // int_b^a u^(p-1) (u-b)/(a-b) du
};
HatIntegrals power_hat_integrals(double a, double b, double p);

// Riemann-Liouville fractional integral I^r f, r in [0, 1] (r = 0 is the identity).
RealGridFn frac_integral(const RealGridFn& f, double r);
ComplexGridFn frac_integral(const ComplexGridFn& f, double r);

// Riemann-Liouville derivative D^r f = d/dt I^(1-r) f, r in [0, 1), computed
// exactly for the piecewise-linear interpolant of f. The value at t = 0 is
// infinite when f(0) != 0 and r > 0.
RealGridFn frac_derivative(const RealGridFn& f, double r);

}  // namespace rh
