#pragma once

#include <cstddef>
#include <vector>

namespace rh {

// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

// Cached per thread; n >= 1.
const GaussRule& gauss_legendre(std::size_t n);

// int_a^b f with an n-point Gauss-Legendre rule.
template <class F>
auto gauss_integrate(F&& f, double a, double b, std::size_t n) {
    const GaussRule& r = gauss_legendre(n);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    decltype(f(a)) acc{};
    for (std::size_t i = 0; i < r.x.size(); ++i) acc += r.w[i] * f(c + h * r.x[i]);
    return acc * h;
}

}  // namespace rh
