#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace rh {

using cplx = std::complex<double>;

// Strictly increasing time nodes starting at 0. Immutable; copies share storage.
class TimeGrid {
public:
    TimeGrid();
    explicit TimeGrid(std::vector<double> nodes);

    // n intervals of equal length on [0, horizon].
    static TimeGrid uniform(double horizon, std::size_t n);
    // t_k = horizon * (k/n)^exponent; exponent > 1 clusters nodes near 0.
    static TimeGrid graded(double horizon, std::size_t n, double exponent);

    std::size_t size() const noexcept { return nodes_->size(); }
    bool empty() const noexcept { return nodes_->empty(); }
    double operator[](std::size_t i) const noexcept { return (*nodes_)[i]; }
    double horizon() const noexcept { return nodes_->back(); }
    std::span<const double> nodes() const noexcept { return *nodes_; }
    bool is_uniform() const noexcept { return uniform_; }
    // Only meaningful when is_uniform().
    double step() const noexcept { return step_; }

    // Index i with nodes[i] <= t < nodes[i+1], clamped to [0, size()-2].
    std::size_t locate(double t) const noexcept;

    bool same_as(const TimeGrid& other) const noexcept;

private:
    std::shared_ptr<const std::vector<double>> nodes_;
    bool uniform_ = false;
    double step_ = 0.0;
};

// A function of time sampled on a TimeGrid; piecewise-linear in between.
template <class T>
struct GridFn {
    TimeGrid grid;
    std::vector<T> values;

    GridFn() = default;
    GridFn(TimeGrid g, std::vector<T> v);
    GridFn(TimeGrid g, T fill) : grid(std::move(g)), values(grid.size(), fill) {}

    std::size_t size() const noexcept { return values.size(); }
    const T& operator[](std::size_t i) const noexcept { return values[i]; }
    T& operator[](std::size_t i) noexcept { return values[i]; }

    // Linear interpolation; flat extrapolation outside the grid.
    T at(double t) const;
};

using RealGridFn = GridFn<double>;
using ComplexGridFn = GridFn<cplx>;

extern template struct GridFn<double>;
extern template struct GridFn<cplx>;

}  // namespace rh
