#include "roughhedge/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roughhedge/error.hpp"

namespace rh {

TimeGrid::TimeGrid() : nodes_(std::make_shared<const std::vector<double>>(std::vector<double>{0.0})) {}

TimeGrid::TimeGrid(std::vector<double> nodes) {
    if (nodes.empty()) throw DomainError("time grid must contain at least one node");
    if (nodes.front() != 0.0) throw DomainError("time grid must start at 0");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!std::isfinite(nodes[i])) throw DomainError("time grid node " + std::to_string(i) + " is not finite");
        if (i > 0 && !(nodes[i] > nodes[i - 1]))
            throw DomainError("time grid must be strictly increasing (node " + std::to_string(i) + ")");
    }
    if (nodes.size() > 1) {
        const double h = nodes.back() / static_cast<double>(nodes.size() - 1);
        uniform_ = true;
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            if (std::abs((nodes[i] - nodes[i - 1]) - h) > 1e-10 * h) {
                uniform_ = false;
                break;
            }
        }
        if (uniform_) step_ = h;
    }
    nodes_ = std::make_shared<const std::vector<double>>(std::move(nodes));
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t n) {
    if (!(horizon > 0.0) || n == 0) throw DomainError("uniform grid needs horizon > 0 and n >= 1");
    std::vector<double> t(n + 1);
    for (std::size_t k = 0; k <= n; ++k) t[k] = horizon * static_cast<double>(k) / static_cast<double>(n);
    t[n] = horizon;
    return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::graded(double horizon, std::size_t n, double exponent) {
    if (!(horizon > 0.0) || n == 0 || !(exponent >= 1.0))
        throw DomainError("graded grid needs horizon > 0, n >= 1, exponent >= 1");
    std::vector<double> t(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        t[k] = horizon * std::pow(static_cast<double>(k) / static_cast<double>(n), exponent);
    t[n] = horizon;
    return TimeGrid(std::move(t));
}

std::size_t TimeGrid::locate(double t) const noexcept {
    const auto& v = *nodes_;
    if (v.size() < 2) return 0;
    if (uniform_) {
        const double k = std::floor(t / step_);
        if (k <= 0.0) return 0;
        return std::min(static_cast<std::size_t>(k), v.size() - 2);
    }
    auto it = std::upper_bound(v.begin(), v.end(), t);
    if (it == v.begin()) return 0;
    return std::min(static_cast<std::size_t>(it - v.begin()) - 1, v.size() - 2);
}

bool TimeGrid::same_as(const TimeGrid& other) const noexcept {
    if (nodes_ == other.nodes_) return true;
    return *nodes_ == *other.nodes_;
}

template <class T>
GridFn<T>::GridFn(TimeGrid g, std::vector<T> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.size()) throw DomainError("grid function size does not match its grid");
}

template <class T>
T GridFn<T>::at(double t) const {
    if (grid.size() == 1 || t <= grid[0]) return values.front();
    if (t >= grid.horizon()) return values.back();
    const std::size_t i = grid.locate(t);
    const double w = (t - grid[i]) / (grid[i + 1] - grid[i]);
    return values[i] * (1.0 - w) + values[i + 1] * w;
}

template struct GridFn<double>;
template struct GridFn<cplx>;

}  // namespace rh
