#include "roughhedge/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "roughhedge/error.hpp"
#include "roughhedge/quadrature.hpp"

namespace rh {

namespace {

void check_coeffs(const RiccatiCoeffs& c) {
    if (!(c.alpha > 0.5 && c.alpha <= 1.0)) throw DomainError("Riccati alpha must lie in (1/2, 1]");
    for (cplx v : {c.c0, c.c1, c.c2})
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NumericalError("Riccati coefficient is not finite");
}

bool is_real(cplx v) { return v.imag() == 0.0; }

// Time stepping shared by both forms. With g(h) = c0 + c1 h + c2 h^2 the
// scheme reads h_n = A_n + w_n g(h_n), where A_n collects the history and
// w_n = right(n, n-1) is the weight of the unknown node.
template <class Weights>
RiccatiSolution march(const Weights& W, const TimeGrid& grid, const RiccatiCoeffs& shown, cplx c0, cplx c1, cplx c2,
                      double scale, const RiccatiOptions& opt) {
    const std::size_t n_nodes = grid.size();
    RiccatiSolution sol;
    sol.coeffs = shown;
    sol.grid = grid;
    std::vector<cplx> h(n_nodes, cplx(std::nan(""), std::nan(""))), g(n_nodes);
    h[0] = 0.0;
    g[0] = c0;
    sol.valid = 1;
    const bool real_problem = is_real(c0) && is_real(c1) && is_real(c2);
    for (std::size_t n = 1; n < n_nodes; ++n) {
        cplx hist = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            hist += W.left(n, j) * g[j];
            if (j + 1 < n) hist += W.right(n, j) * g[j + 1];
        }
        const cplx A = scale * hist;
        const double w = scale * W.right(n, n - 1);
        cplx hn;
        bool blown = false;
        if (opt.corrector == RiccatiCorrector::implicit) {
            // w c2 h^2 + (w c1 - 1) h + (A + w c0) = 0, root continuous in w -> 0.
            const cplx q = A + w * c0;
            const cplx p = 1.0 - w * c1;
            const cplx disc = p * p - 4.0 * w * c2 * q;
            if (real_problem && disc.real() < 0.0) {
                blown = true;
            } else {
                const cplx sq = std::sqrt(disc);
                const cplx den = std::abs(p + sq) >= std::abs(p - sq) ? p + sq : p - sq;
                hn = 2.0 * q / den;
                if (real_problem) hn.imag(0.0);
            }
        } else {
            cplx pred = 0.0;
            for (std::size_t j = 0; j < n; ++j) pred += W.left(n, j) * g[j] + W.right(n, j) * g[j];
            pred *= scale;
            hn = A + w * (c0 + c1 * pred + c2 * pred * pred);
        }
        if (!blown) {
            if (std::isnan(hn.real()) || std::isnan(hn.imag())) throw NumericalError("Riccati solution produced NaN");
            blown = !(std::abs(hn) <= opt.blowup_cap);
        }
        if (blown) {
            sol.blew_up = true;
            sol.blowup_time = grid[n];
            break;
        }
        h[n] = hn;
        g[n] = c0 + c1 * hn + c2 * hn * hn;
        sol.valid = n + 1;
    }
    sol.h = ComplexGridFn(grid, std::move(h));
    return sol;
}

struct AdamsView {
    const PowerKernelWeights& w;
    double left(std::size_t n, std::size_t j) const noexcept { return w.left(n, j); }
    double right(std::size_t n, std::size_t j) const noexcept { return w.right(n, j); }
};

// Hat-function integrals of k(u) = (1/lambda) f^{alpha,lambda}(u) on [b, a].
HatIntegrals ml_kernel_hats(double alpha, double lambda, double a, double b) {
    const double h = a - b;
    if (b > 4.0 * h) {
        const GaussRule& r = gauss_legendre(8);
        const double c = 0.5 * (a + b), hh = 0.5 * h;
        double nb = 0.0, na = 0.0;
        for (std::size_t i = 0; i < r.x.size(); ++i) {
            const double u = c + hh * r.x[i];
            const double k = r.w[i] * ml_density(alpha, lambda, u);
            nb += k * (a - u);
            na += k * (u - b);
        }
        return {nb * hh / (h * lambda), na * hh / (h * lambda)};
    }
    // int_b^a f = F(a) - F(b); int_b^a f(u)(u - b) du = h F(a) - (G(a) - G(b)).
    const double fa = ml_cdf(alpha, lambda, a), fb = ml_cdf(alpha, lambda, b);
    const double ga = ml_cdf_integral(alpha, lambda, a), gb = ml_cdf_integral(alpha, lambda, b);
    const double i0 = (fa - fb) / lambda;
    const double na = (h * fa - (ga - gb)) / (h * lambda);
    return {i0 - na, na};
}

// Small LRU of solvers keyed by (grid, alpha, lambda); lookups take a shared
// lock, construction happens outside any lock.
template <class S>
class SolverCache {
public:
    template <class Make>
    std::shared_ptr<const S> get(const TimeGrid& g, double alpha, double lambda, Make make) {
        {
            std::shared_lock lk(mu_);
            for (const Entry& e : entries_)
                if (e.alpha == alpha && e.lambda == lambda && e.grid.same_as(g)) return e.solver;
        }
        auto s = std::make_shared<const S>(make());
        std::unique_lock lk(mu_);
        for (const Entry& e : entries_)
            if (e.alpha == alpha && e.lambda == lambda && e.grid.same_as(g)) return e.solver;
        entries_.push_front({g, alpha, lambda, s});
        if (entries_.size() > kCapacity) entries_.pop_back();
        return s;
    }

private:
    static constexpr std::size_t kCapacity = 16;
    struct Entry {
        TimeGrid grid;
        double alpha, lambda;
        std::shared_ptr<const S> solver;
    };
    std::shared_mutex mu_;
    std::list<Entry> entries_;
};

SolverCache<AdamsSolver>& adams_cache() {
    static SolverCache<AdamsSolver> c;
    return c;
}

SolverCache<VolterraSolver>& volterra_cache() {
    static SolverCache<VolterraSolver> c;
    return c;
}

struct SolutionCache {
    static constexpr std::size_t kCapacity = 8192;
    struct Entry {
        RiccatiCoeffs c;
        TimeGrid grid;
        std::shared_ptr<const RiccatiSolution> sol;
    };
    std::shared_mutex mu;
    std::unordered_multimap<std::size_t, Entry> map;
};

SolutionCache& solution_cache() {
    static SolutionCache c;
    return c;
}

std::size_t coeff_hash(const RiccatiCoeffs& c, const TimeGrid& g) {
    std::size_t h = std::hash<double>{}(c.alpha);
    auto mix = [&h](double v) { h ^= std::hash<double>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    for (cplx v : {c.c0, c.c1, c.c2}) {
        mix(v.real());
        mix(v.imag());
    }
    mix(g.horizon());
    mix(static_cast<double>(g.size()));
    return h;
}

bool same_coeffs(const RiccatiCoeffs& a, const RiccatiCoeffs& b) {
    return a.alpha == b.alpha && a.c0 == b.c0 && a.c1 == b.c1 && a.c2 == b.c2;
}

}  // namespace

std::shared_ptr<const RiccatiSolution> cached_riccati(const RiccatiCoeffs& c, const TimeGrid& grid) {
    SolutionCache& cache = solution_cache();
    const std::size_t key = coeff_hash(c, grid);
    auto find = [&]() -> std::shared_ptr<const RiccatiSolution> {
        auto [lo, hi] = cache.map.equal_range(key);
        for (auto it = lo; it != hi; ++it)
            if (same_coeffs(it->second.c, c) && it->second.grid.same_as(grid)) return it->second.sol;
        return nullptr;
    };
    {
        std::shared_lock lk(cache.mu);
        if (auto s = find()) return s;
    }
    auto sol = std::make_shared<const RiccatiSolution>(solve_riccati_adams(c, grid));
    std::unique_lock lk(cache.mu);
    if (auto s = find()) return s;
    if (cache.map.size() >= SolutionCache::kCapacity) cache.map.clear();
    cache.map.emplace(key, SolutionCache::Entry{c, grid, sol});
    return sol;
}

std::shared_ptr<const AdamsSolver> adams_solver(const TimeGrid& grid, double alpha) {
    return adams_cache().get(grid, alpha, 0.0, [&] { return AdamsSolver(grid, alpha); });
}

std::shared_ptr<const VolterraSolver> volterra_solver(const TimeGrid& grid, double alpha, double lambda) {
    return volterra_cache().get(grid, alpha, lambda, [&] { return VolterraSolver(grid, alpha, lambda); });
}

AdamsSolver::AdamsSolver(const TimeGrid& grid, double alpha) : alpha_(alpha), weights_(grid, alpha) {
    if (!(alpha > 0.5 && alpha <= 1.0)) throw DomainError("Riccati alpha must lie in (1/2, 1]");
}

RiccatiSolution AdamsSolver::solve(const RiccatiCoeffs& c, const RiccatiOptions& opt) const {
    check_coeffs(c);
    if (c.alpha != alpha_) throw DomainError("coefficient alpha does not match the solver");
    return march(AdamsView{weights_}, weights_.grid(), c, c.c0, c.c1, c.c2, rgamma(alpha_), opt);
}

VolterraSolver::VolterraSolver(const TimeGrid& grid, double alpha, double lambda)
    : grid_(grid), alpha_(alpha), lambda_(lambda), uniform_(grid.is_uniform()) {
    if (!(alpha > 0.5 && alpha <= 1.0)) throw DomainError("Riccati alpha must lie in (1/2, 1]");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive");
    const std::size_t n = grid.size() - 1;
    if (uniform_) {
        const double h = grid.step();
        left_.assign(n + 1, 0.0);
        right_.assign(n + 1, 0.0);
        for (std::size_t m = 1; m <= n; ++m) {
            const HatIntegrals hi = ml_kernel_hats(alpha, lambda, m * h, (m - 1) * h);
            left_[m] = hi.near_a;
            right_[m] = hi.near_b;
        }
    } else {
        left_.assign(n * (n + 1) / 2, 0.0);
        right_.assign(n * (n + 1) / 2, 0.0);
        for (std::size_t k = 1; k <= n; ++k) {
            for (std::size_t j = 0; j < k; ++j) {
                const HatIntegrals hi = ml_kernel_hats(alpha, lambda, grid[k] - grid[j], grid[k] - grid[j + 1]);
                left_[tri(k, j)] = hi.near_a;
                right_[tri(k, j)] = hi.near_b;
            }
        }
    }
}

double VolterraSolver::left(std::size_t n, std::size_t j) const noexcept {
    return uniform_ ? left_[n - j] : left_[tri(n, j)];
}

double VolterraSolver::right(std::size_t n, std::size_t j) const noexcept {
    return uniform_ ? right_[n - j] : right_[tri(n, j)];
}

RiccatiSolution VolterraSolver::solve(const RiccatiCoeffs& c, const RiccatiOptions& opt) const {
    check_coeffs(c);
    if (c.alpha != alpha_) throw DomainError("coefficient alpha does not match the solver");
    return march(*this, grid_, c, c.c0, c.c1 + lambda_, c.c2, 1.0, opt);
}

TimeGrid riccati_grid(double horizon, std::size_t n, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
    if (alpha == 1.0) return TimeGrid::uniform(horizon, n);
    return TimeGrid::graded(horizon, n, std::clamp(1.5 / alpha, 2.0, 3.0));
}

RiccatiSolution solve_riccati_adams(const RiccatiCoeffs& c, const TimeGrid& grid, const RiccatiOptions& opt) {
    check_coeffs(c);
    return adams_solver(grid, c.alpha)->solve(c, opt);
}

RiccatiSolution solve_riccati_volterra(const RiccatiCoeffs& c, double lambda, const TimeGrid& grid,
                                       const RiccatiOptions& opt) {
    check_coeffs(c);
    return volterra_solver(grid, c.alpha, lambda)->solve(c, opt);
}

ComplexGridFn chi_from_h(const RiccatiSolution& sol, cplx z, double rho, double nu) {
    std::vector<cplx> out(sol.h.size());
    const cplx base = 0.5 * (z * z - z);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const cplx h = sol.h[i];
        out[i] = base + z * rho * nu * h + 0.5 * nu * nu * h * h;
    }
    return ComplexGridFn(sol.grid, std::move(out));
}

ComplexGridFn ml_kernel_convolve(const ComplexGridFn& phi, double alpha, double lambda) {
    if (phi.values.empty()) throw DomainError("convolution of an empty grid function");
    const auto k = volterra_solver(phi.grid, alpha, lambda);
    std::vector<cplx> out(phi.size());
    for (std::size_t n = 1; n < out.size(); ++n) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += k->left(n, j) * phi[j] + k->right(n, j) * phi[j + 1];
        out[n] = acc;
    }
    return ComplexGridFn(phi.grid, std::move(out));
}

}  // namespace rh
