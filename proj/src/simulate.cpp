#include "roughhedge/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roughhedge/error.hpp"
#include "roughhedge/parallel.hpp"
#include "roughhedge/special_fn.hpp"

namespace rh {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void require_uniform(const TimeGrid& g) {
    if (g.size() < 2 || !g.is_uniform()) throw DomainError("simulation grid must be uniform with at least one step");
}

}  // namespace

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{splitmix64(seed), splitmix64(seed ^ splitmix64(index + 1))};
    return std::mt19937_64(seq);
}

std::vector<double> convolution_kernel(double alpha, double lambda, double dt, std::size_t n) {
    std::vector<double> k(n + 1, 0.0);
    double prev = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double f = ml_cdf(alpha, lambda, i * dt);
        k[i] = (f - prev) / (lambda * dt);
        prev = f;
    }
    return k;
}

PathSet simulate_rough_heston(const RoughHestonParams& p, const MeanReversionCurve& theta0, const TimeGrid& grid,
                              std::size_t n_paths, std::uint64_t seed) {
    validate_params(p);
    require_uniform(grid);
    if (n_paths == 0) throw DomainError("n_paths must be at least 1");
    const std::size_t n = grid.size() - 1;
    const double dt = grid.step(), sq = std::sqrt(dt), rho_perp = std::sqrt(std::max(0.0, 1.0 - p.rho * p.rho));
    const ForwardVarianceCurve xi = forward_variance_from_theta(p, theta0, grid);
    const std::vector<double> kappa = convolution_kernel(p.alpha, p.lambda, dt, n);

    PathSet ps;
    ps.grid = grid;
    ps.n_paths = n_paths;
    ps.seed = seed;
    ps.scheme = "volterra-euler-full-truncation";
    ps.s_paths.resize(n_paths * (n + 1));
    ps.v_paths.resize(n_paths * (n + 1));
    ps.v_state.resize(n_paths * (n + 1));
    ps.db.resize(n_paths * n);
    ps.db_perp.resize(n_paths * n);

    parallel_for(n_paths, [&](std::size_t i) {
        std::mt19937_64 rng = path_rng(seed, i);
        std::normal_distribution<double> normal;
        double* s = &ps.s_paths[i * (n + 1)];
        double* v = &ps.v_paths[i * (n + 1)];
        double* x = &ps.v_state[i * (n + 1)];
        double* db = &ps.db[i * n];
        double* dp = &ps.db_perp[i * n];
        std::vector<double> vol(n);  // nu sqrt(V_j^+) dB_j
        s[0] = p.s0;
        x[0] = xi.xi[0];
        v[0] = std::max(x[0], 0.0);
        double log_s = std::log(p.s0);
        for (std::size_t k = 0; k < n; ++k) {
            db[k] = sq * normal(rng);
            dp[k] = sq * normal(rng);
            const double vk = v[k], rv = std::sqrt(vk);
            vol[k] = p.nu * rv * db[k];
            log_s += rv * (p.rho * db[k] + rho_perp * dp[k]) - 0.5 * vk * dt;
            s[k + 1] = std::exp(log_s);
            double acc = xi.xi[k + 1];
            for (std::size_t j = 0; j <= k; ++j) acc += kappa[k + 1 - j] * vol[j];
            x[k + 1] = acc;
            v[k + 1] = std::max(acc, 0.0);
        }
    });
    return ps;
}

std::vector<double> scheme_conditional_mean(const RoughHestonParams& p, const ForwardVarianceCurve& xi0,
                                            const PathSet& paths, std::size_t path, std::size_t k) {
    const std::size_t n = paths.n_nodes() - 1;
    if (path >= paths.n_paths || k > n) throw DomainError("path or node index out of range");
    const std::vector<double> kappa = convolution_kernel(p.alpha, p.lambda, paths.grid.step(), n);
    std::vector<double> out(n + 1 - k);
    for (std::size_t m = k; m <= n; ++m) {
        double acc = xi0.at(paths.grid[m]);
        for (std::size_t j = 0; j < k; ++j) acc += kappa[m - j] * p.nu * std::sqrt(paths.v(path, j)) * paths.dB(path, j);
        out[m - k] = acc;
    }
    return out;
}

double hawkes_a(const HawkesConfig& c) { return 1.0 - c.params.lambda * std::pow(c.t_scale, -c.params.alpha); }

double hawkes_mu(const HawkesConfig& c) {
    return c.params.lambda / (c.params.nu * c.params.nu) * std::pow(c.t_scale, c.params.alpha - 1.0);
}

void validate_hawkes(const HawkesConfig& c) {
    validate_params(c.params);
    if (!(c.params.alpha < 1.0)) throw DomainError("Hawkes approximation needs alpha < 1");
    if (!(c.t_scale > 0.0) || !(c.t_max > 0.0)) throw DomainError("t_scale and t_max must be positive");
    const double a = hawkes_a(c);
    if (!(a > 0.0 && a < 1.0)) throw DomainError("a_T = 1 - lambda T^-alpha must lie in (0, 1)");
    if (c.grid.empty() || c.grid.horizon() < c.t_max * (1.0 - 1e-12))
        throw DomainError("Hawkes output grid must cover [0, t_max]");
    if (c.theta0.theta.values.empty()) throw DomainError("empty mean-reversion curve");
}

namespace {

// int_0^x K(x - u) theta0(u / T) du for piecewise-linear theta0 (flat past its
// last node), given the first two antiderivatives P, Q of the kernel K.
template <class P, class Q>
double theta_convolution(const HawkesConfig& c, double x, P p, Q q) {
    const RealGridFn& th = c.theta0.theta;
    double acc = 0.0;
    auto cell = [&](double ua, double ub, double va, double slope) {
        const double s1 = x - ub, s2 = x - ua;
        const double mass = p(s2) - p(s1);
        const double lin = -(s2 - s1) * p(s1) + q(s2) - q(s1);  // int K(x-u)(u-ua) du
        acc += va * mass + slope * lin;
    };
    for (std::size_t i = 0; i + 1 < th.size(); ++i) {
        const double ua = c.t_scale * th.grid[i];
        if (ua >= x) break;
        const double ub_node = c.t_scale * th.grid[i + 1];
        const double slope = (th[i + 1] - th[i]) / (ub_node - ua);
        cell(ua, std::min(ub_node, x), th[i], slope);
    }
    const double last = c.t_scale * th.grid.horizon();
    if (x > last) cell(last, x, th.values.back(), 0.0);
    return acc;
}

}  // namespace

double hawkes_baseline(const HawkesConfig& c, double t) {
    const double al = c.params.alpha, lam = c.params.lambda, ta = std::pow(c.t_scale, al);
    const double F = ml_cdf(al, 1.0, t);
    const double conv = theta_convolution(
        c, t, [&](double s) { return ml_cdf(al, 1.0, s); },
        [&](double s) { return ml_cdf_integral(al, 1.0, s); });
    return hawkes_a(c) * conv + c.params.v0 * (ta / lam * (1.0 - F) + lam / ta * F);
}

double hawkes_baseline_integral(const HawkesConfig& c, double t) {
    const double al = c.params.alpha, lam = c.params.lambda, ta = std::pow(c.t_scale, al);
    const double G = ml_cdf_integral(al, 1.0, t);
    const double conv = theta_convolution(
        c, t, [&](double s) { return ml_cdf_integral(al, 1.0, s); },
        [&](double s) { return ml_cdf_double_integral(al, 1.0, s); });
    return hawkes_a(c) * conv + c.params.v0 * (ta / lam * (t - G) + lam / ta * G);
}

double sample_mittag_leffler(double alpha, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = 1.0 - unif(rng), v = 1.0 - unif(rng);
    if (alpha == 1.0) return -std::log(u);
    const double pa = std::numbers::pi * alpha;
    return -std::log(u) * std::pow(std::sin(pa) / std::tan(pa * v) - std::cos(pa), 1.0 / alpha);
}

HawkesPath simulate_hawkes(const HawkesConfig& c, std::uint64_t seed, std::uint64_t index) {
    validate_hawkes(c);
    const RoughHestonParams& p = c.params;
    const double horizon = c.t_scale * c.t_max, aT = hawkes_a(c), muT = hawkes_mu(c);
    const double ta = std::pow(c.t_scale, p.alpha);
    double th_max = 0.0;
    for (double v : c.theta0.theta.values) th_max = std::max(th_max, v);
    std::mt19937_64 rng = path_rng(seed, index);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);

    // Migrants: thinning of mu_T zeta^T against a bound that is constant on
    // each segment (F is increasing, so F(ta) <= F <= F(tb) there).
    std::vector<double> events;
    const std::size_t n_seg = 512;
    const double seg = horizon / n_seg;
    for (std::size_t s = 0; s < n_seg; ++s) {
        const double t0 = s * seg, t1 = (s + 1) * seg;
        const double fa = ml_cdf(p.alpha, 1.0, t0), fb = ml_cdf(p.alpha, 1.0, t1);
        const double bound = muT * (aT * th_max * fb + p.v0 * (ta / p.lambda * (1.0 - fa) + p.lambda / ta * fb));
        if (!(bound > 0.0)) continue;
        double t = t0;
        while (true) {
            t += expo(rng) / bound;
            if (t >= t1) break;
            const double rate = muT * hawkes_baseline(c, t);
            if (!std::isfinite(rate)) throw NumericalError("Hawkes intensity is not finite");
            if (unif(rng) * bound < rate) events.push_back(t);
        }
    }
    // Offspring: every event has Poisson(a_T) children.
    std::poisson_distribution<int> kids(aT);
    std::vector<double> todo = events;
    while (!todo.empty()) {
        const double parent = todo.back();
        todo.pop_back();
        for (int j = kids(rng); j > 0; --j) {
            const double child = parent + sample_mittag_leffler(p.alpha, rng);
            if (child < horizon) {
                events.push_back(child);
                todo.push_back(child);
            }
        }
    }
    std::sort(events.begin(), events.end());

    HawkesPath out;
    out.events = events;
    out.grid = c.grid;
    const double cx = p.nu * p.nu * (1.0 - aT) / (ta * p.lambda), cz = p.nu * std::sqrt((1.0 - aT) / (ta * p.lambda));
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
        const double x = c.grid[i] * c.t_scale;
        const std::size_t n = std::lower_bound(events.begin(), events.end(), x) - events.begin();
        double comp = muT * hawkes_baseline_integral(c, x);
        for (std::size_t j = 0; j < n; ++j) comp += aT * ml_cdf(p.alpha, 1.0, x - events[j]);
        if (!std::isfinite(comp)) throw NumericalError("Hawkes compensator is not finite");
        out.x.push_back(cx * n);
        out.lambda_int.push_back(cx * comp);
        out.z.push_back(cz * (n - comp));
    }
    return out;
}

std::vector<double> simulate_hawkes_events(const RealGridFn& mu, const RealGridFn& phi, double t,
                                           std::mt19937_64& rng) {
    if (!(t > 0.0) || mu.grid.horizon() < t * (1.0 - 1e-12)) throw DomainError("baseline must cover [0, t]");
    double mu_max = 0.0;
    for (double v : mu.values) {
        if (!(v >= 0.0)) throw DomainError("baseline must be nonnegative");
        mu_max = std::max(mu_max, v);
    }
    std::vector<double> suffix(phi.size());
    for (std::size_t i = phi.size(); i-- > 0;) {
        if (!(phi[i] >= 0.0)) throw DomainError("kernel must be nonnegative");
        suffix[i] = std::max(phi[i], i + 1 < phi.size() ? suffix[i + 1] : 0.0);
    }
    const double ph = phi.grid.horizon();
    auto kernel = [&](double s) { return s > ph ? 0.0 : phi.at(s); };
    auto kernel_sup = [&](double s) { return s > ph ? 0.0 : suffix[phi.grid.locate(s)]; };
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> ev;
    std::size_t live = 0;  // events older than the kernel support drop out
    double s = 0.0;
    while (true) {
        while (live < ev.size() && s - ev[live] > ph) ++live;
        double bound = mu_max;
        for (std::size_t i = live; i < ev.size(); ++i) bound += kernel_sup(s - ev[i]);
        if (!(bound > 0.0)) break;
        s += expo(rng) / bound;
        if (s >= t) break;
        double rate = mu.at(s);
        for (std::size_t i = live; i < ev.size(); ++i) rate += kernel(s - ev[i]);
        if (!std::isfinite(rate)) throw NumericalError("Hawkes intensity is not finite");
        if (unif(rng) * bound < rate) ev.push_back(s);
    }
    return ev;
}

namespace {

void check_nu_bar(double nu) {
    if (!(nu > 0.0 && nu < 1.0)) throw DomainError("nu_bar must lie in (0, 1)");
}

}  // namespace

double cluster_pmf(double nu, std::size_t n) {
    check_nu_bar(nu);
    const double k = static_cast<double>(n);
    const double lp = k * std::log(nu) - nu * (k + 1.0) + (k - 1.0) * std::log(k + 1.0) - std::lgamma(k + 1.0);
    return std::exp(lp);
}

double cluster_mean_size(double nu) {
    check_nu_bar(nu);
    return 1.0 / (1.0 - nu);
}

std::size_t sample_cluster_size(double nu, std::mt19937_64& rng, std::size_t cap) {
    check_nu_bar(nu);
    std::poisson_distribution<std::size_t> kids(nu);
    std::size_t pending = 1, total = 0;
    while (pending > 0 && total < cap) {
        --pending;
        const std::size_t c = kids(rng);
        pending += c;
        total += c;
    }
    return total;
}

double exp_moment_threshold(double nu) {
    check_nu_bar(nu);
    if (nu < 0.5) return double((long double)nu - 1.0L - std::log((long double)nu));
    // x - log1p(x) with u = x / (2 + x): x u + 2 sum_k u^(2k+1) / (2k+1) with
    // every term of one sign, free of the cancellation as nu -> 1.
    const double x = nu - 1.0, u = x / (2.0 + x), u2 = u * u;
    double acc = 0.0, pw = u * u2;
    for (int k = 1; k < 200 && pw != 0.0; ++k, pw *= u2) acc += pw / (2 * k + 1);
    return x * u - 2.0 * acc;
}

bool exp_moment_admissible(double a, double nu) { return a <= exp_moment_threshold(nu); }

double hawkes_exp_moment(const RealGridFn& mu, const RealGridFn& phi, double a, double t) {
    if (!(t > 0.0)) throw DomainError("horizon must be positive");
    if (mu.grid.horizon() < t * (1.0 - 1e-12)) throw DomainError("baseline must cover [0, t]");
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < phi.size(); ++i) mass += 0.5 * (phi.grid[i + 1] - phi.grid[i]) * (phi[i] + phi[i + 1]);
    if (mass >= 1.0) throw DomainError("kernel mass must be below 1");
    if (mass > 0.0 && !exp_moment_admissible(a, mass))
        throw DomainError("exponent outside the admissible range a <= m - 1 - log m");
    if (a == 0.0) return 1.0;
    const double ph = phi.grid.horizon();
    auto kernel = [&](double s) { return s > ph * (1.0 + 1e-12) ? 0.0 : phi.at(s); };
    // y(s) = log E[exp(a N^f_s)] solves y = phi * (e^{a + y} - 1); trapezoid in s.
    const std::size_t n = 4096;
    const double h = t / n;
    std::vector<double> k(n + 1), g(n + 1);
    for (std::size_t i = 0; i <= n; ++i) k[i] = kernel(i * h);
    const double ea = std::exp(a);
    g[0] = ea - 1.0;
    for (std::size_t m = 1; m <= n; ++m) {
        double known = 0.5 * k[m] * g[0];
        for (std::size_t j = 1; j < m; ++j) known += k[m - j] * g[j];
        known *= h;
        const double c = 0.5 * h * k[0];
        // y = known + c (e^{a+y} - 1) by Newton from y = known.
        double y = known;
        for (int it = 0; it < 50; ++it) {
            const double e = ea * std::exp(y);
            const double r = y - known - c * (e - 1.0), d = 1.0 - c * e;
            const double step = r / d;
            y -= step;
            if (std::abs(step) < 1e-16 * (1.0 + std::abs(y))) break;
        }
        if (!std::isfinite(y)) throw NumericalError("cluster recursion diverged");
        g[m] = ea * std::exp(y) - 1.0;
    }
    double out = 0.5 * (mu.at(t) * g[0] + mu.at(0.0) * g[n]);
    for (std::size_t j = 1; j < n; ++j) out += mu.at(t - j * h) * g[j];
    return std::exp(h * out);
}

}  // namespace rh
