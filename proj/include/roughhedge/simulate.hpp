#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "roughhedge/grid.hpp"
#include "roughhedge/model.hpp"

namespace rh {

// Jointly simulated (S, V) paths with their driving increments. Matrices are
// row-major: s(i, k) = s_paths[i * n_nodes + k]; increments have n_nodes - 1
// columns. v_state is the Volterra sum itself, which may dip below zero;
// v_paths = max(v_state, 0) is what enters sqrt and the S dynamics.
struct PathSet {
    TimeGrid grid;
    std::size_t n_paths = 0;
    std::vector<double> s_paths, v_paths, v_state;
    std::vector<double> db, db_perp;
    std::uint64_t seed = 0;
    std::string scheme;

    std::size_t n_nodes() const noexcept { return grid.size(); }
    double s(std::size_t i, std::size_t k) const noexcept { return s_paths[i * n_nodes() + k]; }
    double v(std::size_t i, std::size_t k) const noexcept { return v_paths[i * n_nodes() + k]; }
    double state(std::size_t i, std::size_t k) const noexcept { return v_state[i * n_nodes() + k]; }
    double dB(std::size_t i, std::size_t k) const noexcept { return db[i * (n_nodes() - 1) + k]; }
    double dB_perp(std::size_t i, std::size_t k) const noexcept { return db_perp[i * (n_nodes() - 1) + k]; }
};

// Independent stream for (seed, index): mt19937_64 seeded through splitmix64.
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t index);

// Cell-averaged kernel of the stochastic convolution on a uniform grid:
// kappa[i] = (F(i dt) - F((i-1) dt)) / (lambda dt), i >= 1 (kappa[0] = 0), so
// that V_k = xi(t_k) + nu sum_{j<k} kappa[k-j] sqrt(V_j^+) dB_j.
std::vector<double> convolution_kernel(double alpha, double lambda, double dt, std::size_t n);

// Euler scheme on the convolution form of the variance with full truncation;
// log-Euler for S with W = rho B + sqrt(1 - rho^2) B_perp. The grid must be
// uniform. Deterministic given the seed, independent of the thread count.
PathSet simulate_rough_heston(const RoughHestonParams& p, const MeanReversionCurve& theta0, const TimeGrid& grid,
                              std::size_t n_paths, std::uint64_t seed);

// E[V_{t_m} | F_{t_k}] under the scheme for m >= k (index 0 is t_k).
std::vector<double> scheme_conditional_mean(const RoughHestonParams& p, const ForwardVarianceCurve& xi0,
                                            const PathSet& paths, std::size_t path, std::size_t k);

struct HawkesConfig {
    double t_scale = 200.0;  // T of the rescaling
    double t_max = 1.0;      // horizon in rescaled time
    RoughHestonParams params;
    MeanReversionCurve theta0{RealGridFn(TimeGrid::uniform(1.0, 1), 0.04)};
    TimeGrid grid = TimeGrid::uniform(1.0, 100);  // rescaled output grid on [0, t_max]
};

double hawkes_a(const HawkesConfig& c);   // 1 - lambda T^-alpha
double hawkes_mu(const HawkesConfig& c);  // (lambda / nu^2) T^(alpha - 1)
// a_T in (0, 1), grid covering [0, t_max], valid parameters.
void validate_hawkes(const HawkesConfig& c);

// Baseline zeta^T(t) at original time t, and its integral over [0, t].
double hawkes_baseline(const HawkesConfig& c, double t);
double hawkes_baseline_integral(const HawkesConfig& c, double t);

struct HawkesPath {
    std::vector<double> events;  // original time, sorted
    TimeGrid grid;               // rescaled
    std::vector<double> x, lambda_int, z;  // X^T, Lambda^T, Z^T on grid
};

// Baseline events by thinning against a piecewise-constant bound; offspring
// through the branching structure (Poisson(a_T) children per event at
// Mittag-Leffler distributed lags). Uses the stream path_rng(seed, index).
HawkesPath simulate_hawkes(const HawkesConfig& c, std::uint64_t seed, std::uint64_t index = 0);

// Lag with cdf 1 - E_alpha(-t^alpha).
double sample_mittag_leffler(double alpha, std::mt19937_64& rng);

// Hawkes process with bounded baseline mu and kernel phi (piecewise-linear
// GridFns, zero past their horizon) on [0, t]; Ogata thinning.
std::vector<double> simulate_hawkes_events(const RealGridFn& mu, const RealGridFn& phi, double t,
                                           std::mt19937_64& rng);

// P[N = n] = nu^n e^{-nu (n+1)} (n+1)^{n-1} / n!: descendants of one migrant.
double cluster_pmf(double nu_bar, std::size_t n);
// Expected cluster size including the migrant, 1 / (1 - nu_bar).
double cluster_mean_size(double nu_bar);
// Descendants of one migrant in a Galton-Watson tree with Poisson(nu_bar) offspring.
std::size_t sample_cluster_size(double nu_bar, std::mt19937_64& rng, std::size_t cap = 1u << 20);

double exp_moment_threshold(double nu_bar);  // nu - 1 - log nu
bool exp_moment_admissible(double a, double nu_bar);

// E[exp(a N_t)] for the Hawkes process with baseline mu and kernel phi, via
// the nested cluster recursion (trapezoid rule on 4096 steps); mu must cover
// [0, t], phi vanishes past its horizon.
double hawkes_exp_moment(const RealGridFn& mu, const RealGridFn& phi, double a, double t);

}  // namespace rh
