#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roughhedge/grid.hpp"
#include "roughhedge/model.hpp"
#include "roughhedge/pricing.hpp"

namespace rh {

// fv_kernel(s), s in [0, T - t]: the density of dC/dxi, so that
// dC.zeta = int fv_kernel(s) zeta(s) ds (see fv_directional).
struct HedgeRatios {
    double price = 0.0;
    double delta = 0.0;
    RealGridFn fv_kernel;
    double tail_bound = 0.0;
};

// Delta and forward-variance kernel from one Fourier pass; calls only (puts
// follow by parity: same kernel, delta - 1).
HedgeRatios hedge_ratios(const RoughHestonParams& p, const ForwardVarianceCurve& xi, const VanillaSpec& spec,
                         const QuadratureConfig& q, double spot);
double delta(const RoughHestonParams& p, const ForwardVarianceCurve& xi, const VanillaSpec& spec,
             const QuadratureConfig& q, double spot);
RealGridFn fv_gradient(const RoughHestonParams& p, const ForwardVarianceCurve& xi, const VanillaSpec& spec,
                       const QuadratureConfig& q, double spot);
// int_0^tau kernel(s) zeta(s) ds, exact for piecewise-linear inputs.
double fv_directional(const RealGridFn& kernel, const RealGridFn& zeta, double tau);

// s -> (1/lambda) f(s) nu sqrt(v_u) db on grid (s = 0 takes the value at the
// first positive node, where the density is singular for alpha < 1).
RealGridFn curve_innovation(const RoughHestonParams& p, double v_u, double db, const TimeGrid& grid);

struct HedgeFailure {
    std::size_t path = 0;
    std::size_t step = 0;
    std::string message;
};

// Hedge of one option along simulated paths. The per-step arrays follow path 0;
// the P&L statistics cover every path that completed.
struct HedgeReport {
    TimeGrid times;
    std::vector<double> spot, variance, delta, option_value, portfolio_value;
    double initial_price = 0.0;
    double damping_used = 0.0;
    double pnl_terminal = 0.0;  // mean over paths of portfolio - payoff
    double pnl_std_across_paths = 0.0;
    double pnl_stderr = 0.0;
    std::size_t n_paths = 0, n_completed = 0;
    bool partial = false;
    double max_tail = 0.0;  // largest truncation estimate met along the paths
    std::vector<double> pnl;  // per path; NaN where the path failed
    std::vector<HedgeFailure> failures;
};

// Self-financing replication of spec along simulate_rough_heston paths with
// n_steps uniform hedge dates: at each date the delta units of S and the
// curve leg dC.(dE[V_.|F]) driven by the same Brownian increment. A strike of
// 0 is accepted (payoff S_T).
HedgeReport replicate(const RoughHestonParams& p, const MeanReversionCurve& theta0, const VanillaSpec& spec,
                      const QuadratureConfig& q, std::size_t n_steps, std::size_t n_paths, std::uint64_t seed);

}  // namespace rh
