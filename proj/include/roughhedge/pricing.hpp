#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "roughhedge/error.hpp"
#include "roughhedge/model.hpp"
#include "roughhedge/riccati.hpp"

namespace rh {

enum class OptionKind { call, put };

struct VanillaSpec {
    double strike = 1.0;
    double maturity = 1.0;
    OptionKind kind = OptionKind::call;
};

enum class QuadRule {
    gauss_panels,  // fixed-order Gauss-Legendre on geometrically growing panels
    adaptive,      // same panels, each bisected until two levels agree
};

struct QuadratureConfig {
    double damping = 0.0;      // a > 1; 0 selects the default rule
    double b_max = 0.0;        // truncation; 0 extends panels until the tail bound meets tol
    std::size_t n_nodes = 16;  // Gauss-Legendre points per panel
    QuadRule rule = QuadRule::gauss_panels;
    std::size_t n_time = 512;  // Riccati nodes on [0, maturity]
    double tol = 1e-10;        // target tail bound, relative to spot
    double max_tail = 1e-6;    // larger tail bounds raise AccuracyError, relative to spot
    double b_limit = 2e5;      // hard cap on automatic truncation
};

struct PriceResult {
    double price = 0.0;
    double damping_used = 0.0;
    double tail_bound = 0.0;
};

// Transform of the damped call payoff: e^{(1-a+ib) log K} / ((ib-a)(ib-a+1)).
cplx payoff_transform(double a, double strike, double b);

// min(1.5, (1 + a_+(T))/2), pulled inside lambda - rho nu a > 0.
double default_damping(const RoughHestonParams& p, double maturity);

// Black-Scholes call with total variance var and zero rates, its spot
// derivative and its derivative in var.
double bs_call(double s, double k, double var);
double bs_call_delta(double s, double k, double var);
double bs_call_dvar(double s, double k, double var);

// Frequency nodes of the Fourier integral at one maturity, shared by every
// strike and spot. The integrand is ghat(-b) (L - L_bs) with
//   L(b) = exp(z log S + int_0^tau chi(z, tau - s) xi(s) ds),  z = a + ib,
//   L_bs(b) = exp(z log S + (z^2 - z)/2 int_0^tau xi),
// and the Black-Scholes call with the same total variance added back.
struct FourierGrid {
    RoughHestonParams params;
    double tau = 0.0;
    double a = 0.0;
    double var = 0.0;  // int_0^tau xi
    std::vector<double> b, w;
    std::vector<std::size_t> panel_end;  // one past the last node of each panel
    std::vector<cplx> expo;  // int_0^tau chi(z, tau - s) xi(s) ds
    std::vector<std::shared_ptr<const RiccatiSolution>> h;
};

struct FourierValue {
    double call = 0.0;
    double delta = 0.0;  // d/dS of the call
    double tail_bound = 0.0;
};

// Builds the nodes for maturity tau. Panels are added until the tail bound
// at every (spot, strike) pair meets q.tol (or up to q.b_max when given).
FourierGrid fourier_grid(const RoughHestonParams& p, const ForwardVarianceCurve& xi, double tau,
                         const QuadratureConfig& q, std::span<const double> spots, std::span<const double> strikes);
FourierValue fourier_value(const FourierGrid& g, double spot, double strike);
// Same nodes and Riccati solutions, exponents recomputed for another curve.
FourierGrid fourier_rebase(const FourierGrid& g, const ForwardVarianceCurve& xi);
// Tail bound of the truncated integral at (spot, strike).
double fourier_tail(const FourierGrid& g, double spot, double strike);

PriceResult price_vanilla(const RoughHestonParams& p, const ForwardVarianceCurve& xi, const VanillaSpec& spec,
                          const QuadratureConfig& q = {});

struct SurfaceCell {
    PriceResult result;
    bool ok = true;
    ErrorKind error_kind = ErrorKind::numerical;
    std::string error;
};

// cells[i][j] for maturities[i], strikes[j]; errors are recorded per cell.
std::vector<std::vector<SurfaceCell>> price_surface(const RoughHestonParams& p, const ForwardVarianceCurve& xi,
                                                    std::span<const double> strikes,
                                                    std::span<const double> maturities, const QuadratureConfig& q = {},
                                                    OptionKind kind = OptionKind::call);

}  // namespace rh
