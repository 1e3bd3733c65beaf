#pragma once

#include <string>
#include <vector>

#include "roughhedge/grid.hpp"

namespace rh {

struct RoughHestonParams {
    double alpha = 0.6;  // (1/2, 1]
    double lambda = 2.0;
    double nu = 0.3;
    double rho = -0.7;  // [-1, 1]
    double v0 = 0.04;
    double s0 = 1.0;
};

// Throws DomainError on a violated range constraint.
void validate_params(const RoughHestonParams& p);
// Additional hedging assumptions: rho <= 0 and |rho| < 1.
void validate_hedging_params(const RoughHestonParams& p);

// Piecewise-linear mean-reversion level theta0(u); flat beyond the last node.
struct MeanReversionCurve {
    RealGridFn theta;
    double at(double u) const { return theta.at(u); }
};

// t -> E[V_t]; xi(0) = V0.
struct ForwardVarianceCurve {
    RealGridFn xi;
    double at(double t) const { return xi.at(t); }
};

// Node-wise surrogate of the upper growth condition: theta0(u) <= k_eps u^(-1/2-eps)
// for 0 < u <= 1. eps < 0 selects the default (alpha - 1/2)/2.
struct CurveBounds {
    double eps = -1.0;
    double k_eps = 10.0;
};

// Checks theta0(u) >= -V0 u^-alpha / (lambda Gamma(1-alpha)) and the upper
// surrogate; throws ValidationError with every offending node. tol is an
// absolute slack on both inequalities.
void validate_theta(const RoughHestonParams& p, const MeanReversionCurve& theta, const CurveBounds& b = {},
                    double tol = 0.0);
// xi(0) = V0 (relative 1e-9), xi >= 0 and finite.
void validate_xi(const RoughHestonParams& p, const ForwardVarianceCurve& xi);

// E[V_t] = V0 (1 - F(t)) + int_0^t f(t-s) theta0(s) ds on grid, with f the
// Mittag-Leffler density; theta0 is sampled at the grid nodes.
ForwardVarianceCurve forward_variance_from_theta(const RoughHestonParams& p, const MeanReversionCurve& theta,
                                                 const TimeGrid& grid);

// theta0 = (D^alpha(xi - V0) + lambda (xi - V0)) / lambda + V0 on xi's grid.
// xi - V0 is taken as a t^alpha + b t on the first cell (the generic start of
// a forward variance curve) and piecewise-linear elsewhere.
MeanReversionCurve theta_from_forward_variance(const RoughHestonParams& p, const ForwardVarianceCurve& xi,
                                               const CurveBounds& b = {});

// Mean-reversion curve of the model conditioned on the path V on [0, t0]
// (piecewise-linear between the nodes of v_path, which must contain t0).
double conditional_theta_at(const RoughHestonParams& p, const MeanReversionCurve& theta0, const RealGridFn& v_path,
                            double t0, double u);
// Same on u_grid; node u = 0 takes the u -> 0+ limit. The result is validated
// against the conditional model (start V_t0) with a small tolerance.
MeanReversionCurve conditional_theta(const RoughHestonParams& p, const MeanReversionCurve& theta0,
                                     const RealGridFn& v_path, double t0, const TimeGrid& u_grid);
// s -> E[V_{t0+s} | F_t0].
ForwardVarianceCurve conditional_forward_variance(const RoughHestonParams& p, const MeanReversionCurve& theta0,
                                                  const RealGridFn& v_path, double t0, const TimeGrid& grid);

// Curve interchange format {"grid": [...], "values": [...], "kind": "theta"|"xi"}.
struct CurveFile {
    std::string kind;
    std::vector<double> grid;
    std::vector<double> values;
};
// Throws ValidationError on malformed input.
CurveFile parse_curve_json(const std::string& text);
// Kind, sizes and an increasing finite grid starting at t >= 0.
void validate_curve_file(const CurveFile& c);
// A grid not starting at 0 is extended by a node at 0 carrying the first value.
RealGridFn curve_function(const CurveFile& c);

}  // namespace rh
