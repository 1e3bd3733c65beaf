#pragma once

#include "roughhedge/grid.hpp"
#include "roughhedge/model.hpp"
#include "roughhedge/riccati.hpp"

namespace rh {

struct MomentBounds {
    double a0 = 0.0;       // exp-integrated-variance bound
    double a_minus = 0.0;  // price-moment strip (a_minus, a_plus)
    double a_plus = 0.0;
    double x_t = 0.0;      // lambda + alpha t^-alpha / Gamma(1-alpha)
    double delta_t = 0.0;  // (2 nu X - rho nu^2)^2 + nu^4 (1 - rho^2)
};

struct CharFnOptions {
    std::size_t n_time = 512;  // Riccati nodes on [0, t]
};

// A moment that may be infinite. guaranteed: the sufficient finiteness bound
// holds; blew_up: the Riccati solution exploded before t (value = +inf).
struct MomentValue {
    double value = 0.0;
    bool guaranteed = true;
    bool blew_up = false;
};

RiccatiCoeffs price_riccati(const RoughHestonParams& p, cplx z);
RiccatiCoeffs variance_riccati(const RoughHestonParams& p, cplx a);
RiccatiCoeffs joint_riccati(const RoughHestonParams& p, cplx z, double x);

double moment_bound_a0(const RoughHestonParams& p, double t);
MomentBounds price_moment_bounds(const RoughHestonParams& p, double t);
// lambda - rho nu Re z > 0 and a_minus(t) < Re z < a_plus(t).
bool in_price_strip(const RoughHestonParams& p, cplx z, double t);

// int_0^t k(t - s) w(s) ds for the piecewise-linear interpolants of k and w
// (exact on the merged node set); k's grid must cover [0, t].
cplx lag_integral(const ComplexGridFn& k, double t, const RealGridFn& w);
// int_0^t h(t - s) (lambda theta0(s) + V0 s^-alpha / Gamma(1-alpha)) ds, the
// singular weight integrated exactly against piecewise-linear h.
cplx theta_exponent(const RoughHestonParams& p, const MeanReversionCurve& theta, const ComplexGridFn& h, double t);

MomentValue exp_int_variance_moment(const RoughHestonParams& p, const MeanReversionCurve& theta, double a, double t,
                                    const CharFnOptions& o = {});
MomentValue price_moment(const RoughHestonParams& p, const MeanReversionCurve& theta, double a, double t,
                         const CharFnOptions& o = {});
// E[exp(z int_0^t V + i x int_0^t sqrt(V) dB)]-type transform; needs Re z < a0(t).
cplx joint_mgf(const RoughHestonParams& p, const MeanReversionCurve& theta, cplx z, double x, double t,
               const CharFnOptions& o = {});

// R(z, t) = E[exp(z log(S_t / S0))]; z must lie in the price strip.
cplx char_fn(const RoughHestonParams& p, const MeanReversionCurve& theta, cplx z, double t, const CharFnOptions& o = {});
// Same through the forward variance curve: exp(int_0^t chi(z, t - s) xi(s) ds).
cplx char_fn_fv(const RoughHestonParams& p, const ForwardVarianceCurve& xi, cplx z, double t,
                const CharFnOptions& o = {});
// exp(z log s_t + int_0^tau chi(z, tau - s) xi_t(s) ds).
cplx conditional_char(const RoughHestonParams& p, double s_t, const ForwardVarianceCurve& xi_t, cplx z, double tau,
                      const CharFnOptions& o = {});

}  // namespace rh
