#include "roughhedge/hedging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "roughhedge/charfn.hpp"
#include "roughhedge/error.hpp"
#include "roughhedge/parallel.hpp"
#include "roughhedge/quadrature.hpp"
#include "roughhedge/riccati.hpp"
#include "roughhedge/simulate.hpp"
#include "roughhedge/special_fn.hpp"

namespace rh {

namespace {

constexpr double kPi = std::numbers::pi;

bool zero_curve(const FourierGrid& g) {
    if (g.var != 0.0) return false;
    for (const cplx& e : g.expo)
        if (e != 0.0) return false;
    return true;
}

}  // namespace

HedgeRatios hedge_ratios(const RoughHestonParams& p, const ForwardVarianceCurve& xi, const VanillaSpec& spec,
                         const QuadratureConfig& q, double spot) {
    validate_hedging_params(p);
    if (!(spot > 0.0) || !(spec.strike > 0.0) || !(spec.maturity > 0.0))
        throw DomainError("spot, strike and maturity must be positive");
    const double k = spec.strike, tau = spec.maturity;
    // The derivative integrands carry extra powers of b: tighten the tail target.
    QuadratureConfig qr = q;
    qr.tol = std::min(q.tol, 1e-13);
    const FourierGrid g = fourier_grid(p, xi, tau, qr, {&spot, 1}, {&k, 1});
    const FourierValue v = fourier_value(g, spot, k);
    if (!(v.tail_bound <= q.max_tail * spot))
        throw AccuracyError("Fourier tail bound above tolerance in hedge ratios", v.tail_bound);

    HedgeRatios r;
    r.tail_bound = v.tail_bound;
    const bool call = spec.kind == OptionKind::call;
    r.price = call ? v.call : v.call - spot + k;
    r.delta = call ? v.delta : v.delta - 1.0;

    const TimeGrid& tg = g.h.front()->grid;
    const std::size_t n = tg.size();
    std::vector<double> s(n), kv(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) s[i] = i == 0 ? 0.0 : tau - tg[n - 1 - i];
    s.back() = tau;
    if (zero_curve(g)) {
        // Price = intrinsic + exponentially small terms away from the money.
        if (spot == k) throw DomainError("forward-variance derivative is singular at the money when xi = 0");
        r.fv_kernel = RealGridFn(TimeGrid(s), kv);
        return r;
    }
    const double log_s = std::log(spot);
    double c0 = bs_call_dvar(spot, k, g.var);
    for (std::size_t j = 0; j < g.b.size(); ++j) {
        const cplx z(g.a, g.b[j]);
        const cplx gh = payoff_transform(g.a, k, -g.b[j]);
        const cplx l = std::exp(z * log_s + g.expo[j]);
        const cplx zq = 0.5 * (z * z - z);
        const cplx lbs = std::exp(z * log_s + zq * g.var);
        c0 -= g.w[j] * (gh * lbs * zq).real() / kPi;
        const ComplexGridFn chi = chi_from_h(*g.h[j], z, p.rho, p.nu);
        const cplx f = g.w[j] * gh * l / kPi;
        for (std::size_t i = 0; i < n; ++i) kv[i] += (f * chi[n - 1 - i]).real();
    }
    for (double& x : kv) x += c0;
    r.fv_kernel = RealGridFn(TimeGrid(s), kv);
    return r;
}

double delta(const RoughHestonParams& p, const ForwardVarianceCurve& xi, const VanillaSpec& spec,
             const QuadratureConfig& q, double spot) {
    validate_hedging_params(p);
    QuadratureConfig qr = q;
    qr.tol = std::min(q.tol, 1e-13);
    const double k = spec.strike;
    if (!(spot > 0.0) || !(k > 0.0)) throw DomainError("spot and strike must be positive");
    const FourierGrid g = fourier_grid(p, xi, spec.maturity, qr, {&spot, 1}, {&k, 1});
    const FourierValue v = fourier_value(g, spot, k);
    if (!(v.tail_bound <= q.max_tail * spot)) throw AccuracyError("Fourier tail bound above tolerance", v.tail_bound);
    return spec.kind == OptionKind::call ? v.delta : v.delta - 1.0;
}

RealGridFn fv_gradient(const RoughHestonParams& p, const ForwardVarianceCurve& xi, const VanillaSpec& spec,
                       const QuadratureConfig& q, double spot) {
    return hedge_ratios(p, xi, spec, q, spot).fv_kernel;
}

double fv_directional(const RealGridFn& kernel, const RealGridFn& zeta, double tau) {
    if (!(tau > 0.0)) throw DomainError("horizon must be positive");
    std::vector<double> s{0.0, tau};
    for (double x : kernel.grid.nodes())
        if (x > 0.0 && x < tau) s.push_back(x);
    for (double x : zeta.grid.nodes())
        if (x > 0.0 && x < tau) s.push_back(x);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    double acc = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double k0 = kernel.at(s[i - 1]), k1 = kernel.at(s[i]);
        const double z0 = zeta.at(s[i - 1]), z1 = zeta.at(s[i]);
        acc += (s[i] - s[i - 1]) / 6.0 * (2.0 * k0 * z0 + k0 * z1 + k1 * z0 + 2.0 * k1 * z1);
    }
    return acc;
}

RealGridFn curve_innovation(const RoughHestonParams& p, double v_u, double db, const TimeGrid& grid) {
    if (!(v_u >= 0.0)) throw DomainError("variance must be nonnegative");
    const double c = p.nu * std::sqrt(v_u) * db / p.lambda;
    std::vector<double> out(grid.size(), 0.0);
    if (c == 0.0) return RealGridFn(grid, out);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double s = grid[i] > 0.0 ? grid[i] : (grid.size() > 1 ? grid[1] : 0.0);
        out[i] = s > 0.0 ? c * ml_density(p.alpha, p.lambda, s) : 0.0;
    }
    return RealGridFn(grid, out);
}

namespace {

// Fourier state of the hedge along one maturity. With M_k(u) = E[V_u | F_tk]
// piecewise linear on the hedge dates, the exponent at date k is
//   Phi_k(b) = sum_{m >= k} B0_m(b) M_k(t_m) + B1_m(b) M_k(t_{m+1}),
// B0/B1 the hat-function integrals of chi(a + ib, T - u) over [t_m, t_{m+1}].
// The kernel chi does not depend on k, so one Riccati solve per frequency node
// serves every date and path; M_{k+1} - M_k = kappa(. - t_k) nu sqrt(V_k) dB_k
// moves Phi by that increment times K_k(b).
struct HedgeEngine {
    std::size_t n = 0, nb = 0;
    double dt = 0.0, strike = 0.0, a = 0.0;
    std::vector<double> b, w, kappa, vk;
    std::vector<cplx> z, zq, ghat;
    std::vector<std::size_t> panel_end;
    std::vector<cplx> b0, b1, kk;  // [m * nb + j]
    std::vector<cplx> phi0;

    // Hat integral of node m over the window [t_k, T].
    cplx hat(std::size_t k, std::size_t m, std::size_t j) const {
        cplx h = 0.0;
        if (m > k) h += b1[(m - 1) * nb + j];
        if (m < n) h += b0[m * nb + j];
        return h;
    }
    double hat_weight(std::size_t k, std::size_t m) const { return (m == k || m == n) ? 0.5 * dt : dt; }
};

TimeGrid hedge_riccati_grid(double t, std::size_t n, std::size_t per_step) {
    const std::size_t nf = n * per_step, graded = 16;
    const double d = t / nf;
    std::vector<double> nodes{0.0};
    for (std::size_t i = 1; i < graded; ++i) nodes.push_back(d * std::pow(double(i) / graded, 3.0));
    for (std::size_t i = 1; i <= nf; ++i) nodes.push_back(i == nf ? t : i * d);
    return TimeGrid(nodes);
}

HedgeEngine build_engine(const RoughHestonParams& p, const ForwardVarianceCurve& xi0, double t, double strike,
                         const QuadratureConfig& q, std::size_t n) {
    HedgeEngine e;
    e.n = n;
    e.dt = t / n;
    e.strike = strike;
    e.a = q.damping > 0.0 ? q.damping : default_damping(p, t);
    if (!(e.a > 1.0) || !in_price_strip(p, e.a, t)) throw DomainError("damping outside the price-moment strip");
    e.kappa = convolution_kernel(p.alpha, p.lambda, e.dt, n);

    const std::size_t per_step = std::max<std::size_t>(1, (1024 + n - 1) / n);
    const TimeGrid tg = hedge_riccati_grid(t, n, per_step);
    const std::size_t graded = 16;
    auto fine_index = [&](std::size_t steps) { return steps == 0 ? std::size_t(0) : graded - 1 + steps; };

    const double b_end = q.b_max > 0.0 ? q.b_max : std::min(q.b_limit, 4000.0);
    const double x0 = std::log(p.s0 / strike);
    const GaussRule& gr = gauss_legendre(q.n_nodes);
    std::vector<std::vector<cplx>> nb0, nb1;  // node-major while building
    double lo = 0.0, width = std::min(1.0, b_end);
    while (lo < b_end) {
        const double hi = std::min(lo + width, b_end);
        const std::size_t first = e.b.size();
        for (std::size_t i = 0; i < gr.x.size(); ++i) {
            e.b.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * gr.x[i]);
            e.w.push_back(0.5 * (hi - lo) * gr.w[i]);
        }
        const std::size_t cnt = e.b.size() - first;
        nb0.resize(e.b.size());
        nb1.resize(e.b.size());
        e.phi0.resize(e.b.size());
        parallel_for(cnt, [&](std::size_t i) {
            const std::size_t j = first + i;
            const cplx z(e.a, e.b[j]);
            const auto sol = cached_riccati(price_riccati(p, z), tg);
            if (sol->blew_up) throw NumericalError("Riccati blow-up at a hedge frequency node");
            const ComplexGridFn chi = chi_from_h(*sol, z, p.rho, p.nu);
            std::vector<cplx> c0(n, 0.0), c1(n, 0.0);
            cplx phi = 0.0;
            for (std::size_t m = 0; m < n; ++m) {
                // u in [t_m, t_{m+1}]  <->  tau' = T - u in [lo_s, hi_s] steps.
                const std::size_t lo_steps = (n - m - 1) * per_step, hi_steps = (n - m) * per_step;
                const double tl = lo_steps * (t / (n * per_step)), th = hi_steps * (t / (n * per_step));
                const double tlo = lo_steps == 0 ? 0.0 : tl, thi = m == 0 ? t : th;
                for (std::size_t f = fine_index(lo_steps); f < fine_index(hi_steps); ++f) {
                    const double sa = tg[f], sb = tg[f + 1], h = sb - sa;
                    const double p0a = (sa - tlo) / (thi - tlo), p0b = (sb - tlo) / (thi - tlo);
                    const double p1a = 1.0 - p0a, p1b = 1.0 - p0b;
                    const cplx xa = chi[f], xb = chi[f + 1];
                    c0[m] += h / 6.0 * (2.0 * xa * p0a + xa * p0b + xb * p0a + 2.0 * xb * p0b);
                    c1[m] += h / 6.0 * (2.0 * xa * p1a + xa * p1b + xb * p1a + 2.0 * xb * p1b);
                }
                phi += c0[m] * xi0.xi[m] + c1[m] * xi0.xi[m + 1];
            }
            nb0[j] = std::move(c0);
            nb1[j] = std::move(c1);
            e.phi0[j] = phi;
        });
        e.panel_end.push_back(e.b.size());
        lo = hi;
        // Panel width from the phase change of the integrand across the panel,
        // over log-moneyness x0 +- 1.
        const std::size_t last = e.b.size() - 1;
        double dphi = 0.0;
        for (double x : {x0 - 1.0, x0 + 1.0}) {
            double d = (e.b[last] - e.b[first]) * x;
            if (e.phi0[last].real() > -60.0) d += (e.phi0[last] - e.phi0[first]).imag();
            dphi = std::max(dphi, std::abs(d));
        }
        width = std::clamp(10.0 * width / std::max(dphi, 1e-12), 0.5 * width, 2.0 * width);
    }
    e.nb = e.b.size();
    const std::size_t nb = e.nb;
    e.z.resize(nb);
    e.zq.resize(nb);
    e.ghat.resize(nb);
    for (std::size_t j = 0; j < nb; ++j) {
        e.z[j] = cplx(e.a, e.b[j]);
        e.zq[j] = 0.5 * (e.z[j] * e.z[j] - e.z[j]);
        e.ghat[j] = payoff_transform(e.a, strike, -e.b[j]);
    }
    e.b0.assign(n * nb, 0.0);
    e.b1.assign(n * nb, 0.0);
    for (std::size_t j = 0; j < nb; ++j)
        for (std::size_t m = 0; m < n; ++m) {
            e.b0[m * nb + j] = nb0[j][m];
            e.b1[m * nb + j] = nb1[j][m];
        }
    nb0.clear();
    nb1.clear();
    // K_k(b) = sum_{m >= k+1} B0_m kappa[m-k] + B1_m kappa[m+1-k]; VK_k likewise
    // with the trapezoid weights of the window [t_{k+1}, T].
    e.kk.assign(n * nb, 0.0);
    e.vk.assign(n, 0.0);
    parallel_for(n, [&](std::size_t k) {
        cplx* out = &e.kk[k * nb];
        for (std::size_t m = k + 1; m < n; ++m) {
            const double c0 = e.kappa[m - k], c1 = e.kappa[m + 1 - k];
            const cplx* r0 = &e.b0[m * nb];
            const cplx* r1 = &e.b1[m * nb];
            for (std::size_t j = 0; j < nb; ++j) out[j] += c0 * r0[j] + c1 * r1[j];
        }
        double v = 0.0;
        for (std::size_t m = k + 1; m <= n; ++m) v += e.hat_weight(k + 1, m) * e.kappa[m - k];
        e.vk[k] = v;
    });
    return e;
}

struct StepValue {
    double value = 0.0, delta = 0.0, fv = 0.0, tail = 0.0;
    bool ok = true;
};

struct PathResult {
    double pnl = 0.0;
    double max_tail = 0.0;
    std::vector<double> spot, variance, delta, option_value, portfolio_value;
};

class PathHedger {
public:
    PathHedger(const RoughHestonParams& p, const HedgeEngine& e, const QuadratureConfig& q, const std::vector<double>& xi0)
        : p_(p), e_(e), q_(q), phi_(e.phi0), m_(xi0) {
        var_ = 0.0;
        for (std::size_t m = 0; m < e.n; ++m) var_ += 0.5 * e.dt * (m_[m] + m_[m + 1]);
    }

    // Value, delta and curve-leg ratio of the call at date k and spot s.
    StepValue evaluate(std::size_t k, double s) {
        const HedgeEngine& e = e_;
        const std::size_t n = e.n, nb = e.nb;
        neg_.clear();
        for (std::size_t m = k; m <= n; ++m)
            if (m_[m] < 0.0) neg_.push_back(m);
        // The value function sees the clamped curve max(M_k, 0).
        double var = var_, vk = k + 1 < n ? e.vk[k] : 0.0;
        for (std::size_t m : neg_) {
            var -= e.hat_weight(k, m) * m_[m];
            if (m >= k + 1 && k + 1 < n) vk -= e.hat_weight(k + 1, m) * e.kappa[m - k];
        }
        var = std::max(var, 0.0);
        StepValue out;
        // Scales of the increments the ratios multiply: dS and nu sqrt(V) dB.
        const double root_v = std::sqrt(std::max(m_[k], 0.0) * e.dt), sd_s = s * root_v, sd_g = p_.nu * root_v;
        const double log_s = std::log(s);
        double c = 0.0, d = 0.0, g = 0.0, tail_c = 0.0, tail_inc = 0.0;
        std::size_t j = 0;
        bool done = false;
        sums_.clear();
        for (std::size_t panel = 0; panel < e.panel_end.size() && !done; ++panel) {
            double mc = 0.0, md = 0.0, mg = 0.0;
            for (; j < e.panel_end[panel]; ++j) {
                cplx phi = phi_[j];
                for (std::size_t m : neg_) phi -= e.hat(k, m, j) * m_[m];
                cplx kp = k + 1 < n ? e.kk[k * nb + j] : cplx(0.0);
                if (k + 1 < n)
                    for (std::size_t m : neg_)
                        if (m >= k + 1) kp -= e.hat(k + 1, m, j) * e.kappa[m - k];
                const cplx zl = e.z[j] * log_s;
                const cplx l = std::exp(zl + phi), lbs = std::exp(zl + e.zq[j] * var);
                const cplx gi = e.ghat[j] * (l - lbs);
                c += e.w[j] * gi.real();
                d += e.w[j] * (gi * e.z[j]).real();
                const cplx gg = e.ghat[j] * (l * kp - lbs * e.zq[j] * vk);
                g += e.w[j] * gg.real();
                mc = std::max(mc, std::abs(gi));
                md = std::max(md, std::abs(gi * e.z[j]) / s);
                mg = std::max(mg, std::abs(gg));
            }
            // |ghat| ~ b^-2, so a non-increasing |L| past b leaves at most b max|I|.
            const double b = e.b[j - 1];
            tail_c = b * mc;
            tail_inc = b * (md * sd_s + mg * sd_g);
            done = std::max(tail_c, tail_inc) < q_.tol * s;
            sums_.push_back({b, c, d, g});
        }
        if (!done) {
            // The bound assumes no cancellation; past the grid the integrands
            // are slowly decaying oscillations, so fall back to the spread of
            // the partial sums over the upper half of the frequency range.
            const Partial& last = sums_.back();
            double sc = 0.0, si = 0.0;
            for (const Partial& ps : sums_) {
                if (ps.b < 0.5 * last.b) continue;
                sc = std::max(sc, std::abs(ps.c - last.c) / kPi);
                si = std::max(si, std::abs(ps.d - last.d) / (kPi * s) * sd_s + std::abs(ps.g - last.g) / kPi * sd_g);
            }
            tail_c = std::min(tail_c, sc);
            tail_inc = std::min(tail_inc, si);
        }
        // Past the first date only the ratios enter the P&L, through the
        // increments; a near-degenerate conditional law can leave a wide value
        // tail that multiplies nothing.
        out.tail = k == 0 ? tail_c : tail_inc;
        out.ok = done || out.tail <= q_.max_tail * s;
        if (!out.ok) return direct(k, s);
        out.value = bs_call(s, e.strike, var) + c / kPi;
        out.delta = bs_call_delta(s, e.strike, var) + d / (kPi * s);
        const double dv = var > 0.0 ? bs_call_dvar(s, e.strike, var) : 0.0;
        out.fv = dv * vk + g / kPi;
        return out;
    }

    // Fresh Fourier valuation on the remaining window, for states the shared
    // frequency grid cannot resolve (tiny remaining variance near expiry).
    StepValue direct(std::size_t k, double s) const {
        const HedgeEngine& e = e_;
        QuadratureConfig q = q_;
        q.damping = e.a;
        q.n_time = std::min(q_.n_time, std::max<std::size_t>(64, 16 * (e.n - k)));
        auto window = [&](std::size_t from, bool kernel) {
            std::vector<double> nodes, vals;
            for (std::size_t m = from; m <= e.n; ++m) {
                nodes.push_back((m - from) * e.dt);
                vals.push_back(kernel ? (m_[m] > 0.0 && m > k ? e.kappa[m - k] : 0.0) : std::max(m_[m], 0.0));
            }
            return RealGridFn(TimeGrid(nodes), vals);
        };
        auto zero = [](const RealGridFn& f) {
            return std::all_of(f.values.begin(), f.values.end(), [](double v) { return v == 0.0; });
        };
        StepValue out;
        const ForwardVarianceCurve xi{window(k, false)};
        if (zero(xi.xi)) {
            out.value = std::max(s - e.strike, 0.0);
            out.delta = s > e.strike ? 1.0 : 0.0;
            return out;
        }
        const HedgeRatios r = hedge_ratios(p_, xi, {e.strike, (e.n - k) * e.dt, OptionKind::call}, q, s);
        out.value = r.price;
        out.delta = r.delta;
        out.tail = r.tail_bound;
        if (k + 1 < e.n) {
            const ForwardVarianceCurve xi1{window(k + 1, false)};
            if (!zero(xi1.xi)) {
                const double tau1 = (e.n - k - 1) * e.dt;
                const HedgeRatios r1 = hedge_ratios(p_, xi1, {e.strike, tau1, OptionKind::call}, q, s);
                out.fv = fv_directional(r1.fv_kernel, window(k + 1, true), tau1);
                out.tail = std::max(out.tail, r1.tail_bound);
            }
        }
        return out;
    }

    // Roll to date k + 1 with the realized nu sqrt(V_k) dB_k.
    void advance(std::size_t k, double vol) {
        const HedgeEngine& e = e_;
        const std::size_t n = e.n, nb = e.nb;
        const double mk = m_[k], mk1 = m_[k + 1];
        if (k + 1 < n) {
            const cplx* r0 = &e.b0[k * nb];
            const cplx* r1 = &e.b1[k * nb];
            const cplx* kr = &e.kk[k * nb];
            for (std::size_t j = 0; j < nb; ++j) phi_[j] += vol * kr[j] - (r0[j] * mk + r1[j] * mk1);
            var_ += vol * e.vk[k] - 0.5 * e.dt * (mk + mk1);
        }
        for (std::size_t m = k + 1; m <= n; ++m) m_[m] += e.kappa[m - k] * vol;
    }

    double m(std::size_t i) const { return m_[i]; }

private:
    const RoughHestonParams& p_;
    const HedgeEngine& e_;
    const QuadratureConfig& q_;
    std::vector<cplx> phi_;
    std::vector<double> m_;
    double var_ = 0.0;
    std::vector<std::size_t> neg_;
    struct Partial {
        double b, c, d, g;
    };
    std::vector<Partial> sums_;
};

}  // namespace

HedgeReport replicate(const RoughHestonParams& p, const MeanReversionCurve& theta0, const VanillaSpec& spec,
                      const QuadratureConfig& q, std::size_t n_steps, std::size_t n_paths, std::uint64_t seed) {
    validate_hedging_params(p);
    if (n_steps < 1 || n_paths < 1) throw DomainError("n_steps and n_paths must be at least 1");
    if (!(spec.maturity > 0.0) || !(spec.strike >= 0.0) || !std::isfinite(spec.strike))
        throw DomainError("maturity must be positive and strike nonnegative");
    const double t = spec.maturity, k_strike = spec.strike;
    const bool call = spec.kind == OptionKind::call;
    const TimeGrid grid = TimeGrid::uniform(t, n_steps);
    const PathSet ps = simulate_rough_heston(p, theta0, grid, n_paths, seed);
    const ForwardVarianceCurve xi0 = forward_variance_from_theta(p, theta0, grid);
    const std::size_t n = n_steps;

    HedgeEngine engine;
    const bool linear = k_strike == 0.0;
    if (!linear) engine = build_engine(p, xi0, t, k_strike, q, n);

    std::vector<PathResult> results(n_paths);
    std::vector<std::vector<HedgeFailure>> fails(n_paths);
    std::vector<char> ok(n_paths, 1);
    parallel_for(n_paths, [&](std::size_t i) {
        PathResult& r = results[i];
        const bool keep = i == 0;
        try {
            double portfolio = 0.0;
            if (linear) {
                portfolio = call ? ps.s(i, 0) : 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double dlt = call ? 1.0 : 0.0;
                    if (keep) {
                        r.spot.push_back(ps.s(i, k));
                        r.variance.push_back(ps.v(i, k));
                        r.delta.push_back(dlt);
                        r.option_value.push_back(call ? ps.s(i, k) : 0.0);
                        r.portfolio_value.push_back(portfolio);
                    }
                    portfolio += dlt * (ps.s(i, k + 1) - ps.s(i, k));
                }
            } else {
                PathHedger h(p, engine, q, xi0.xi.values);
                for (std::size_t k = 0; k < n; ++k) {
                    const double s = ps.s(i, k);
                    StepValue sv = h.evaluate(k, s);
                    r.max_tail = std::max(r.max_tail, sv.tail);
                    if (!sv.ok) {
                        fails[i].push_back({i, k, "Fourier truncation above tolerance"});
                        ok[i] = 0;
                        return;
                    }
                    if (!call) {
                        sv.value = sv.value - s + k_strike;
                        sv.delta -= 1.0;
                    }
                    if (k == 0) portfolio = sv.value;
                    if (keep) {
                        r.spot.push_back(s);
                        r.variance.push_back(ps.v(i, k));
                        r.delta.push_back(sv.delta);
                        r.option_value.push_back(sv.value);
                        r.portfolio_value.push_back(portfolio);
                    }
                    const double vol = p.nu * std::sqrt(ps.v(i, k)) * ps.dB(i, k);
                    portfolio += sv.delta * (ps.s(i, k + 1) - s) + sv.fv * vol;
                    h.advance(k, vol);
                }
            }
            const double st = ps.s(i, n);
            const double payoff = call ? std::max(st - k_strike, 0.0) : std::max(k_strike - st, 0.0);
            if (keep) {
                r.spot.push_back(st);
                r.variance.push_back(ps.v(i, n));
                r.delta.push_back(call ? (st > k_strike ? 1.0 : 0.0) : (st < k_strike ? -1.0 : 0.0));
                r.option_value.push_back(payoff);
                r.portfolio_value.push_back(portfolio);
            }
            r.pnl = portfolio - payoff;
        } catch (const std::exception& ex) {
            fails[i].push_back({i, 0, ex.what()});
            ok[i] = 0;
        }
    });

    HedgeReport rep;
    rep.times = grid;
    rep.n_paths = n_paths;
    rep.damping_used = linear ? 0.0 : engine.a;
    const PathResult& r0 = results[0];
    rep.spot = r0.spot;
    rep.variance = r0.variance;
    rep.delta = r0.delta;
    rep.option_value = r0.option_value;
    rep.portfolio_value = r0.portfolio_value;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        rep.max_tail = std::max(rep.max_tail, results[i].max_tail);
        for (auto& f : fails[i]) rep.failures.push_back(f);
        rep.pnl.push_back(ok[i] ? results[i].pnl : std::numeric_limits<double>::quiet_NaN());
        if (!ok[i]) continue;
        ++rep.n_completed;
        sum += results[i].pnl;
    }
    rep.partial = rep.n_completed < n_paths;
    if (rep.n_completed > 0) {
        rep.pnl_terminal = sum / rep.n_completed;
        for (std::size_t i = 0; i < n_paths; ++i)
            if (ok[i]) sum2 += (results[i].pnl - rep.pnl_terminal) * (results[i].pnl - rep.pnl_terminal);
        rep.pnl_std_across_paths = rep.n_completed > 1 ? std::sqrt(sum2 / (rep.n_completed - 1)) : 0.0;
        rep.pnl_stderr = rep.pnl_std_across_paths / std::sqrt(double(rep.n_completed));
    }
    if (!r0.option_value.empty()) rep.initial_price = r0.option_value.front();
    return rep;
}

}  // namespace rh
