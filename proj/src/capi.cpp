#include "roughhedge/roughhedge.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "json.hpp"
#include "roughhedge/checks.hpp"
#include "roughhedge/error.hpp"
#include "roughhedge/hedging.hpp"
#include "roughhedge/io.hpp"
#include "roughhedge/model.hpp"
#include "roughhedge/parallel.hpp"
#include "roughhedge/pricing.hpp"
#include "roughhedge/riccati.hpp"
#include "roughhedge/simulate.hpp"

struct rh_curve {
    rh_curve_kind kind;
    rh::RealGridFn fn;
};

struct rh_price_table {
    std::vector<rh::PriceRow> rows;
};

struct rh_hedge_report {
    rh::HedgeReport r;
};

struct rh_paths {
    rh::PathSet ps;
    rh::RoughHestonParams p;
};

struct rh_hawkes {
    rh::HawkesConfig c;
    std::vector<rh::HawkesPath> paths;
};

struct rh_report {
    std::vector<rh::CheckResult> r;
};

namespace {

using nlohmann::json;

thread_local std::string last_error, last_error_json = "null";

struct ArgumentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const char* kind_name(rh_status s) {
    switch (s) {
        case RH_OK: return "ok";
        case RH_ERR_DOMAIN: return "domain";
        case RH_ERR_NUMERICAL: return "numerical";
        case RH_ERR_VALIDATION: return "validation";
        case RH_ERR_ACCURACY: return "accuracy";
        case RH_ERR_IO: return "io";
        case RH_ERR_ARGUMENT: return "argument";
        case RH_ERR_INTERNAL: return "internal";
    }
    return "internal";
}

rh_status fail(rh_status s, const std::string& msg, json extra = json::object()) {
    last_error = msg;
    json j = {{"status", int(s)}, {"kind", kind_name(s)}, {"message", msg}};
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    last_error_json = j.dump();
    return s;
}

template <class F>
rh_status guard(F f) {
    try {
        f();
        return RH_OK;
    } catch (const rh::ValidationError& e) {
        return fail(RH_ERR_VALIDATION, e.what(), {{"nodes", e.nodes()}});
    } catch (const rh::AccuracyError& e) {
        return fail(RH_ERR_ACCURACY, e.what(), {{"tail_bound", e.tail_bound()}});
    } catch (const rh::Error& e) {
        return fail(rh_status(int(e.kind())), e.what());
    } catch (const json::exception& e) {
        return fail(RH_ERR_VALIDATION, std::string("malformed JSON: ") + e.what(), {{"nodes", json::array()}});
    } catch (const ArgumentError& e) {
        return fail(RH_ERR_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(RH_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(RH_ERR_INTERNAL, e.what());
    }
}

template <class T>
void need(const T* p, const char* what) {
    if (!p) throw ArgumentError(std::string("null argument: ") + what);
}

char* dup(const std::string& s) {
    char* c = static_cast<char*>(std::malloc(s.size() + 1));
    if (!c) throw std::bad_alloc();
    std::memcpy(c, s.c_str(), s.size() + 1);
    return c;
}

rh::RoughHestonParams params(const rh_params* p) {
    need(p, "params");
    rh::RoughHestonParams q{p->alpha, p->lambda, p->nu, p->rho, p->v0, p->s0};
    rh::validate_params(q);
    return q;
}

rh::QuadratureConfig quad(const rh_quad* q) {
    rh::QuadratureConfig c;
    if (!q) return c;
    c.damping = q->damping;
    c.b_max = q->b_max;
    c.n_nodes = q->n_nodes;
    c.rule = q->adaptive ? rh::QuadRule::adaptive : rh::QuadRule::gauss_panels;
    c.n_time = q->n_time;
    c.tol = q->tol;
    c.max_tail = q->max_tail;
    c.b_limit = q->b_limit;
    return c;
}

rh::OptionKind option(rh_option_kind k) { return k == RH_PUT ? rh::OptionKind::put : rh::OptionKind::call; }

rh::OutputHeader header(const char* config_json) { return {config_json ? config_json : ""}; }

rh::MeanReversionCurve theta_of(const rh::RoughHestonParams& p, const rh_curve* c) {
    need(c, "curve");
    if (c->kind == RH_CURVE_THETA) return {c->fn};
    const rh::ForwardVarianceCurve xi{c->fn};
    rh::validate_xi(p, xi);
    return rh::theta_from_forward_variance(p, xi);
}

rh::ForwardVarianceCurve xi_of(const rh::RoughHestonParams& p, const rh_curve* c, double horizon, std::size_t n) {
    need(c, "curve");
    if (c->kind == RH_CURVE_XI) return {c->fn};
    return rh::forward_variance_from_theta(p, {c->fn}, rh::riccati_grid(horizon, n, p.alpha));
}

template <class T>
void put(T** out, T* v) {
    need(out, "out");
    *out = v;
}

}  // namespace

extern "C" {

const char* rh_version(void) { return rh::library_version(); }
const char* rh_last_error(void) { return last_error.c_str(); }
const char* rh_last_error_json(void) { return last_error_json.c_str(); }

rh_status rh_set_threads(size_t n) {
    if (n == 0) return fail(RH_ERR_ARGUMENT, "thread count must be positive");
    rh::set_thread_count(n);
    return RH_OK;
}

size_t rh_get_threads(void) { return rh::thread_count(); }

void rh_string_free(char* s) { std::free(s); }

void rh_params_default(rh_params* p) {
    if (!p) return;
    const rh::RoughHestonParams d;
    *p = {d.alpha, d.lambda, d.nu, d.rho, d.v0, d.s0};
}

rh_status rh_params_validate(const rh_params* p) {
    return guard([&] { params(p); });
}

void rh_quad_default(rh_quad* q) {
    if (!q) return;
    const rh::QuadratureConfig d;
    *q = {d.damping, d.b_max, d.n_nodes, d.rule == rh::QuadRule::adaptive, d.n_time, d.tol, d.max_tail, d.b_limit};
}

rh_status rh_curve_create(rh_curve_kind kind, const double* grid, const double* values, size_t n, rh_curve** out) {
    return guard([&] {
        need(grid, "grid");
        need(values, "values");
        need(out, "out");
        const rh::CurveFile f{kind == RH_CURVE_XI ? "xi" : "theta", {grid, grid + n}, {values, values + n}};
        rh::validate_curve_file(f);
        *out = new rh_curve{kind, rh::curve_function(f)};
    });
}

rh_status rh_curve_parse_json(const char* text, rh_curve** out) {
    return guard([&] {
        need(text, "text");
        need(out, "out");
        const rh::CurveFile f = rh::parse_curve_json(text);
        *out = new rh_curve{f.kind == "xi" ? RH_CURVE_XI : RH_CURVE_THETA, rh::curve_function(f)};
    });
}

void rh_curve_free(rh_curve* c) { delete c; }
rh_curve_kind rh_curve_get_kind(const rh_curve* c) { return c ? c->kind : RH_CURVE_THETA; }
size_t rh_curve_size(const rh_curve* c) { return c ? c->fn.size() : 0; }

rh_status rh_curve_get(const rh_curve* c, double* grid, double* values) {
    return guard([&] {
        need(c, "curve");
        for (std::size_t i = 0; i < c->fn.size(); ++i) {
            if (grid) grid[i] = c->fn.grid[i];
            if (values) values[i] = c->fn[i];
        }
    });
}

rh_status rh_curve_validate(const rh_params* p, const rh_curve* c) {
    return guard([&] {
        const rh::RoughHestonParams q = params(p);
        need(c, "curve");
        if (c->kind == RH_CURVE_THETA) rh::validate_theta(q, {c->fn});
        else rh::validate_xi(q, {c->fn});
    });
}

rh_status rh_curve_theta_to_xi(const rh_params* p, const rh_curve* theta, double horizon, size_t n, rh_curve** xi) {
    return guard([&] {
        const rh::RoughHestonParams q = params(p);
        need(theta, "theta");
        if (theta->kind != RH_CURVE_THETA) throw ArgumentError("curve is not a theta curve");
        if (!(horizon > 0.0) || n == 0) throw rh::DomainError("horizon and node count must be positive");
        put(xi, new rh_curve{RH_CURVE_XI,
                             rh::forward_variance_from_theta(q, {theta->fn}, rh::TimeGrid::uniform(horizon, n)).xi});
    });
}

rh_status rh_curve_xi_to_theta(const rh_params* p, const rh_curve* xi, rh_curve** theta) {
    return guard([&] {
        const rh::RoughHestonParams q = params(p);
        need(xi, "xi");
        if (xi->kind != RH_CURVE_XI) throw ArgumentError("curve is not a forward-variance curve");
        rh::validate_xi(q, {xi->fn});
        put(theta, new rh_curve{RH_CURVE_THETA, rh::theta_from_forward_variance(q, {xi->fn}).theta});
    });
}

rh_status rh_curve_to_json(const rh_curve* c, const char* config_json, char** out) {
    return guard([&] {
        need(c, "curve");
        need(out, "out");
        const auto g = c->fn.grid.nodes();
        *out = dup(rh::curve_json({c->kind == RH_CURVE_XI ? "xi" : "theta", {g.begin(), g.end()}, c->fn.values},
                                  header(config_json)));
    });
}

rh_status rh_price_surface(const rh_params* p, const rh_curve* curve, const double* strikes, size_t n_strikes,
                           const double* maturities, size_t n_maturities, rh_option_kind kind, const rh_quad* q,
                           rh_price_table** out) {
    return guard([&] {
        const rh::RoughHestonParams pp = params(p);
        need(strikes, "strikes");
        need(maturities, "maturities");
        need(out, "out");
        if (n_strikes == 0 || n_maturities == 0) throw ArgumentError("empty strike or maturity list");
        const rh::QuadratureConfig qc = quad(q);
        const double t_max = *std::max_element(maturities, maturities + n_maturities);
        if (!(t_max > 0.0)) throw rh::DomainError("maturities must be positive");
        const rh::ForwardVarianceCurve xi = xi_of(pp, curve, t_max, qc.n_time);
        const auto cells = rh::price_surface(pp, xi, {strikes, n_strikes}, {maturities, n_maturities}, qc,
                                             option(kind));
        auto t = new rh_price_table;
        for (std::size_t i = 0; i < n_maturities; ++i)
            for (std::size_t j = 0; j < n_strikes; ++j) t->rows.push_back({strikes[j], maturities[i], cells[i][j]});
        *out = t;
    });
}

void rh_price_table_free(rh_price_table* t) { delete t; }
size_t rh_price_table_rows(const rh_price_table* t) { return t ? t->rows.size() : 0; }

rh_status rh_price_table_get(const rh_price_table* t, size_t i, double* strike, double* maturity, double* price,
                             double* damping_used, double* tail_bound, rh_status* cell_status) {
    return guard([&] {
        need(t, "table");
        if (i >= t->rows.size()) throw ArgumentError("row index out of range");
        const rh::PriceRow& r = t->rows[i];
        const double nan = std::nan("");
        if (strike) *strike = r.strike;
        if (maturity) *maturity = r.maturity;
        if (price) *price = r.cell.ok ? r.cell.result.price : nan;
        if (damping_used) *damping_used = r.cell.ok ? r.cell.result.damping_used : nan;
        if (tail_bound) *tail_bound = r.cell.ok ? r.cell.result.tail_bound : nan;
        if (cell_status) *cell_status = r.cell.ok ? RH_OK : rh_status(int(r.cell.error_kind));
    });
}

rh_status rh_price_table_csv(const rh_price_table* t, const char* config_json, char** out) {
    return guard([&] {
        need(t, "table");
        need(out, "out");
        *out = dup(rh::price_csv(t->rows, header(config_json)));
    });
}

rh_status rh_hedge_ratios(const rh_params* p, const rh_curve* curve, double strike, double maturity,
                          rh_option_kind kind, const rh_quad* q, double spot, double* price, double* delta) {
    return guard([&] {
        const rh::RoughHestonParams pp = params(p);
        const rh::QuadratureConfig qc = quad(q);
        if (!(maturity > 0.0)) throw rh::DomainError("maturity must be positive");
        const rh::HedgeRatios r =
            rh::hedge_ratios(pp, xi_of(pp, curve, maturity, qc.n_time), {strike, maturity, rh::OptionKind::call}, qc,
                             spot);
        // Put by parity.
        const bool is_put = kind == RH_PUT;
        if (price) *price = is_put ? r.price - spot + strike : r.price;
        if (delta) *delta = is_put ? r.delta - 1.0 : r.delta;
    });
}

rh_status rh_replicate(const rh_params* p, const rh_curve* curve, double strike, double maturity,
                       rh_option_kind kind, const rh_quad* q, size_t n_steps, size_t n_paths, uint64_t seed,
                       rh_hedge_report** out) {
    return guard([&] {
        const rh::RoughHestonParams pp = params(p);
        need(out, "out");
        const rh::MeanReversionCurve th = theta_of(pp, curve);
        *out = new rh_hedge_report{
            rh::replicate(pp, th, {strike, maturity, option(kind)}, quad(q), n_steps, n_paths, seed)};
    });
}

void rh_hedge_report_free(rh_hedge_report* r) { delete r; }

rh_status rh_hedge_report_summary(const rh_hedge_report* r, rh_hedge_summary* s) {
    return guard([&] {
        need(r, "report");
        need(s, "summary");
        const rh::HedgeReport& h = r->r;
        *s = {h.initial_price, h.damping_used,  h.pnl_terminal,       h.pnl_std_across_paths,
              h.pnl_stderr,    h.max_tail,      h.spot.size() - 1,    h.n_paths,
              h.n_completed,   int(h.partial)};
    });
}

rh_status rh_hedge_report_pnl(const rh_hedge_report* r, double* pnl) {
    return guard([&] {
        need(r, "report");
        need(pnl, "pnl");
        std::copy(r->r.pnl.begin(), r->r.pnl.end(), pnl);
    });
}

rh_status rh_hedge_report_csv(const rh_hedge_report* r, const char* config_json, char** out) {
    return guard([&] {
        need(r, "report");
        need(out, "out");
        *out = dup(rh::hedge_csv(r->r, header(config_json)));
    });
}

rh_status rh_hedge_report_summary_json(const rh_hedge_report* r, const char* config_json, char** out) {
    return guard([&] {
        need(r, "report");
        need(out, "out");
        *out = dup(rh::hedge_summary_json(r->r, header(config_json)));
    });
}

rh_status rh_simulate(const rh_params* p, const rh_curve* curve, double horizon, size_t n_steps, size_t n_paths,
                      uint64_t seed, rh_paths** out) {
    return guard([&] {
        const rh::RoughHestonParams pp = params(p);
        need(out, "out");
        if (!(horizon > 0.0) || n_steps == 0) throw rh::DomainError("horizon and step count must be positive");
        const rh::MeanReversionCurve th = theta_of(pp, curve);
        *out = new rh_paths{rh::simulate_rough_heston(pp, th, rh::TimeGrid::uniform(horizon, n_steps), n_paths, seed),
                            pp};
    });
}

void rh_paths_free(rh_paths* ps) { delete ps; }
size_t rh_paths_count(const rh_paths* ps) { return ps ? ps->ps.n_paths : 0; }
size_t rh_paths_nodes(const rh_paths* ps) { return ps ? ps->ps.n_nodes() : 0; }

rh_status rh_paths_get(const rh_paths* ps, size_t path, size_t node, double* s, double* v) {
    return guard([&] {
        need(ps, "paths");
        if (path >= ps->ps.n_paths || node >= ps->ps.n_nodes()) throw ArgumentError("path or node out of range");
        if (s) *s = ps->ps.s(path, node);
        if (v) *v = ps->ps.v(path, node);
    });
}

rh_status rh_paths_csv(const rh_paths* ps, const char* config_json, char** out) {
    return guard([&] {
        need(ps, "paths");
        need(out, "out");
        *out = dup(rh::paths_csv(ps->ps, ps->p, header(config_json)));
    });
}

void rh_hawkes_config_default(rh_hawkes_config* c) {
    if (!c) return;
    const rh::HawkesConfig d;
    *c = {d.t_scale, d.t_max, d.grid.size() - 1};
}

rh_status rh_simulate_hawkes(const rh_params* p, const rh_curve* theta, const rh_hawkes_config* c, size_t n_paths,
                             uint64_t seed, rh_hawkes** out) {
    return guard([&] {
        const rh::RoughHestonParams pp = params(p);
        need(c, "config");
        need(out, "out");
        if (c->n_grid == 0 || !(c->t_max > 0.0)) throw rh::DomainError("Hawkes grid must be nonempty");
        auto h = std::make_unique<rh_hawkes>();
        h->c.t_scale = c->t_scale;
        h->c.t_max = c->t_max;
        h->c.params = pp;
        h->c.theta0 = theta_of(pp, theta);
        h->c.grid = rh::TimeGrid::uniform(c->t_max, c->n_grid);
        rh::validate_hawkes(h->c);
        h->paths.resize(n_paths);
        rh::parallel_for(n_paths, [&](std::size_t i) {
            h->paths[i] = rh::simulate_hawkes(h->c, seed, i);
        });
        *out = h.release();
    });
}

void rh_hawkes_free(rh_hawkes* h) { delete h; }
size_t rh_hawkes_count(const rh_hawkes* h) { return h ? h->paths.size() : 0; }
size_t rh_hawkes_events(const rh_hawkes* h, size_t path) {
    return h && path < h->paths.size() ? h->paths[path].events.size() : 0;
}

rh_status rh_hawkes_events_csv(const rh_hawkes* h, const char* config_json, char** out) {
    return guard([&] {
        need(h, "hawkes");
        need(out, "out");
        *out = dup(rh::hawkes_events_csv(h->paths, h->c, header(config_json)));
    });
}

rh_status rh_hawkes_processes_csv(const rh_hawkes* h, const char* config_json, char** out) {
    return guard([&] {
        need(h, "hawkes");
        need(out, "out");
        *out = dup(rh::hawkes_processes_csv(h->paths, header(config_json)));
    });
}

rh_status rh_run_checks(int full, uint64_t seed, rh_report** out) {
    return guard([&] {
        need(out, "out");
        rh::CheckOptions o;
        o.scale = full ? rh::CheckScale::full : rh::CheckScale::quick;
        o.seed = seed;
        *out = new rh_report{rh::run_checks(o)};
    });
}

void rh_report_free(rh_report* r) { delete r; }
size_t rh_report_size(const rh_report* r) { return r ? r->r.size() : 0; }

rh_status rh_report_get(const rh_report* r, size_t i, int* passed, const char** name, const char** detail,
                        double* seconds) {
    return guard([&] {
        need(r, "report");
        if (i >= r->r.size()) throw ArgumentError("check index out of range");
        const rh::CheckResult& c = r->r[i];
        if (passed) *passed = c.passed;
        if (name) *name = c.name.c_str();
        if (detail) *detail = c.detail.c_str();
        if (seconds) *seconds = c.seconds;
    });
}

int rh_report_passed(const rh_report* r) {
    return r && std::all_of(r->r.begin(), r->r.end(), [](const rh::CheckResult& c) { return c.passed; });
}

rh_status rh_report_json(const rh_report* r, const char* config_json, char** out) {
    return guard([&] {
        need(r, "report");
        need(out, "out");
        *out = dup(rh::checks_json(r->r, header(config_json)));
    });
}

}  // extern "C"
