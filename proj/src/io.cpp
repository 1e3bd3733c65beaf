#include "roughhedge/io.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"

#ifndef RH_VERSION
#define RH_VERSION "0.0.0"
#endif

namespace rh {
namespace {

using nlohmann::json;

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json config_value(const OutputHeader& h) { return h.config.empty() ? json() : json::parse(h.config); }

std::string csv_preamble(const OutputHeader& h) {
    return std::string("# roughhedge ") + RH_VERSION + "\n# config " + config_value(h).dump() + "\n";
}

json stamped(const OutputHeader& h) {
    json j;
    j["roughhedge_version"] = RH_VERSION;
    j["config"] = config_value(h);
    return j;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(); }

}  // namespace

const char* library_version() { return RH_VERSION; }

std::string curve_json(const CurveFile& c, const OutputHeader& h) {
    json j = stamped(h);
    j["kind"] = c.kind;
    j["grid"] = c.grid;
    j["values"] = c.values;
    return j.dump(1) + "\n";
}

std::string price_csv(const std::vector<PriceRow>& rows, const OutputHeader& h) {
    std::string s = csv_preamble(h) + "strike,maturity,price,damping_used,tail_bound,error\n";
    for (const PriceRow& r : rows) {
        const double nan = std::nan("");
        const PriceResult& p = r.cell.result;
        s += num(r.strike) + "," + num(r.maturity) + "," + num(r.cell.ok ? p.price : nan) + "," +
             num(r.cell.ok ? p.damping_used : nan) + "," + num(r.cell.ok ? p.tail_bound : nan) + ",";
        if (!r.cell.ok) s += json(r.cell.error).dump();
        s += "\n";
    }
    return s;
}

std::string hedge_csv(const HedgeReport& r, const OutputHeader& h) {
    std::string s = csv_preamble(h) + "step,time,S,V,delta,option_value,portfolio_value\n";
    for (std::size_t k = 0; k < r.spot.size(); ++k)
        s += std::to_string(k) + "," + num(r.times[k]) + "," + num(r.spot[k]) + "," + num(r.variance[k]) + "," +
             num(r.delta[k]) + "," + num(r.option_value[k]) + "," + num(r.portfolio_value[k]) + "\n";
    return s;
}

std::string hedge_summary_json(const HedgeReport& r, const OutputHeader& h) {
    json j = stamped(h);
    j["initial_price"] = r.initial_price;
    j["damping_used"] = r.damping_used;
    j["pnl_terminal"] = finite_or_null(r.pnl_terminal);
    j["pnl_std_across_paths"] = finite_or_null(r.pnl_std_across_paths);
    j["pnl_stderr"] = finite_or_null(r.pnl_stderr);
    j["n_steps"] = r.spot.empty() ? 0 : r.spot.size() - 1;
    j["n_paths"] = r.n_paths;
    j["n_completed"] = r.n_completed;
    j["partial"] = r.partial;
    j["max_tail"] = r.max_tail;
    json f = json::array();
    for (const HedgeFailure& e : r.failures) f.push_back({{"path", e.path}, {"step", e.step}, {"message", e.message}});
    j["failures"] = f;
    return j.dump(1) + "\n";
}

std::string paths_csv(const PathSet& ps, const RoughHestonParams& p, const OutputHeader& h) {
    std::string s = csv_preamble(h);
    s += "# params alpha=" + num(p.alpha) + " lambda=" + num(p.lambda) + " nu=" + num(p.nu) + " rho=" + num(p.rho) +
         " v0=" + num(p.v0) + " s0=" + num(p.s0) + "\n";
    s += "# seed " + std::to_string(ps.seed) + "\n# scheme " + ps.scheme + "\n";
    s += "path,series";
    for (std::size_t k = 0; k < ps.n_nodes(); ++k) s += "," + num(ps.grid[k]);
    s += "\n";
    for (std::size_t i = 0; i < ps.n_paths; ++i) {
        const std::string id = std::to_string(i);
        std::string row_s = id + ",S", row_v = id + ",V", row_x = id + ",V_state";
        for (std::size_t k = 0; k < ps.n_nodes(); ++k) {
            row_s += "," + num(ps.s(i, k));
            row_v += "," + num(ps.v(i, k));
            row_x += "," + num(ps.state(i, k));
        }
        s += row_s + "\n" + row_v + "\n" + row_x + "\n";
    }
    return s;
}

std::string hawkes_events_csv(const std::vector<HawkesPath>& paths, const HawkesConfig& c, const OutputHeader& h) {
    std::string s = csv_preamble(h) + "path,index,time,rescaled_time\n";
    for (std::size_t i = 0; i < paths.size(); ++i)
        for (std::size_t k = 0; k < paths[i].events.size(); ++k)
            s += std::to_string(i) + "," + std::to_string(k) + "," + num(paths[i].events[k]) + "," +
                 num(paths[i].events[k] / c.t_scale) + "\n";
    return s;
}

std::string hawkes_processes_csv(const std::vector<HawkesPath>& paths, const OutputHeader& h) {
    std::string s = csv_preamble(h) + "path,t,X,Lambda,Z\n";
    for (std::size_t i = 0; i < paths.size(); ++i)
        for (std::size_t k = 0; k < paths[i].grid.size(); ++k)
            s += std::to_string(i) + "," + num(paths[i].grid[k]) + "," + num(paths[i].x[k]) + "," +
                 num(paths[i].lambda_int[k]) + "," + num(paths[i].z[k]) + "\n";
    return s;
}

std::string checks_json(const std::vector<CheckResult>& r, const OutputHeader& h) {
    json j = stamped(h), a = json::array();
    bool all = true;
    for (const CheckResult& c : r) {
        all = all && c.passed;
        a.push_back({{"id", c.id},
                     {"name", c.name},
                     {"passed", c.passed},
                     {"detail", c.detail},
                     {"within_budget", c.within_budget}});
    }
    j["checks"] = a;
    j["passed"] = all;
    return j.dump(1) + "\n";
}

}  // namespace rh
