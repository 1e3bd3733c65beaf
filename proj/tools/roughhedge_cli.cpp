#include <roughhedge/roughhedge.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

using nlohmann::json;

namespace {

enum Exit { ok = 0, usage = 1, validation = 2, numerical = 3 };

// Malformed or inconsistent run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// A library call failed; the error JSON is already recorded.
struct LibraryError {
    rh_status status;
};

void check(rh_status s) {
    if (s != RH_OK) throw LibraryError{s};
}

template <class T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    ~Handle() { Free(p); }
    T** out() { return &p; }
    operator T*() const { return p; }
};

using Curve = Handle<rh_curve, rh_curve_free>;

std::string take(char* s) {
    std::string out(s);
    rh_string_free(s);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f || !f.write(text.data(), std::streamsize(text.size()))) throw UsageError("cannot write " + path);
}

// "dir/name.csv" -> "dir/name<suffix>".
std::string sibling(const std::string& path, const std::string& suffix) {
    const std::size_t slash = path.find_last_of('/'), dot = path.find_last_of('.');
    const std::string stem = (dot != std::string::npos && (slash == std::string::npos || dot > slash))
                                 ? path.substr(0, dot)
                                 : path;
    return stem + suffix;
}

// Typed lookup with a default; the resolved value is written back so that the
// echoed configuration is complete.
class Section {
public:
    Section(json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw ConfigError("\"" + name_ + "\" must be an object");
    }
    template <class T>
    T get(const std::string& key, T fallback) {
        if (!j_.contains(key)) {
            j_[key] = fallback;
            return fallback;
        }
        try {
            return j_[key].get<T>();
        } catch (const json::exception&) {
            throw ConfigError("\"" + name_ + "." + key + "\" has the wrong type");
        }
    }
    void only(std::initializer_list<const char*> keys) {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            bool known = false;
            for (const char* k : keys) known = known || it.key() == k;
            if (!known) throw ConfigError("unknown key \"" + name_ + "." + it.key() + "\"");
        }
    }

private:
    json& j_;
    std::string name_;
};

json& section(json& root, const char* key) {
    if (!root.contains(key)) root[key] = json::object();
    return root[key];
}

struct Run {
    json config;  // resolved; echoed into every output
    std::string command, out;
    rh_params params{};
    Curve curve;
    std::uint64_t seed = 0;
};

rh_params read_params(json& root) {
    rh_params p;
    rh_params_default(&p);
    Section s(section(root, "params"), "params");
    s.only({"alpha", "lambda", "nu", "rho", "v0", "s0"});
    p.alpha = s.get("alpha", p.alpha);
    p.lambda = s.get("lambda", p.lambda);
    p.nu = s.get("nu", p.nu);
    p.rho = s.get("rho", p.rho);
    p.v0 = s.get("v0", p.v0);
    p.s0 = s.get("s0", p.s0);
    return p;
}

rh_quad read_quad(json& options) {
    rh_quad q;
    rh_quad_default(&q);
    Section s(section(options, "quadrature"), "options.quadrature");
    s.only({"damping", "b_max", "n_nodes", "adaptive", "n_time", "tol", "max_tail", "b_limit"});
    q.damping = s.get("damping", q.damping);
    q.b_max = s.get("b_max", q.b_max);
    q.n_nodes = s.get("n_nodes", q.n_nodes);
    q.adaptive = s.get("adaptive", bool(q.adaptive));
    q.n_time = s.get("n_time", q.n_time);
    q.tol = s.get("tol", q.tol);
    q.max_tail = s.get("max_tail", q.max_tail);
    q.b_limit = s.get("b_limit", q.b_limit);
    return q;
}

// "curve": a file path, an inline curve object, or absent (flat theta0 = V0).
// The resolved curve is echoed inline.
void read_curve(Run& r) {
    json& c = r.config["curve"];
    std::string text;
    if (c.is_null()) {
        c = {{"kind", "theta"}, {"grid", {0.0}}, {"values", {r.params.v0}}};
        text = c.dump();
    } else if (c.is_string()) {
        const std::string path = c.get<std::string>();
        text = read_file(path);
        check(rh_curve_parse_json(text.c_str(), r.curve.out()));
        const size_t n = rh_curve_size(r.curve);
        std::vector<double> g(n), v(n);
        check(rh_curve_get(r.curve, g.data(), v.data()));
        c = {{"source", path},
             {"kind", rh_curve_get_kind(r.curve) == RH_CURVE_XI ? "xi" : "theta"},
             {"grid", g},
             {"values", v}};
        return;
    } else if (c.is_object()) {
        text = c.dump();
    } else {
        throw ConfigError("\"curve\" must be a path or a curve object");
    }
    check(rh_curve_parse_json(text.c_str(), r.curve.out()));
}

const char* status_kind(rh_status s) {
    switch (s) {
        case RH_ERR_DOMAIN: return "domain";
        case RH_ERR_NUMERICAL: return "numerical";
        case RH_ERR_VALIDATION: return "validation";
        case RH_ERR_ACCURACY: return "accuracy";
        default: return "internal";
    }
}

rh_option_kind read_kind(Section& s) {
    const std::string k = s.get<std::string>("kind", "call");
    if (k != "call" && k != "put") throw ConfigError("\"options.kind\" must be \"call\" or \"put\"");
    return k == "put" ? RH_PUT : RH_CALL;
}

std::string echo(const Run& r) { return r.config.dump(); }

int cmd_price(Run& r) {
    json& o = section(r.config, "options");
    Section s(o, "options");
    s.only({"strikes", "maturities", "kind", "quadrature"});
    const std::vector<double> strikes = s.get<std::vector<double>>("strikes", {1.0});
    const std::vector<double> maturities = s.get<std::vector<double>>("maturities", {1.0});
    const rh_option_kind kind = read_kind(s);
    const rh_quad q = read_quad(o);
    Handle<rh_price_table, rh_price_table_free> t;
    check(rh_price_surface(&r.params, r.curve, strikes.data(), strikes.size(), maturities.data(), maturities.size(),
                           kind, &q, t.out()));
    char* csv = nullptr;
    check(rh_price_table_csv(t, echo(r).c_str(), &csv));
    write_file(r.out, take(csv));
    json failed = json::array();
    rh_status worst = RH_OK;
    for (size_t i = 0; i < rh_price_table_rows(t); ++i) {
        double k, m;
        rh_status st;
        check(rh_price_table_get(t, i, &k, &m, nullptr, nullptr, nullptr, &st));
        if (st != RH_OK) {
            failed.push_back({{"strike", k}, {"maturity", m}, {"kind", status_kind(st)}});
            if (worst == RH_OK || st == RH_ERR_DOMAIN || st == RH_ERR_VALIDATION) worst = st;
        }
    }
    if (failed.empty()) return ok;
    std::cerr << json{{"status", int(worst)}, {"message", "some cells failed"}, {"cells", failed}}.dump() << "\n";
    return worst == RH_ERR_DOMAIN || worst == RH_ERR_VALIDATION ? validation : numerical;
}

int cmd_hedge(Run& r) {
    if (r.out.empty() || r.out == "-") throw UsageError("hedge needs an output path (--out or \"out\")");
    json& o = section(r.config, "options");
    Section s(o, "options");
    s.only({"strike", "maturity", "kind", "n_steps", "n_paths", "quadrature"});
    const double strike = s.get("strike", 1.0), maturity = s.get("maturity", 1.0);
    const rh_option_kind kind = read_kind(s);
    const size_t n_steps = s.get<size_t>("n_steps", 64), n_paths = s.get<size_t>("n_paths", 100);
    const rh_quad q = read_quad(o);
    Handle<rh_hedge_report, rh_hedge_report_free> h;
    check(rh_replicate(&r.params, r.curve, strike, maturity, kind, &q, n_steps, n_paths, r.seed, h.out()));
    char *csv = nullptr, *summary = nullptr;
    check(rh_hedge_report_csv(h, echo(r).c_str(), &csv));
    write_file(r.out, take(csv));
    check(rh_hedge_report_summary_json(h, echo(r).c_str(), &summary));
    write_file(sibling(r.out, "_summary.json"), take(summary));
    rh_hedge_summary sum;
    check(rh_hedge_report_summary(h, &sum));
    if (!sum.partial) return ok;
    std::cerr << json{{"status", int(RH_ERR_NUMERICAL)},
                      {"message", "some paths failed; see the summary"},
                      {"n_completed", sum.n_completed},
                      {"n_paths", sum.n_paths}}
                     .dump()
              << "\n";
    return numerical;
}

int cmd_curve(Run& r) {
    json& o = section(r.config, "options");
    Section s(o, "options");
    s.only({"direction", "horizon", "n"});
    const bool is_xi = rh_curve_get_kind(r.curve) == RH_CURVE_XI;
    const std::string dir = s.get<std::string>("direction", is_xi ? "xi_to_theta" : "theta_to_xi");
    const double horizon = s.get("horizon", 1.0);
    const size_t n = s.get<size_t>("n", 256);
    Curve out;
    if (dir == "theta_to_xi") {
        if (is_xi) throw ConfigError("theta_to_xi needs a theta curve");
        check(rh_curve_validate(&r.params, r.curve));
        check(rh_curve_theta_to_xi(&r.params, r.curve, horizon, n, out.out()));
    } else if (dir == "xi_to_theta") {
        if (!is_xi) throw ConfigError("xi_to_theta needs an xi curve");
        check(rh_curve_xi_to_theta(&r.params, r.curve, out.out()));
    } else {
        throw ConfigError("\"options.direction\" must be \"theta_to_xi\" or \"xi_to_theta\"");
    }
    char* text = nullptr;
    check(rh_curve_to_json(out, echo(r).c_str(), &text));
    write_file(r.out, take(text));
    return ok;
}

int cmd_simulate(Run& r) {
    json& o = section(r.config, "options");
    Section s(o, "options");
    const std::string model = s.get<std::string>("model", "rough_heston");
    if (model == "rough_heston") {
        s.only({"model", "horizon", "n_steps", "n_paths"});
        const double horizon = s.get("horizon", 1.0);
        const size_t n_steps = s.get<size_t>("n_steps", 100), n_paths = s.get<size_t>("n_paths", 10);
        Handle<rh_paths, rh_paths_free> ps;
        check(rh_simulate(&r.params, r.curve, horizon, n_steps, n_paths, r.seed, ps.out()));
        char* csv = nullptr;
        check(rh_paths_csv(ps, echo(r).c_str(), &csv));
        write_file(r.out, take(csv));
        return ok;
    }
    if (model != "hawkes") throw ConfigError("\"options.model\" must be \"rough_heston\" or \"hawkes\"");
    if (r.out.empty() || r.out == "-") throw UsageError("hawkes simulation needs an output path");
    s.only({"model", "t_scale", "t_max", "n_grid", "n_paths"});
    rh_hawkes_config c;
    rh_hawkes_config_default(&c);
    c.t_scale = s.get("t_scale", c.t_scale);
    c.t_max = s.get("t_max", c.t_max);
    c.n_grid = s.get("n_grid", c.n_grid);
    const size_t n_paths = s.get<size_t>("n_paths", 1);
    Handle<rh_hawkes, rh_hawkes_free> h;
    check(rh_simulate_hawkes(&r.params, r.curve, &c, n_paths, r.seed, h.out()));
    char *events = nullptr, *procs = nullptr;
    check(rh_hawkes_events_csv(h, echo(r).c_str(), &events));
    write_file(r.out, take(events));
    check(rh_hawkes_processes_csv(h, echo(r).c_str(), &procs));
    write_file(sibling(r.out, "_processes.csv"), take(procs));
    return ok;
}

int cmd_validate(Run& r) {
    json& o = section(r.config, "options");
    Section s(o, "options");
    s.only({"suite"});
    const std::string suite = s.get<std::string>("suite", "none");
    if (suite != "none" && suite != "quick" && suite != "full")
        throw ConfigError("\"options.suite\" must be \"none\", \"quick\" or \"full\"");
    check(rh_curve_validate(&r.params, r.curve));
    if (suite == "none") {
        const json j = {{"roughhedge_version", rh_version()}, {"config", r.config}, {"checks", json::array()},
                        {"passed", true}};
        write_file(r.out, j.dump(1) + "\n");
        return ok;
    }
    Handle<rh_report, rh_report_free> rep;
    check(rh_run_checks(suite == "full", r.seed, rep.out()));
    char* text = nullptr;
    check(rh_report_json(rep, echo(r).c_str(), &text));
    write_file(r.out, take(text));
    for (size_t i = 0; i < rh_report_size(rep); ++i) {
        int passed;
        const char *name, *detail;
        double sec;
        check(rh_report_get(rep, i, &passed, &name, &detail, &sec));
        std::fprintf(stderr, "%s %s (%.1f s): %s\n", passed ? "PASS" : "FAIL", name, sec, detail);
    }
    return rh_report_passed(rep) ? ok : numerical;
}

void print_error(rh_status s, const std::string& message) {
    std::cerr << json{{"status", int(s)}, {"kind", status_kind(s)}, {"message", message}, {"nodes", json::array()}}
                     .dump()
              << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rough Heston pricing, hedging and simulation"};
    app.set_version_flag("--version", std::string(rh_version()));
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    auto* o_seed = app.add_option("--seed", seed, "Random seed (overrides the config)");
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out, "Output path (overrides the config; - for stdout)");
    app.add_option("--threads", threads, "Worker threads (default: $ROUGHHEDGE_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    const char* cmds[][2] = {{"price", "Vanilla prices on a strike x maturity grid"},
                             {"hedge", "Replication of a vanilla along simulated paths"},
                             {"curve", "Convert between mean-reversion and forward-variance curves"},
                             {"simulate", "Rough Heston paths or nearly unstable Hawkes events"},
                             {"validate", "Check a configuration and run the validation suite"}};
    for (auto& c : cmds) app.add_subcommand(c[0], c[1]);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    Run r;
    r.command = app.get_subcommands().front()->get_name();
    try {
        if (!threads) {
            if (const char* env = std::getenv("ROUGHHEDGE_THREADS")) {
                char* end = nullptr;
                const long v = std::strtol(env, &end, 10);
                if (*env == '\0' || *end != '\0' || v < 1) throw UsageError("ROUGHHEDGE_THREADS must be a positive integer");
                threads = std::size_t(v);
            }
        }
        check(rh_set_threads(threads ? threads : 1));
        try {
            r.config = config_path.empty() ? json::object() : json::parse(read_file(config_path));
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!r.config.is_object()) throw ConfigError("config must be a JSON object");
        Section top(r.config, "config");
        top.only({"params", "curve", "options", "out", "seed"});
        // The output location and worker count do not affect results and are
        // left out of the echoed configuration.
        if (out.empty()) out = top.get<std::string>("out", "");
        r.config.erase("out");
        r.out = out;
        r.seed = *o_seed ? seed : top.get<std::uint64_t>("seed", 0);
        r.config["seed"] = r.seed;
        r.params = read_params(r.config);
        check(rh_params_validate(&r.params));
        read_curve(r);
        if (r.command == "price") return cmd_price(r);
        if (r.command == "hedge") return cmd_hedge(r);
        if (r.command == "curve") return cmd_curve(r);
        if (r.command == "simulate") return cmd_simulate(r);
        return cmd_validate(r);
    } catch (const LibraryError& e) {
        std::cerr << rh_last_error_json() << "\n";
        switch (e.status) {
            case RH_ERR_DOMAIN:
            case RH_ERR_VALIDATION: return validation;
            case RH_ERR_IO:
            case RH_ERR_ARGUMENT: return usage;
            default: return numerical;
        }
    } catch (const ConfigError& e) {
        print_error(RH_ERR_VALIDATION, e.what());
        return validation;
    } catch (const UsageError& e) {
        std::cerr << json{{"status", int(RH_ERR_IO)}, {"kind", "usage"}, {"message", e.what()}}.dump() << "\n";
        return usage;
    }
}
