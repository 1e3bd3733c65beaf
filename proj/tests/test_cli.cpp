#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code = -1;
    std::string out, err;
};

fs::path workdir() {
    static const fs::path d = [] {
        fs::path p = fs::temp_directory_path() / ("roughhedge_cli_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write(const std::string& name, const std::string& text) { std::ofstream(workdir() / name) << text; }

// Runs the CLI in the work directory; env is prepended to the command line.
Result run(const std::string& args, const std::string& env = "") {
    const fs::path out = workdir() / "stdout.txt", err = workdir() / "stderr.txt";
    const std::string cmd = "cd '" + workdir().string() + "' && " + env + " '" + RH_CLI_PATH + "' " + args + " >'" +
                            out.string() + "' 2>'" + err.string() + "'";
    const int st = std::system(cmd.c_str());
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, slurp(out), slurp(err)};
}

// Data rows of a CSV with '#' comment lines and a header row.
std::vector<std::vector<std::string>> rows(const std::string& csv, std::vector<std::string>* header = nullptr) {
    std::vector<std::vector<std::string>> out;
    std::istringstream in(csv);
    std::string line;
    bool seen_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!seen_header) {
            seen_header = true;
            if (header) *header = cells;
            continue;
        }
        out.push_back(cells);
    }
    return out;
}

double num(const std::string& s) { return std::stod(s); }

}  // namespace

TEST_CASE("price: single at-the-money call on the flat curve") {
    write("atm.json", R"({"options": {"strikes": [1.0], "maturities": [1.0]}})");
    const Result r = run("price --config atm.json");
    REQUIRE(r.code == 0);
    std::vector<std::string> head;
    const auto rs = rows(r.out, &head);
    CHECK(head == std::vector<std::string>{"strike", "maturity", "price", "damping_used", "tail_bound", "error"});
    REQUIRE(rs.size() == 1);
    CHECK(num(rs[0][2]) == doctest::Approx(0.0757507634).epsilon(1e-8));
    CHECK(num(rs[0][3]) == 1.5);
    CHECK(num(rs[0][4]) < 1e-9);
    CHECK(r.out.rfind("# roughhedge ", 0) == 0);
    CHECK(r.out.find("# config {") != std::string::npos);
}

TEST_CASE("price: zero forward variance gives intrinsic values") {
    write("zero.json", R"({"curve": {"kind": "xi", "grid": [0, 2], "values": [0, 0]},
                           "options": {"strikes": [0.7, 1.0, 1.3], "maturities": [0.5, 2.0]}})");
    const Result r = run("price --config zero.json");
    REQUIRE(r.code == 0);
    for (const auto& row : rows(r.out)) CHECK(num(row[2]) == doctest::Approx(std::max(1.0 - num(row[0]), 0.0)));
}

TEST_CASE("price: classical Heston limit against the fixture") {
    write("heston.json", R"({"params": {"alpha": 1.0},
                             "options": {"strikes": [0.8, 0.9, 1.0, 1.1, 1.2], "maturities": [0.5, 1.0]}})");
    const Result r = run("price --config heston.json");
    REQUIRE(r.code == 0);
    std::map<std::pair<double, double>, double> ref;
    for (const auto& row : rows(slurp(fs::path(RH_FIXTURES) / "heston_alpha1.csv")))
        ref[{num(row[0]), num(row[1])}] = num(row[2]);
    const auto rs = rows(r.out);
    REQUIRE(rs.size() == 10);
    for (const auto& row : rs) {
        INFO("K=" << row[0] << " T=" << row[1]);
        const double want = ref.at({num(row[0]), num(row[1])});
        CHECK(std::abs(num(row[2]) - want) < 1e-5 * want);
    }
}

TEST_CASE("hedge: smoke configurations") {
    SUBCASE("vanishing vol of vol") {
        write("h_nu.json", R"({"params": {"nu": 1e-6}, "seed": 3,
                               "options": {"n_steps": 16, "n_paths": 200, "quadrature": {"b_max": 300}}})");
        const Result r = run("hedge --config h_nu.json --out nu.csv");
        REQUIRE(r.code == 0);
        const json s = json::parse(slurp(workdir() / "nu_summary.json"));
        CHECK(s["n_completed"] == 200);
        CHECK(std::abs(s["pnl_terminal"].get<double>()) < 3.0 * s["pnl_stderr"].get<double>());
        std::vector<std::string> head;
        CHECK(rows(slurp(workdir() / "nu.csv"), &head).size() == 17);
        CHECK(head == std::vector<std::string>{"step", "time", "S", "V", "delta", "option_value", "portfolio_value"});
    }
    SUBCASE("zero strike") {
        write("h_zero.json", R"({"options": {"strike": 0.0, "n_steps": 8, "n_paths": 20, "quadrature": {"b_max": 300}}})");
        const Result r = run("hedge --config h_zero.json --out zero.csv");
        REQUIRE(r.code == 0);
        const json s = json::parse(slurp(workdir() / "zero_summary.json"));
        CHECK(std::abs(s["pnl_terminal"].get<double>()) < 1e-14);
        CHECK(s["initial_price"] == 1.0);
    }
    SUBCASE("desk set") {
        write("h_desk.json", R"({"seed": 11, "options": {"n_steps": 16, "n_paths": 50, "quadrature": {"b_max": 400}}})");
        const Result r = run("hedge --config h_desk.json --out desk.csv");
        REQUIRE(r.code == 0);
        const json s = json::parse(slurp(workdir() / "desk_summary.json"));
        CHECK(s["partial"] == false);
        CHECK(s["initial_price"].get<double>() == doctest::Approx(0.0757507).epsilon(1e-5));
        // Discrete hedging error at 16 steps is a fraction of the premium.
        CHECK(s["pnl_std_across_paths"].get<double>() < 0.5 * s["initial_price"].get<double>());
        CHECK(s["config"]["seed"] == 11);
    }
    CHECK(run("hedge").code == 1);  // needs an output path
}

TEST_CASE("curve: conversions") {
    SUBCASE("flat roundtrip") {
        write("flat.json", R"({"options": {"n": 64}})");
        Result r = run("curve --config flat.json --out flat_xi.json");
        REQUIRE(r.code == 0);
        const json xi = json::parse(slurp(workdir() / "flat_xi.json"));
        CHECK(xi["kind"] == "xi");
        for (double v : xi["values"].get<std::vector<double>>()) CHECK(v == doctest::Approx(0.04).epsilon(1e-12));
        write("back.json", R"({"curve": "flat_xi.json"})");
        r = run("curve --config back.json");
        REQUIRE(r.code == 0);
        const json th = json::parse(r.out);
        CHECK(th["kind"] == "theta");
        for (double v : th["values"].get<std::vector<double>>()) CHECK(v == doctest::Approx(0.04).epsilon(1e-9));
        CHECK(th["config"]["curve"]["source"] == "flat_xi.json");
    }
    SUBCASE("zero mean reversion") {
        write("th0.json", R"({"curve": {"kind": "theta", "grid": [0], "values": [0]}, "options": {"n": 32}})");
        const Result r = run("curve --config th0.json");
        REQUIRE(r.code == 0);
        const auto v = json::parse(r.out)["values"].get<std::vector<double>>();
        CHECK(v.front() == 0.04);
        for (std::size_t i = 1; i < v.size(); ++i) {
            CHECK(v[i] < v[i - 1]);
            CHECK(v[i] > 0.0);
        }
    }
    SUBCASE("linear forward variance") {
        // xi = V0 + 0.01 t: theta0 = V0 + 0.01 (t + t^(1-alpha) / (lambda Gamma(2-alpha))).
        json c = {{"kind", "xi"}, {"grid", json::array()}, {"values", json::array()}};
        for (int i = 0; i <= 64; ++i) {
            c["grid"].push_back(i / 64.0);
            c["values"].push_back(0.04 + 0.01 * i / 64.0);
        }
        write("lin.json", json{{"curve", c}}.dump());
        const Result r = run("curve --config lin.json");
        REQUIRE(r.code == 0);
        const json th = json::parse(r.out);
        const auto g = th["grid"].get<std::vector<double>>(), v = th["values"].get<std::vector<double>>();
        for (std::size_t i = 1; i < g.size(); ++i) {
            const double want = 0.04 + 0.01 * (g[i] + std::pow(g[i], 0.4) / (2.0 * std::tgamma(1.4)));
            CHECK(v[i] == doctest::Approx(want).epsilon(1e-6));
        }
    }
}

TEST_CASE("simulate: rough Heston paths") {
    SUBCASE("frozen variance without vol of vol") {
        write("s_nu.json", R"({"params": {"nu": 1e-10}, "options": {"n_steps": 8, "n_paths": 5}})");
        const Result r = run("simulate --config s_nu.json --seed 4");
        REQUIRE(r.code == 0);
        CHECK(r.out.find("# seed 4\n") != std::string::npos);
        CHECK(r.out.find("# scheme ") != std::string::npos);
        CHECK(r.out.find("# params alpha=") != std::string::npos);
        for (const auto& row : rows(r.out))
            if (row[1] == "V")
                for (std::size_t k = 2; k < row.size(); ++k) CHECK(std::abs(num(row[k]) - 0.04) < 1e-9);
    }
    SUBCASE("state mean follows the forward-variance curve") {
        write("s_mean.json", R"({"options": {"n_steps": 10, "n_paths": 4000}})");
        const Result r = run("simulate --config s_mean.json --seed 8");
        REQUIRE(r.code == 0);
        std::vector<double> s(11, 0.0), s2(11, 0.0);
        std::size_t n = 0;
        for (const auto& row : rows(r.out)) {
            if (row[1] != "V_state") continue;
            ++n;
            for (std::size_t k = 0; k < 11; ++k) {
                s[k] += num(row[k + 2]);
                s2[k] += num(row[k + 2]) * num(row[k + 2]);
            }
        }
        REQUIRE(n == 4000);
        // theta0 = V0 gives xi = V0.
        for (std::size_t k = 1; k < 11; ++k) {
            const double m = s[k] / n, se = std::sqrt((s2[k] / n - m * m) / (n - 1));
            CHECK(std::abs(m - 0.04) < 4.0 * se);
        }
    }
    SUBCASE("seed determinism") {
        write("s_det.json", R"({"options": {"n_steps": 16, "n_paths": 50}})");
        const Result a = run("simulate --config s_det.json --seed 9 --threads 1");
        const Result b = run("simulate --config s_det.json --seed 9 --threads 2");
        const Result c = run("simulate --config s_det.json --seed 9", "ROUGHHEDGE_THREADS=3");
        const Result d = run("simulate --config s_det.json --seed 10");
        REQUIRE(a.code == 0);
        CHECK(a.out == b.out);
        CHECK(a.out == c.out);
        CHECK(a.out != d.out);
    }
}

TEST_CASE("simulate: Hawkes events") {
    write("hk.json", R"({"options": {"model": "hawkes", "t_scale": 30, "n_grid": 4, "n_paths": 3}, "seed": 5})");
    const Result a = run("simulate --config hk.json --out ev_a.csv");
    const Result b = run("simulate --config hk.json --out ev_b.csv --threads 2");
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(slurp(workdir() / "ev_a.csv") == slurp(workdir() / "ev_b.csv"));
    CHECK(slurp(workdir() / "ev_a_processes.csv") == slurp(workdir() / "ev_b_processes.csv"));
    std::vector<std::string> head;
    const auto ev = rows(slurp(workdir() / "ev_a.csv"), &head);
    CHECK(head == std::vector<std::string>{"path", "index", "time", "rescaled_time"});
    CHECK(!ev.empty());
    for (const auto& row : ev) CHECK(num(row[2]) <= 30.0);
    const auto pr = rows(slurp(workdir() / "ev_a_processes.csv"), &head);
    CHECK(head == std::vector<std::string>{"path", "t", "X", "Lambda", "Z"});
    CHECK(pr.size() == 15);
}

TEST_CASE("hedge and price outputs are byte-identical across runs") {
    write("det.json", R"({"seed": 2, "options": {"n_steps": 8, "n_paths": 8, "quadrature": {"b_max": 300}}})");
    REQUIRE(run("hedge --config det.json --out d1.csv --threads 1").code == 0);
    REQUIRE(run("hedge --config det.json --out d2.csv --threads 2").code == 0);
    CHECK(slurp(workdir() / "d1.csv") == slurp(workdir() / "d2.csv"));
    CHECK(slurp(workdir() / "d1_summary.json") == slurp(workdir() / "d2_summary.json"));
    CHECK(slurp(workdir() / "d1_summary.json").find("\"roughhedge_version\"") != std::string::npos);
}

TEST_CASE("validate") {
    SUBCASE("admissible configuration") {
        const Result r = run("validate");
        CHECK(r.code == 0);
        CHECK(json::parse(r.out)["passed"] == true);
    }
    SUBCASE("curve violating the lower bound") {
        // theta0(u) >= -V0 u^-alpha / (lambda Gamma(1 - alpha)) fails at u = 0.5 and u = 1.
        write("bad.json", R"({"curve": {"kind": "theta", "grid": [0, 0.25, 0.5, 1], "values": [0.04, 0.04, -1, -1]}})");
        const Result r = run("validate --config bad.json");
        CHECK(r.code == 2);
        const json e = json::parse(r.err);
        CHECK(e["kind"] == "validation");
        CHECK(e["nodes"] == json::array({2, 3}));
    }
    SUBCASE("forward variance not starting at V0") {
        write("bad_xi.json", R"({"curve": {"kind": "xi", "grid": [0, 1], "values": [0.05, 0.04]}})");
        const Result r = run("validate --config bad_xi.json");
        CHECK(r.code == 2);
        CHECK(json::parse(r.err)["nodes"] == json::array({0}));
    }
}

TEST_CASE("usage and configuration errors") {
    CHECK(run("").code == 1);
    CHECK(run("price --bogus").code == 1);
    CHECK(run("price --config missing.json").code == 1);
    CHECK(run("price --threads 0").code == 1);
    CHECK(run("price", "ROUGHHEDGE_THREADS=many").code == 1);
    write("typo.json", R"({"options": {"strike": [1.0]}})");
    Result r = run("price --config typo.json");
    CHECK(r.code == 2);
    CHECK(json::parse(r.err)["message"].get<std::string>().find("options.strike") != std::string::npos);
    write("broken.json", "{");
    CHECK(run("price --config broken.json").code == 2);
    write("alpha.json", R"({"params": {"alpha": 0.4}})");
    r = run("price --config alpha.json");
    CHECK(r.code == 2);
    CHECK(json::parse(r.err)["kind"] == "domain");
    write("cap.json", R"({"options": {"quadrature": {"b_limit": 2, "max_tail": 1e-12}}})");
    r = run("price --config cap.json");
    CHECK(r.code == 3);
    CHECK(rows(r.out).size() == 1);
    CHECK(run("--version").code == 0);
}
