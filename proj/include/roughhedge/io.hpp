#pragma once

#include <string>
#include <vector>

#include "roughhedge/checks.hpp"
#include "roughhedge/hedging.hpp"
#include "roughhedge/model.hpp"
#include "roughhedge/pricing.hpp"
#include "roughhedge/simulate.hpp"

namespace rh {

const char* library_version();

// Provenance stamped into every output: CSV files start with
// "# roughhedge <version>" and "# config <json>"; JSON outputs carry
// "roughhedge_version" and "config" members. config must be a JSON value
// (empty means null). Numbers are written with 17 significant digits.
struct OutputHeader {
    std::string config;
};

std::string curve_json(const CurveFile& c, const OutputHeader& h);

struct PriceRow {
    double strike = 0.0, maturity = 0.0;
    SurfaceCell cell;
};
// strike, maturity, price, damping_used, tail_bound; failed cells carry NaN
// and an error column.
std::string price_csv(const std::vector<PriceRow>& rows, const OutputHeader& h);

// step, time, S, V, delta, option_value, portfolio_value (path 0).
std::string hedge_csv(const HedgeReport& r, const OutputHeader& h);
std::string hedge_summary_json(const HedgeReport& r, const OutputHeader& h);

// Params, seed and scheme in the header; then per path the rows S, V (the
// positive part) and V_state (the scheme's state), one column per grid node.
std::string paths_csv(const PathSet& ps, const RoughHestonParams& p, const OutputHeader& h);

std::string hawkes_events_csv(const std::vector<HawkesPath>& paths, const HawkesConfig& c, const OutputHeader& h);
std::string hawkes_processes_csv(const std::vector<HawkesPath>& paths, const OutputHeader& h);

std::string checks_json(const std::vector<CheckResult>& r, const OutputHeader& h);

}  // namespace rh
