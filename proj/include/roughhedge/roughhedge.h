#ifndef ROUGHHEDGE_H
#define ROUGHHEDGE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RH_API __declspec(dllexport)
#else
#define RH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    RH_OK = 0,
    RH_ERR_DOMAIN = 1,      /* argument outside the model's domain */
    RH_ERR_NUMERICAL = 2,   /* solver breakdown */
    RH_ERR_VALIDATION = 3,  /* inadmissible curve or malformed input; see rh_last_error_json */
    RH_ERR_ACCURACY = 4,    /* quadrature tolerance not reached */
    RH_ERR_IO = 5,
    RH_ERR_ARGUMENT = 6,    /* null handle or inconsistent sizes */
    RH_ERR_INTERNAL = 7,
} rh_status;

/* Library version string, e.g. "0.1.0". */
RH_API const char* rh_version(void);

/* Message and machine-readable JSON of the last failed call on this thread:
   {"status": ..., "kind": ..., "message": ..., "nodes": [...], "tail_bound": ...}. */
RH_API const char* rh_last_error(void);
RH_API const char* rh_last_error_json(void);

/* Worker count for internal parallel loops; results do not depend on it. */
RH_API rh_status rh_set_threads(size_t n);
RH_API size_t rh_get_threads(void);

/* Strings returned by the library are released with rh_string_free. */
RH_API void rh_string_free(char* s);

typedef struct {
    double alpha, lambda, nu, rho, v0, s0;
} rh_params;

RH_API void rh_params_default(rh_params* p);
RH_API rh_status rh_params_validate(const rh_params* p);

typedef struct {
    double damping;   /* 0: default rule */
    double b_max;     /* 0: automatic truncation */
    size_t n_nodes;   /* Gauss-Legendre points per panel */
    int adaptive;     /* nonzero: bisect panels until two levels agree */
    size_t n_time;    /* Riccati nodes on [0, maturity] */
    double tol;       /* target tail bound, relative to spot */
    double max_tail;  /* larger tail bounds fail with RH_ERR_ACCURACY */
    double b_limit;   /* hard cap on automatic truncation */
} rh_quad;

RH_API void rh_quad_default(rh_quad* q);

typedef enum { RH_CALL = 0, RH_PUT = 1 } rh_option_kind;

/* ---- curves ---- */

typedef enum { RH_CURVE_THETA = 0, RH_CURVE_XI = 1 } rh_curve_kind;
typedef struct rh_curve rh_curve;

RH_API rh_status rh_curve_create(rh_curve_kind kind, const double* grid, const double* values, size_t n,
                                 rh_curve** out);
/* {"grid": [...], "values": [...], "kind": "theta" | "xi"} */
RH_API rh_status rh_curve_parse_json(const char* text, rh_curve** out);
RH_API void rh_curve_free(rh_curve* c);
RH_API rh_curve_kind rh_curve_get_kind(const rh_curve* c);
RH_API size_t rh_curve_size(const rh_curve* c);
/* Copies rh_curve_size(c) nodes into grid and values (either may be null). */
RH_API rh_status rh_curve_get(const rh_curve* c, double* grid, double* values);
/* Admissibility conditions for the curve's kind; offending nodes in the error JSON. */
RH_API rh_status rh_curve_validate(const rh_params* p, const rh_curve* c);
/* theta0 -> xi on n uniform intervals of [0, horizon]. */
RH_API rh_status rh_curve_theta_to_xi(const rh_params* p, const rh_curve* theta, double horizon, size_t n,
                                      rh_curve** xi);
RH_API rh_status rh_curve_xi_to_theta(const rh_params* p, const rh_curve* xi, rh_curve** theta);
/* Curve JSON with provenance: config_json is echoed verbatim (null allowed). */
RH_API rh_status rh_curve_to_json(const rh_curve* c, const char* config_json, char** out);

/* ---- pricing ---- */

typedef struct rh_price_table rh_price_table;

/* European options on strikes x maturities. A theta curve is mapped to xi on
   the Riccati grid of the longest maturity. Per-cell failures are recorded,
   not returned. */
RH_API rh_status rh_price_surface(const rh_params* p, const rh_curve* curve, const double* strikes, size_t n_strikes,
                                  const double* maturities, size_t n_maturities, rh_option_kind kind,
                                  const rh_quad* q, rh_price_table** out);
RH_API void rh_price_table_free(rh_price_table* t);
RH_API size_t rh_price_table_rows(const rh_price_table* t);
/* Row i (maturity-major). cell_status is RH_OK or the failure code. */
RH_API rh_status rh_price_table_get(const rh_price_table* t, size_t i, double* strike, double* maturity, double* price,
                                    double* damping_used, double* tail_bound, rh_status* cell_status);
/* strike, maturity, price, damping_used, tail_bound, error */
RH_API rh_status rh_price_table_csv(const rh_price_table* t, const char* config_json, char** out);

/* ---- hedging ---- */

RH_API rh_status rh_hedge_ratios(const rh_params* p, const rh_curve* curve, double strike, double maturity,
                                 rh_option_kind kind, const rh_quad* q, double spot, double* price, double* delta);

typedef struct rh_hedge_report rh_hedge_report;

typedef struct {
    double initial_price;
    double damping_used;
    double pnl_mean;
    double pnl_std;
    double pnl_stderr;
    double max_tail;
    size_t n_steps, n_paths, n_completed;
    int partial;
} rh_hedge_summary;

/* Replication along simulated paths; the curve may be theta0 or xi. */
RH_API rh_status rh_replicate(const rh_params* p, const rh_curve* curve, double strike, double maturity,
                              rh_option_kind kind, const rh_quad* q, size_t n_steps, size_t n_paths, uint64_t seed,
                              rh_hedge_report** out);
RH_API void rh_hedge_report_free(rh_hedge_report* r);
RH_API rh_status rh_hedge_report_summary(const rh_hedge_report* r, rh_hedge_summary* s);
/* Terminal P&L of each path (NaN where a path failed); n_paths values. */
RH_API rh_status rh_hedge_report_pnl(const rh_hedge_report* r, double* pnl);
/* step, time, S, V, delta, option_value, portfolio_value for path 0. */
RH_API rh_status rh_hedge_report_csv(const rh_hedge_report* r, const char* config_json, char** out);
RH_API rh_status rh_hedge_report_summary_json(const rh_hedge_report* r, const char* config_json, char** out);

/* ---- simulation ---- */

typedef struct rh_paths rh_paths;

RH_API rh_status rh_simulate(const rh_params* p, const rh_curve* curve, double horizon, size_t n_steps,
                             size_t n_paths, uint64_t seed, rh_paths** out);
RH_API void rh_paths_free(rh_paths* ps);
RH_API size_t rh_paths_count(const rh_paths* ps);
RH_API size_t rh_paths_nodes(const rh_paths* ps);
RH_API rh_status rh_paths_get(const rh_paths* ps, size_t path, size_t node, double* s, double* v);
RH_API rh_status rh_paths_csv(const rh_paths* ps, const char* config_json, char** out);

typedef struct {
    double t_scale;  /* T of the rescaling */
    double t_max;    /* horizon in rescaled time */
    size_t n_grid;   /* rescaled output grid intervals */
} rh_hawkes_config;

RH_API void rh_hawkes_config_default(rh_hawkes_config* c);

typedef struct rh_hawkes rh_hawkes;

/* n_paths nearly unstable Hawkes paths; path i uses stream (seed, i). */
RH_API rh_status rh_simulate_hawkes(const rh_params* p, const rh_curve* theta, const rh_hawkes_config* c,
                                    size_t n_paths, uint64_t seed, rh_hawkes** out);
RH_API void rh_hawkes_free(rh_hawkes* h);
RH_API size_t rh_hawkes_count(const rh_hawkes* h);
RH_API size_t rh_hawkes_events(const rh_hawkes* h, size_t path);
RH_API rh_status rh_hawkes_events_csv(const rh_hawkes* h, const char* config_json, char** out);
RH_API rh_status rh_hawkes_processes_csv(const rh_hawkes* h, const char* config_json, char** out);

/* ---- validation suite ---- */

typedef struct rh_report rh_report;

/* Acceptance criteria (full = 1) or a reduced-size variant (full = 0). */
RH_API rh_status rh_run_checks(int full, uint64_t seed, rh_report** out);
RH_API void rh_report_free(rh_report* r);
RH_API size_t rh_report_size(const rh_report* r);
/* Strings remain owned by the report. */
RH_API rh_status rh_report_get(const rh_report* r, size_t i, int* passed, const char** name, const char** detail,
                               double* seconds);
RH_API int rh_report_passed(const rh_report* r);
RH_API rh_status rh_report_json(const rh_report* r, const char* config_json, char** out);

#ifdef __cplusplus
}
#endif

#endif
