/* fluidctl.h
 *
 * C interface to the fluid-value power-control library.  All entry
 * points return a status code; fluidctl_last_error() describes the
 * most recent failure on the calling thread.  Handles are opaque and
 * must be released with the matching _free call.
 *
 * Units: time in milliseconds, arrival rates in packets/ms, rates in
 * packets/ms per nat (see rate_scale in the config format).
 */
#ifndef FLUIDCTL_H
#define FLUIDCTL_H

#include <stdint.h>

#if defined(_WIN32)
#define FLUIDCTL_API __declspec(dllexport)
#else
#define FLUIDCTL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fluidctl_status {
  FLUIDCTL_OK = 0,
  FLUIDCTL_ERR_INVALID = 1,        /* bad argument / invariant violated */
  FLUIDCTL_ERR_DOMAIN = 2,         /* special-function domain error */
  FLUIDCTL_ERR_RANGE = 3,          /* outside a table's tabulated range */
  FLUIDCTL_ERR_NO_CONVERGENCE = 4, /* iteration budget exhausted */
  FLUIDCTL_ERR_PARSE = 5,          /* config/plan file parse error */
  FLUIDCTL_ERR_IO = 6,             /* file open/read/write failure */
  FLUIDCTL_ERR_INTERNAL = 7
} fluidctl_status;

/* Message for the last error raised on this thread; empty string when
 * no error has occurred. */
FLUIDCTL_API const char* fluidctl_last_error(void);

/* ------------------------------------------------------------------ */
/* Per-flow fluid value tables                                        */

typedef struct fluidctl_pair_params {
  double lambda_pkts_per_ms;
  double gamma;
  double beta;
  double L_direct;
  double tau_ms;
} fluidctl_pair_params;

typedef struct fluidctl_table fluidctl_table; /* opaque */

FLUIDCTL_API fluidctl_status fluidctl_table_build(
    const fluidctl_pair_params* params, double q_max, fluidctl_table** out);
FLUIDCTL_API void fluidctl_table_free(fluidctl_table* table);

FLUIDCTL_API fluidctl_status fluidctl_table_eval_j(const fluidctl_table* table,
                                                   double q, double* out);
FLUIDCTL_API fluidctl_status fluidctl_table_eval_j_prime(
    const fluidctl_table* table, double q, double* out);
FLUIDCTL_API fluidctl_status fluidctl_table_hjb_residual(
    const fluidctl_table* table, double q, double* out);
FLUIDCTL_API fluidctl_status fluidctl_table_steady_state(
    const fluidctl_table* table, double* v, double* c_inf);
FLUIDCTL_API fluidctl_status fluidctl_table_export_csv(
    const fluidctl_table* table, const char* path);

/* ------------------------------------------------------------------ */
/* Orchestration (mirrors the CLI subcommands; file formats are
 * documented in the README)                                          */

/* Build the fluid table for one pair of the given network config and
 * write it as CSV (header y,q,J).  q_max <= 0 selects the config's
 * queue cap. */
FLUIDCTL_API fluidctl_status fluidctl_emit_table_csv(const char* config_path,
                                                     int pair, double q_max,
                                                     const char* out_csv);

/* Parse and run an experiment plan; writes the plan's output CSV. */
FLUIDCTL_API fluidctl_status fluidctl_run_plan(const char* plan_path);

typedef struct fluidctl_oracle_summary {
  double theta;            /* optimal average cost per ms */
  double span_residual;
  double bellman_residual;
  int sweeps;
  double rel_gap_smallest_decile;
  double rel_gap_largest_decile;
} fluidctl_oracle_summary;

/* Relative value iteration on the config's discretized instance.
 * Writes the value function (q1,q2,V) and the fluid-approximation gap
 * report; either path may be NULL to skip that file. */
FLUIDCTL_API fluidctl_status fluidctl_run_oracle(
    const char* config_path, const char* value_csv, const char* gap_csv,
    fluidctl_oracle_summary* out);

/* Oracle coupling sweep over the config's sweep.values; writes one
 * L,e row per point (out_csv may be NULL) and returns the log-log
 * slope. */
FLUIDCTL_API fluidctl_status fluidctl_run_coupling_sweep(
    const char* config_path, const char* out_csv, double* slope_out);

#ifdef __cplusplus
}
#endif

#endif /* FLUIDCTL_H */
