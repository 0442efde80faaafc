#include "fluidctl.h"

#include <cstdio>
#include <cstring>
#include <string>

#include "fluidctl/config.hpp"
#include "fluidctl/errors.hpp"
#include "fluidctl/fluid_value.hpp"
#include "fluidctl/mdp_oracle.hpp"

namespace {

thread_local std::string g_last_error;

fluidctl_status classify(const std::exception& e) {
  if (dynamic_cast<const fluidctl::ParseError*>(&e)) return FLUIDCTL_ERR_PARSE;
  if (dynamic_cast<const fluidctl::IoError*>(&e)) return FLUIDCTL_ERR_IO;
  if (dynamic_cast<const std::domain_error*>(&e)) return FLUIDCTL_ERR_DOMAIN;
  if (dynamic_cast<const std::out_of_range*>(&e)) return FLUIDCTL_ERR_RANGE;
  if (dynamic_cast<const std::invalid_argument*>(&e))
    return FLUIDCTL_ERR_INVALID;
  if (std::strstr(e.what(), "no convergence"))
    return FLUIDCTL_ERR_NO_CONVERGENCE;
  if (std::strstr(e.what(), "infeasible load")) return FLUIDCTL_ERR_INVALID;
  return FLUIDCTL_ERR_INTERNAL;
}

template <typename Fn>
fluidctl_status wrap(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return FLUIDCTL_OK;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return classify(e);
  } catch (...) {
    g_last_error = "unknown error";
    return FLUIDCTL_ERR_INTERNAL;
  }
}

fluidctl::PairParams to_params(const fluidctl_pair_params& p) {
  return {p.lambda_pkts_per_ms, p.gamma, p.beta, p.L_direct, p.tau_ms};
}

}  // namespace

struct fluidctl_table {
  fluidctl::FluidValueTable impl;
};

extern "C" {

const char* fluidctl_last_error(void) { return g_last_error.c_str(); }

fluidctl_status fluidctl_table_build(const fluidctl_pair_params* params,
                                     double q_max, fluidctl_table** out) {
  return wrap([&] {
    if (!params || !out) throw std::invalid_argument("null argument");
    auto table = new fluidctl_table{
        fluidctl::build_fluid_table(to_params(*params), q_max)};
    *out = table;
  });
}

void fluidctl_table_free(fluidctl_table* table) { delete table; }

fluidctl_status fluidctl_table_eval_j(const fluidctl_table* table, double q,
                                      double* out) {
  return wrap([&] {
    if (!table || !out) throw std::invalid_argument("null argument");
    *out = fluidctl::eval_J(table->impl, q);
  });
}

fluidctl_status fluidctl_table_eval_j_prime(const fluidctl_table* table,
                                            double q, double* out) {
  return wrap([&] {
    if (!table || !out) throw std::invalid_argument("null argument");
    *out = fluidctl::eval_J_prime(table->impl, q);
  });
}

fluidctl_status fluidctl_table_hjb_residual(const fluidctl_table* table,
                                            double q, double* out) {
  return wrap([&] {
    if (!table || !out) throw std::invalid_argument("null argument");
    *out = fluidctl::hjb_residual(table->impl, q);
  });
}

fluidctl_status fluidctl_table_steady_state(const fluidctl_table* table,
                                            double* v, double* c_inf) {
  return wrap([&] {
    if (!table || !v || !c_inf) throw std::invalid_argument("null argument");
    *v = table->impl.steady.v;
    *c_inf = table->impl.steady.c_inf;
  });
}

fluidctl_status fluidctl_table_export_csv(const fluidctl_table* table,
                                          const char* path) {
  return wrap([&] {
    if (!table || !path) throw std::invalid_argument("null argument");
    fluidctl::write_table_csv(table->impl, path);
  });
}

fluidctl_status fluidctl_emit_table_csv(const char* config_path, int pair,
                                        double q_max, const char* out_csv) {
  return wrap([&] {
    if (!config_path || !out_csv) throw std::invalid_argument("null argument");
    const fluidctl::LoadedConfig lc =
        fluidctl::parse_network_config(config_path);
    if (pair < 0 || pair >= lc.net.K)
      throw std::invalid_argument("pair index out of range");
    const double qm = q_max > 0.0 ? q_max : lc.net.q_cap * 1.02 + 1.0;
    fluidctl::write_table_csv(
        fluidctl::build_fluid_table(lc.net.pairs[pair], qm), out_csv);
  });
}

fluidctl_status fluidctl_run_plan(const char* plan_path) {
  return wrap([&] {
    if (!plan_path) throw std::invalid_argument("null argument");
    fluidctl::run_plan(fluidctl::parse_plan(plan_path));
  });
}

fluidctl_status fluidctl_run_oracle(const char* config_path,
                                    const char* value_csv, const char* gap_csv,
                                    fluidctl_oracle_summary* out) {
  return wrap([&] {
    if (!config_path) throw std::invalid_argument("null argument");
    const fluidctl::LoadedConfig lc =
        fluidctl::parse_network_config(config_path);
    const fluidctl::DiscreteMdp mdp =
        fluidctl::build_discrete_mdp(lc.net, lc.oracle);
    const fluidctl::MdpSolution sol = fluidctl::relative_value_iteration(
        mdp, lc.oracle.tol, lc.oracle.max_sweeps);
    if (value_csv) fluidctl::write_solution_csv(mdp, sol, value_csv);

    std::vector<fluidctl::FluidValueTable> tables;
    for (int k = 0; k < lc.net.K; ++k)
      tables.push_back(fluidctl::build_fluid_table(
          lc.net.pairs[k], mdp.queue_grid.back() * 1.02 + 1.0));
    const fluidctl::GapReport gap =
        fluidctl::approximation_gap(mdp, sol, tables);
    if (gap_csv) {
      std::FILE* f = std::fopen(gap_csv, "w");
      if (!f) throw fluidctl::IoError(std::string("cannot open for writing: ") +
                                      gap_csv);
      std::fputs(
          "norm_lo,norm_hi,count,mean_rel_gap,mean_abs_gap,max_abs_gap\n", f);
      for (const fluidctl::GapBin& b : gap.bins)
        std::fprintf(f, "%.12g,%.12g,%d,%.12g,%.12g,%.12g\n", b.norm_lo,
                     b.norm_hi, b.count, b.mean_rel_gap, b.mean_abs_gap,
                     b.max_abs_gap);
      std::fclose(f);
    }
    if (out) {
      out->theta = sol.theta;
      out->span_residual = sol.span_residual;
      out->bellman_residual = sol.bellman_residual;
      out->sweeps = sol.sweeps;
      out->rel_gap_smallest_decile = gap.rel_smallest_decile;
      out->rel_gap_largest_decile = gap.rel_largest_decile;
    }
  });
}

fluidctl_status fluidctl_run_coupling_sweep(const char* config_path,
                                            const char* out_csv,
                                            double* slope_out) {
  return wrap([&] {
    if (!config_path) throw std::invalid_argument("null argument");
    const fluidctl::LoadedConfig lc =
        fluidctl::parse_network_config(config_path);
    if (lc.sweep_values.empty())
      throw std::invalid_argument("config has no sweep.values");
    const fluidctl::CouplingReport rep =
        fluidctl::coupling_sweep(lc.net, lc.sweep_values, lc.oracle);
    if (out_csv) {
      std::FILE* f = std::fopen(out_csv, "w");
      if (!f) throw fluidctl::IoError(std::string("cannot open for writing: ") +
                                      out_csv);
      std::fputs("L,e\n", f);
      for (size_t i = 0; i < rep.L.size(); ++i)
        std::fprintf(f, "%.12g,%.17g\n", rep.L[i], rep.e[i]);
      std::fclose(f);
    }
    if (slope_out) *slope_out = rep.slope;
  });
}

}  // extern "C"
