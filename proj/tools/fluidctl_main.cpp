// fluidctl: fluid-value power control experiments for K-pair
// interference networks.  Thin shell over the fluidctl C API.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "fluidctl.h"

namespace {

int report(fluidctl_status st) {
  if (st == FLUIDCTL_OK) return 0;
  std::fprintf(stderr, "fluidctl: error (%d): %s\n", static_cast<int>(st),
               fluidctl_last_error());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fluid-value power control for K-pair interference networks"};
  app.require_subcommand(1);

  std::string cfg_path, plan_path, out_path, gap_path;
  int pair = 0;
  double q_max = 0.0;

  auto* table = app.add_subcommand("table", "Emit a per-flow fluid value "
                                            "table as CSV (header y,q,J)");
  table->add_option("config", cfg_path, "network config file")->required();
  table->add_option("--pair", pair, "pair index (default 0)");
  table->add_option("--qmax", q_max, "table range (default: queue cap)");
  table->add_option("-o,--output", out_path, "output CSV path")
      ->default_val("fluid_table.csv");

  auto* simulate =
      app.add_subcommand("simulate", "Run an experiment plan and write its "
                                     "result CSV");
  simulate->add_option("plan", plan_path, "experiment plan file")->required();

  auto* oracle = app.add_subcommand(
      "oracle", "Relative value iteration on the discretized instance plus "
                "the fluid-approximation gap report");
  oracle->add_option("config", cfg_path, "network config file")->required();
  oracle->add_option("-o,--output", out_path, "value function CSV (q1,q2,V)")
      ->default_val("oracle_V.csv");
  oracle->add_option("--gap", gap_path, "gap report CSV")
      ->default_val("oracle_gap.csv");

  auto* sweep = app.add_subcommand(
      "sweep-coupling", "Oracle sweep over cross gains; reports the log-log "
                        "slope of the value perturbation");
  sweep->add_option("config", cfg_path, "network config file")->required();
  sweep->add_option("-o,--output", out_path, "sweep CSV (L,e)")
      ->default_val("coupling_sweep.csv");

  CLI11_PARSE(app, argc, argv);

  if (table->parsed()) {
    const fluidctl_status st =
        fluidctl_emit_table_csv(cfg_path.c_str(), pair, q_max, out_path.c_str());
    if (st == FLUIDCTL_OK) std::printf("wrote %s\n", out_path.c_str());
    return report(st);
  }
  if (simulate->parsed()) {
    const fluidctl_status st = fluidctl_run_plan(plan_path.c_str());
    if (st == FLUIDCTL_OK) std::printf("plan complete\n");
    return report(st);
  }
  if (oracle->parsed()) {
    fluidctl_oracle_summary summary{};
    const fluidctl_status st = fluidctl_run_oracle(
        cfg_path.c_str(), out_path.c_str(), gap_path.c_str(), &summary);
    if (st == FLUIDCTL_OK) {
      std::printf("theta=%.10g per ms\n", summary.theta);
      std::printf("sweeps=%d span=%.3g bellman_residual=%.3g\n",
                  summary.sweeps, summary.span_residual,
                  summary.bellman_residual);
      std::printf("rel_gap smallest decile=%.6g largest decile=%.6g\n",
                  summary.rel_gap_smallest_decile,
                  summary.rel_gap_largest_decile);
      std::printf("wrote %s and %s\n", out_path.c_str(), gap_path.c_str());
    }
    return report(st);
  }
  if (sweep->parsed()) {
    double slope = 0.0;
    const fluidctl_status st = fluidctl_run_coupling_sweep(
        cfg_path.c_str(), out_path.c_str(), &slope);
    if (st == FLUIDCTL_OK) {
      std::printf("loglog slope=%.6g\n", slope);
      std::printf("wrote %s\n", out_path.c_str());
    }
    return report(st);
  }
  return 1;
}
