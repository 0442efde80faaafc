#ifndef FLUIDCTL_CONFIG_HPP
#define FLUIDCTL_CONFIG_HPP

#include <string>
#include <vector>

#include "fluidctl/controllers.hpp"
#include "fluidctl/mdp_oracle.hpp"
#include "fluidctl/network_model.hpp"

namespace fluidctl {

// Network + solver settings from one flat key-value file (`#`
// comments, `key = value` lines).  Arrival rates are given in packets
// per epoch and converted to pkts/ms by lambda_epoch / tau.  Parse
// problems raise ParseError with the offending line number; violated
// structural invariants raise std::invalid_argument prefixed
// "invariant violated".  The FLUIDCTL_SEED environment variable, when
// set, overrides the configured seed.
struct LoadedConfig {
  NetworkConfig net;
  GameConfig game;
  OracleOptions oracle;
  std::vector<double> sweep_values;  // sweep.values, for sweep-coupling
};

LoadedConfig parse_network_config(const std::string& path);

struct ExperimentPlan {
  enum class Sweep { kGamma, kLambda, kK, kCoupling };

  std::string name;
  std::string base_path;  // resolved relative to the plan file
  LoadedConfig base;
  Sweep sweep = Sweep::kGamma;
  std::vector<double> values;
  std::vector<ControllerKind> controllers;
  int epochs = 5000;
  int warmup_epochs = 1000;
  int replications = 8;
  int threads = 1;
  std::string output;
  bool emit_tables = false;
  bool oracle_compare = false;
};

ExperimentPlan parse_plan(const std::string& path);

// The base network with one sweep value applied.
NetworkConfig apply_sweep(const ExperimentPlan& plan, double value);

const char* sweep_var_name(ExperimentPlan::Sweep sweep);

// Runs every (value, controller) cell and writes the result CSV
// atomically (no partial file survives an error).  Header:
//   sweep_var,value,controller,mean_delay,mean_power,mean_cost,drops,
//   ci_delay,seed,slots_per_epoch
void run_plan(const ExperimentPlan& plan);

}  // namespace fluidctl

#endif
