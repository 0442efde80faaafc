#ifndef FLUIDCTL_SIM_ENGINE_HPP
#define FLUIDCTL_SIM_ENGINE_HPP

#include <vector>

#include "fluidctl/controllers.hpp"
#include "fluidctl/network_model.hpp"

namespace fluidctl {

struct SimSpec {
  NetworkConfig cfg;
  ControllerKind controller = ControllerKind::kProposed;
  GameConfig game;
  int epochs = 5000;
  int warmup_epochs = 1000;  // must be < epochs
  int replications = 1;
  int n_threads = 1;  // parallelism over replications only
};

struct CiHalfwidth {
  double delay = 0.0;
  double power = 0.0;
  double cost = 0.0;
};

// Post-warmup averages.  mean_delay is mean_queue / lambda (Little's
// law, computed rather than measured).  drops are dropped packets per
// epoch.  ci_halfwidth is the 95% normal interval across replications
// of the pair-averaged metrics.
struct SimResult {
  std::vector<double> mean_queue;
  std::vector<double> mean_delay;
  std::vector<double> mean_power;
  std::vector<double> drops;
  double mean_cost = 0.0;
  CiHalfwidth ci_halfwidth;

  // Per-replication pair-averaged metrics (replication order).
  std::vector<double> rep_cost;
  std::vector<double> rep_delay;
  std::vector<double> rep_power;
  // Windowed queue means over epochs [50%,75%) and [75%,100%) of the
  // horizon, for stability diagnostics.
  std::vector<double> rep_queue_win_a;
  std::vector<double> rep_queue_win_b;
};

struct EpochMetrics {
  std::vector<double> end_queue;
  std::vector<double> mean_power;  // time-averaged over slots
  std::vector<double> served;
  double cost = 0.0;
};

// Advances one epoch in place: per slot, sample the channel, run the
// controller, and serve with the per-slot queue cap; arrivals are added
// after service.  Weights are fixed at the epoch-start queue.
EpochMetrics run_epoch(const NetworkConfig& cfg, const Controller& ctrl,
                       QueueState& q, std::span<PairStreams> streams,
                       std::vector<double>* drops = nullptr);

// Deterministic for a fixed (seed, spec), independent of n_threads:
// replication r always uses streams derived from (seed, r, pair,
// purpose) and results merge in replication order.
SimResult run_simulation(const SimSpec& spec);

}  // namespace fluidctl

#endif
