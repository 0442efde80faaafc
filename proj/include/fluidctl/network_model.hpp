#ifndef FLUIDCTL_NETWORK_MODEL_HPP
#define FLUIDCTL_NETWORK_MODEL_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "fluidctl/fluid_value.hpp"
#include "fluidctl/rng.hpp"

namespace fluidctl {

// K-pair interference network.  L(k, j) is the long-term path gain from
// transmitter j to receiver k; the diagonal mirrors the per-pair
// L_direct.  All times in ms, rates in pkts/ms (see PairParams).
struct NetworkConfig {
  int K = 0;
  std::vector<PairParams> pairs;
  std::vector<double> L_flat;  // row-major K x K
  int slots_per_epoch = 10;
  double q_cap = 200.0;        // packets; drop-tail truncation
  double rate_scale = 1.0;     // pkts/ms per nat of log(1+SINR)
  uint64_t rng_seed = 1;
  double tdma_weight = 1.0;    // water level weight of the TDMA baseline

  double L(int k, int j) const { return L_flat[static_cast<size_t>(k) * K + j]; }
  double& L(int k, int j) { return L_flat[static_cast<size_t>(k) * K + j]; }
  double tau() const { return pairs.at(0).tau; }
  double slot_duration() const { return tau() / slots_per_epoch; }
  // Weak-coupling measure: largest cross path gain.
  double coupling() const;
  void validate() const;  // throws std::invalid_argument
};

// Convenience builder for symmetric instances: identical pairs, uniform
// cross gain.
NetworkConfig make_symmetric_config(int K, const PairParams& pair,
                                    double L_cross);

struct ChannelState {
  int K = 0;
  std::vector<double> h2_flat;  // |H_kj|^2, row-major
  double h2(int k, int j) const {
    return h2_flat[static_cast<size_t>(k) * K + j];
  }
};

struct QueueState {
  std::vector<double> Q;  // packets
};

struct ArrivalBatch {
  std::vector<double> A;  // pkts/ms for this epoch (count / tau)
};

struct PowerProfile {
  std::vector<double> p;  // watts, one per transmitter
};

// One slot's fading draw.  Entries are filled row-major; row k pulls
// the diagonal from pair k's direct stream and the off-diagonals from
// its cross stream, so a pair's own-link sequence is unchanged whether
// it is simulated alone or jointly.
ChannelState sample_channel(const NetworkConfig& cfg,
                            std::span<PairStreams> streams);

// Poisson(lambda_k * tau) packets per pair, returned as a pkts/ms rate.
ArrivalBatch sample_arrivals(const NetworkConfig& cfg,
                             std::span<PairStreams> streams);

// rate_scale * log(1 + p_k L_kk |H_kk|^2 / (1 + sum_{j!=k} p_j L_kj |H_kj|^2))
double instantaneous_rate(const NetworkConfig& cfg, const ChannelState& h,
                          const PowerProfile& power, int k);

// Q'_k = min(Q_k - served_k + A_k * tau, q_cap).  `served` must not
// exceed the queue (throws "overdraft"); dropped packets are
// accumulated into `drops` when non-null.
QueueState step_queue(const NetworkConfig& cfg, const QueueState& q,
                      const std::vector<double>& served,
                      const ArrivalBatch& arrivals,
                      std::vector<double>* drops = nullptr);

// sum_k beta_k Q_k / lambda_k + gamma_k * mean_power_k
double stage_cost(const NetworkConfig& cfg, const QueueState& q,
                  const std::vector<double>& mean_power);

}  // namespace fluidctl

#endif
