#include "fluidctl/network_model.hpp"

#include <cmath>
#include <stdexcept>

namespace fluidctl {

double NetworkConfig::coupling() const {
  double m = 0.0;
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j)
      if (k != j) m = std::max(m, L(k, j));
  return m;
}

void NetworkConfig::validate() const {
  if (K < 1) throw std::invalid_argument("NetworkConfig: K must be >= 1");
  if (static_cast<int>(pairs.size()) != K)
    throw std::invalid_argument("NetworkConfig: pairs.size() != K");
  if (L_flat.size() != static_cast<size_t>(K) * K)
    throw std::invalid_argument("NetworkConfig: path gain matrix must be KxK");
  for (int k = 0; k < K; ++k) {
    pairs[k].validate();
    if (pairs[k].tau != pairs[0].tau)
      throw std::invalid_argument("NetworkConfig: all pairs share one tau");
    if (L(k, k) != pairs[k].L_direct)
      throw std::invalid_argument(
          "NetworkConfig: diagonal path gain must equal L_direct");
    for (int j = 0; j < K; ++j)
      if (!(L(k, j) >= 0.0) || !std::isfinite(L(k, j)))
        throw std::invalid_argument("NetworkConfig: path gains must be >= 0");
  }
  if (slots_per_epoch < 1)
    throw std::invalid_argument("NetworkConfig: slots_per_epoch must be >= 1");
  if (!(q_cap > 0.0))
    throw std::invalid_argument("NetworkConfig: q_cap must be positive");
  if (!(rate_scale > 0.0))
    throw std::invalid_argument("NetworkConfig: rate_scale must be positive");
}

NetworkConfig make_symmetric_config(int K, const PairParams& pair,
                                    double L_cross) {
  NetworkConfig cfg;
  cfg.K = K;
  cfg.pairs.assign(K, pair);
  cfg.L_flat.assign(static_cast<size_t>(K) * K, L_cross);
  for (int k = 0; k < K; ++k) cfg.L(k, k) = pair.L_direct;
  return cfg;
}

ChannelState sample_channel(const NetworkConfig& cfg,
                            std::span<PairStreams> streams) {
  ChannelState h;
  h.K = cfg.K;
  h.h2_flat.resize(static_cast<size_t>(cfg.K) * cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    for (int j = 0; j < cfg.K; ++j) {
      RngStream& s = (j == k) ? streams[k].direct : streams[k].cross;
      h.h2_flat[static_cast<size_t>(k) * cfg.K + j] = s.exponential();
    }
  }
  return h;
}

ArrivalBatch sample_arrivals(const NetworkConfig& cfg,
                             std::span<PairStreams> streams) {
  ArrivalBatch a;
  a.A.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    const int n = streams[k].arrivals.poisson(cfg.pairs[k].lambda * cfg.tau());
    a.A[k] = n / cfg.tau();
  }
  return a;
}

double instantaneous_rate(const NetworkConfig& cfg, const ChannelState& h,
                          const PowerProfile& power, int k) {
  double interference = 0.0;
  for (int j = 0; j < cfg.K; ++j)
    if (j != k) interference += power.p[j] * cfg.L(k, j) * h.h2(k, j);
  const double sinr =
      power.p[k] * cfg.L(k, k) * h.h2(k, k) / (1.0 + interference);
  return cfg.rate_scale * std::log1p(sinr);
}

QueueState step_queue(const NetworkConfig& cfg, const QueueState& q,
                      const std::vector<double>& served,
                      const ArrivalBatch& arrivals,
                      std::vector<double>* drops) {
  QueueState next;
  next.Q.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    if (served[k] > q.Q[k] + 1e-9) {
      throw std::runtime_error("overdraft: served exceeds queue");
    }
    const double after =
        std::max(q.Q[k] - served[k], 0.0) + arrivals.A[k] * cfg.tau();
    next.Q[k] = std::min(after, cfg.q_cap);
    if (drops) (*drops)[k] += after - next.Q[k];
  }
  return next;
}

double stage_cost(const NetworkConfig& cfg, const QueueState& q,
                  const std::vector<double>& mean_power) {
  double c = 0.0;
  for (int k = 0; k < cfg.K; ++k) {
    c += cfg.pairs[k].beta * q.Q[k] / cfg.pairs[k].lambda +
         cfg.pairs[k].gamma * mean_power[k];
  }
  return c;
}

}  // namespace fluidctl
