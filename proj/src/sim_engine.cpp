#include "fluidctl/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace fluidctl {

EpochMetrics run_epoch(const NetworkConfig& cfg, const Controller& ctrl,
                       QueueState& q, std::span<PairStreams> streams,
                       std::vector<double>* drops) {
  const int K = cfg.K;
  EpochMetrics em;
  em.end_queue.assign(K, 0.0);
  em.mean_power.assign(K, 0.0);
  em.served.assign(K, 0.0);

  const std::vector<double> weights = epoch_weights(ctrl, cfg, q);
  const double slot_ms = cfg.slot_duration();
  std::vector<double> q_rem = q.Q;

  for (int s = 0; s < cfg.slots_per_epoch; ++s) {
    const ChannelState h = sample_channel(cfg, streams);
    const PowerProfile prof =
        slot_powers(ctrl, cfg, h, weights, q_rem, slot_ms);
    for (int k = 0; k < K; ++k) {
      const double rate = instantaneous_rate(cfg, h, prof, k);
      const double served = std::min(rate * slot_ms, q_rem[k]);
      q_rem[k] -= served;
      em.served[k] += served;
      em.mean_power[k] += prof.p[k];
    }
  }
  for (int k = 0; k < K; ++k) em.mean_power[k] /= cfg.slots_per_epoch;

  const ArrivalBatch arrivals = sample_arrivals(cfg, streams);
  q = step_queue(cfg, q, em.served, arrivals, drops);
  em.end_queue = q.Q;
  em.cost = stage_cost(cfg, q, em.mean_power);
  return em;
}

namespace {

struct RepAccum {
  std::vector<double> queue, power, drops;
  double cost = 0.0;
  double win_a = 0.0, win_b = 0.0;
};

RepAccum run_replication(const SimSpec& spec, const Controller& ctrl, int rep) {
  const NetworkConfig& cfg = spec.cfg;
  const int K = cfg.K;
  std::vector<PairStreams> streams;
  streams.reserve(K);
  for (int k = 0; k < K; ++k)
    streams.push_back(make_pair_streams(cfg.rng_seed, rep, k));

  QueueState q;
  q.Q.assign(K, 0.0);
  std::vector<double> drop_acc(K, 0.0);

  RepAccum acc;
  acc.queue.assign(K, 0.0);
  acc.power.assign(K, 0.0);
  const int measured = spec.epochs - spec.warmup_epochs;
  const int wa_begin = spec.epochs / 2;
  const int wb_begin = (3 * spec.epochs) / 4;
  int wa_count = 0, wb_count = 0;

  for (int t = 0; t < spec.epochs; ++t) {
    const bool counting = t >= spec.warmup_epochs;
    const EpochMetrics em =
        run_epoch(cfg, ctrl, q, streams, counting ? &drop_acc : nullptr);
    double qbar = 0.0;
    for (int k = 0; k < K; ++k) qbar += em.end_queue[k];
    qbar /= K;
    if (counting) {
      for (int k = 0; k < K; ++k) {
        acc.queue[k] += em.end_queue[k];
        acc.power[k] += em.mean_power[k];
      }
      acc.cost += em.cost;
    }
    if (t >= wa_begin && t < wb_begin) { acc.win_a += qbar; ++wa_count; }
    if (t >= wb_begin) { acc.win_b += qbar; ++wb_count; }
  }

  for (int k = 0; k < K; ++k) {
    acc.queue[k] /= measured;
    acc.power[k] /= measured;
  }
  acc.cost /= measured;
  acc.drops.resize(K);
  for (int k = 0; k < K; ++k) acc.drops[k] = drop_acc[k] / measured;
  if (wa_count) acc.win_a /= wa_count;
  if (wb_count) acc.win_b /= wb_count;
  return acc;
}

double halfwidth95(const std::vector<double>& xs) {
  const size_t n = xs.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(n));
}

}  // namespace

SimResult run_simulation(const SimSpec& spec) {
  spec.cfg.validate();
  if (spec.warmup_epochs >= spec.epochs)
    throw std::invalid_argument("run_simulation: warmup must be < epochs");
  if (spec.replications < 1)
    throw std::invalid_argument("run_simulation: replications must be >= 1");

  const Controller ctrl = make_controller(spec.controller, spec.cfg, spec.game);
  const int R = spec.replications;
  std::vector<RepAccum> reps(R);

  const int threads = std::max(1, std::min(spec.n_threads, R));
  if (threads == 1) {
    for (int r = 0; r < R; ++r) reps[r] = run_replication(spec, ctrl, r);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t]() {
        for (int r = t; r < R; r += threads)
          reps[r] = run_replication(spec, ctrl, r);
      });
    }
    for (auto& th : pool) th.join();
  }

  const int K = spec.cfg.K;
  SimResult res;
  res.mean_queue.assign(K, 0.0);
  res.mean_power.assign(K, 0.0);
  res.drops.assign(K, 0.0);
  res.rep_cost.reserve(R);
  for (const RepAccum& a : reps) {  // merge in replication order
    for (int k = 0; k < K; ++k) {
      res.mean_queue[k] += a.queue[k] / R;
      res.mean_power[k] += a.power[k] / R;
      res.drops[k] += a.drops[k] / R;
    }
    res.mean_cost += a.cost / R;
    double d = 0.0, p = 0.0;
    for (int k = 0; k < K; ++k) {
      d += a.queue[k] / spec.cfg.pairs[k].lambda;
      p += a.power[k];
    }
    res.rep_cost.push_back(a.cost);
    res.rep_delay.push_back(d / K);
    res.rep_power.push_back(p / K);
    res.rep_queue_win_a.push_back(a.win_a);
    res.rep_queue_win_b.push_back(a.win_b);
  }
  res.mean_delay.resize(K);
  for (int k = 0; k < K; ++k)
    res.mean_delay[k] = res.mean_queue[k] / spec.cfg.pairs[k].lambda;
  res.ci_halfwidth.delay = halfwidth95(res.rep_delay);
  res.ci_halfwidth.power = halfwidth95(res.rep_power);
  res.ci_halfwidth.cost = halfwidth95(res.rep_cost);
  return res;
}

}  // namespace fluidctl
