#include "fluidctl/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fluidctl {

ControllerKind controller_kind_from_string(const std::string& name) {
  if (name == "PROPOSED") return ControllerKind::kProposed;
  if (name == "TDMA") return ControllerKind::kTdma;
  if (name == "CSI_ONLY") return ControllerKind::kCsiOnly;
  if (name == "QWTO") return ControllerKind::kQwto;
  throw std::invalid_argument("unknown controller: " + name);
}

const char* controller_kind_name(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kProposed: return "PROPOSED";
    case ControllerKind::kTdma: return "TDMA";
    case ControllerKind::kCsiOnly: return "CSI_ONLY";
    case ControllerKind::kQwto: return "QWTO";
  }
  return "?";
}

double waterfill_decoupled(double weight, const PairParams& params,
                           double h2_direct, double rate_scale) {
  const double lh2 = params.L_direct * h2_direct;
  if (!(lh2 > 0.0)) return 0.0;
  return std::max(0.0,
                  weight * params.tau * rate_scale / params.gamma - 1.0 / lh2);
}

double power_cap(double q_remaining, double L_direct, double h2_direct,
                 double interference, double slot_ms, double rate_scale) {
  if (!(q_remaining > 0.0)) return 0.0;
  const double lh2 = L_direct * h2_direct;
  if (!(lh2 > 0.0)) return 0.0;
  const double target = q_remaining / (rate_scale * slot_ms);
  if (target > 700.0) return std::numeric_limits<double>::infinity();
  return (1.0 + interference) * std::expm1(target) / lh2;
}

namespace {

double interference_at(const NetworkConfig& cfg, const ChannelState& h,
                       const PowerProfile& power, int k) {
  double s = 0.0;
  for (int j = 0; j < cfg.K; ++j)
    if (j != k) s += power.p[j] * cfg.L(k, j) * h.h2(k, j);
  return s;
}

// sum_{j!=k} m_j L_jk |H_jk|^2: the interference price pair k pays.
double message_price(const NetworkConfig& cfg, const ChannelState& h,
                     const MessageSet& msgs, int k) {
  double s = 0.0;
  for (int j = 0; j < cfg.K; ++j)
    if (j != k) s += msgs.m[j] * cfg.L(j, k) * h.h2(j, k);
  return s;
}

}  // namespace

MessageSet compute_messages(const std::vector<double>& weights,
                            const NetworkConfig& cfg, const ChannelState& h,
                            const PowerProfile& power) {
  MessageSet msgs;
  msgs.m.resize(cfg.K);
  for (int j = 0; j < cfg.K; ++j) {
    const double I_j = interference_at(cfg, h, power, j);
    const double S_j = power.p[j] * cfg.L(j, j) * h.h2(j, j);
    const double upsilon = S_j / (1.0 + I_j);
    const double psi = 1.0 + I_j + S_j;
    msgs.m[j] = weights[j] * cfg.tau() * cfg.rate_scale * upsilon / psi;
  }
  return msgs;
}

double best_response_power(int k, const std::vector<double>& weights,
                           const NetworkConfig& cfg, const ChannelState& h,
                           const PowerProfile& power, const MessageSet& msgs,
                           double q_k, double slot_ms) {
  const double lh2 = cfg.L(k, k) * h.h2(k, k);
  if (!(lh2 > 0.0)) return 0.0;
  const double I_k = interference_at(cfg, h, power, k);
  const double denom = message_price(cfg, h, msgs, k) + cfg.pairs[k].gamma;
  const double level =
      weights[k] * cfg.tau() * cfg.rate_scale / denom - (1.0 + I_k) / lh2;
  const double p_up = power_cap(q_k, cfg.L(k, k), h.h2(k, k), I_k, slot_ms,
                                cfg.rate_scale);
  return std::min(std::max(level, 0.0), p_up);
}

double local_objective(int k, const std::vector<double>& weights,
                       const NetworkConfig& cfg, const ChannelState& h,
                       const PowerProfile& power, const MessageSet& msgs) {
  const double I_k = interference_at(cfg, h, power, k);
  const double sinr = power.p[k] * cfg.L(k, k) * h.h2(k, k) / (1.0 + I_k);
  return weights[k] * cfg.tau() * cfg.rate_scale * std::log1p(sinr) -
         power.p[k] * (message_price(cfg, h, msgs, k) + cfg.pairs[k].gamma);
}

GameResult solve_game(const std::vector<double>& weights,
                      const NetworkConfig& cfg, const ChannelState& h,
                      const std::vector<double>& q_remaining,
                      const GameConfig& game, double slot_ms) {
  GameResult res;
  res.power.p.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    const double wf =
        waterfill_decoupled(weights[k], cfg.pairs[k], h.h2(k, k),
                            cfg.rate_scale);
    const double cap = power_cap(q_remaining[k], cfg.L(k, k), h.h2(k, k), 0.0,
                                 slot_ms, cfg.rate_scale);
    res.power.p[k] = std::min(wf, cap);
  }

  PowerProfile next = res.power;
  double delta = std::numeric_limits<double>::infinity();
  while (res.rounds < game.max_rounds) {
    const MessageSet msgs = compute_messages(weights, cfg, h, res.power);
    delta = 0.0;
    for (int k = 0; k < cfg.K; ++k) {
      next.p[k] = best_response_power(k, weights, cfg, h, res.power, msgs,
                                      q_remaining[k], slot_ms);
      delta = std::max(delta, std::fabs(next.p[k] - res.power.p[k]));
    }
    std::swap(res.power.p, next.p);
    ++res.rounds;
    if (delta < game.term_tol) break;
  }

  // Projected-gradient residual of f_k at the returned profile; the
  // projection onto [0, p_up] keeps the certificate meaningful at
  // boundary solutions.
  const MessageSet msgs = compute_messages(weights, cfg, h, res.power);
  double stat = 0.0;
  for (int k = 0; k < cfg.K; ++k) {
    const double lh2 = cfg.L(k, k) * h.h2(k, k);
    const double I_k = interference_at(cfg, h, res.power, k);
    const double psi = 1.0 + I_k + res.power.p[k] * lh2;
    const double grad = weights[k] * cfg.tau() * cfg.rate_scale * lh2 / psi -
                        (message_price(cfg, h, msgs, k) + cfg.pairs[k].gamma);
    const double p_up = power_cap(q_remaining[k], cfg.L(k, k), h.h2(k, k),
                                  I_k, slot_ms, cfg.rate_scale);
    const double projected =
        std::clamp(res.power.p[k] + grad, 0.0, p_up);
    stat = std::max(stat, std::fabs(res.power.p[k] - projected));
  }
  res.stationarity = stat;
  res.converged = delta < game.term_tol || stat <= 10.0 * game.term_tol;
  return res;
}

PowerProfile tdma_controller(const NetworkConfig& cfg, const ChannelState& h,
                             const std::vector<double>& q_remaining,
                             double slot_ms) {
  PowerProfile prof;
  prof.p.assign(cfg.K, 0.0);
  int best = 0;
  for (int k = 1; k < cfg.K; ++k)
    if (cfg.L(k, k) * h.h2(k, k) > cfg.L(best, best) * h.h2(best, best))
      best = k;
  const double wf = waterfill_decoupled(cfg.tdma_weight, cfg.pairs[best],
                                        h.h2(best, best), cfg.rate_scale);
  const double cap = power_cap(q_remaining[best], cfg.L(best, best),
                               h.h2(best, best), 0.0, slot_ms, cfg.rate_scale);
  prof.p[best] = std::min(wf, cap);
  return prof;
}

Controller make_controller(ControllerKind kind, const NetworkConfig& cfg,
                           const GameConfig& game) {
  Controller ctrl;
  ctrl.kind = kind;
  ctrl.game = game;
  if (kind == ControllerKind::kProposed) {
    ctrl.tables.reserve(cfg.K);
    for (int k = 0; k < cfg.K; ++k) {
      ctrl.tables.push_back(
          build_fluid_table(cfg.pairs[k], cfg.q_cap * 1.02 + 1.0));
    }
  }
  return ctrl;
}

std::vector<double> epoch_weights(const Controller& ctrl,
                                  const NetworkConfig& cfg,
                                  const QueueState& q) {
  std::vector<double> w(cfg.K, 1.0);
  switch (ctrl.kind) {
    case ControllerKind::kProposed:
      for (int k = 0; k < cfg.K; ++k)
        w[k] = eval_J_prime(ctrl.tables[k], std::min(q.Q[k], cfg.q_cap));
      break;
    case ControllerKind::kQwto:
      for (int k = 0; k < cfg.K; ++k) w[k] = q.Q[k];
      break;
    case ControllerKind::kCsiOnly:
    case ControllerKind::kTdma:
      break;
  }
  return w;
}

PowerProfile slot_powers(const Controller& ctrl, const NetworkConfig& cfg,
                         const ChannelState& h,
                         const std::vector<double>& weights,
                         const std::vector<double>& q_remaining,
                         double slot_ms) {
  if (ctrl.kind == ControllerKind::kTdma) {
    return tdma_controller(cfg, h, q_remaining, slot_ms);
  }
  return solve_game(weights, cfg, h, q_remaining, ctrl.game, slot_ms).power;
}

}  // namespace fluidctl
