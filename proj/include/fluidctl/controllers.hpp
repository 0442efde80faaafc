#ifndef FLUIDCTL_CONTROLLERS_HPP
#define FLUIDCTL_CONTROLLERS_HPP

#include <string>
#include <vector>

#include "fluidctl/network_model.hpp"

namespace fluidctl {

// Receiver-broadcast messages for one CSI realization:
//   m_j = w_j * tau * rate_scale * Upsilon_j / Psi_j
// with Upsilon_j the SINR and Psi_j the total received signal plus
// noise at receiver j, both locally measurable.
struct MessageSet {
  std::vector<double> m;
};

struct GameConfig {
  double term_tol = 1e-8;  // watts, max per-pair power change per round
  int max_rounds = 200;
};

enum class ControllerKind { kProposed, kTdma, kCsiOnly, kQwto };

ControllerKind controller_kind_from_string(const std::string& name);
const char* controller_kind_name(ControllerKind kind);

struct GameResult {
  PowerProfile power;
  int rounds = 0;
  double stationarity = 0.0;  // projected-gradient residual at the result
  bool converged = true;
};

// Decoupled water-filling: (weight * tau * rate_scale / gamma - 1 / (L h2))^+.
double waterfill_decoupled(double weight, const PairParams& params,
                           double h2_direct, double rate_scale = 1.0);

// Largest power that serves exactly the remaining queue in one slot:
// solves rate_scale * log(1 + p L h2 / (1 + interference)) * slot_ms = q.
// Returns +inf when the cap cannot bind at representable powers.
double power_cap(double q_remaining, double L_direct, double h2_direct,
                 double interference, double slot_ms, double rate_scale);

MessageSet compute_messages(const std::vector<double>& weights,
                            const NetworkConfig& cfg, const ChannelState& h,
                            const PowerProfile& power);

// Capped multi-level water-filling update for pair k given the current
// messages and interferer powers.
double best_response_power(int k, const std::vector<double>& weights,
                           const NetworkConfig& cfg, const ChannelState& h,
                           const PowerProfile& power, const MessageSet& msgs,
                           double q_k, double slot_ms);

// Local payoff f_k; strictly concave in p_k.  Diagnostic surface for
// the stationarity residual and the gradient-condition tests.
double local_objective(int k, const std::vector<double>& weights,
                       const NetworkConfig& cfg, const ChannelState& h,
                       const PowerProfile& power, const MessageSet& msgs);

// Synchronous best-response iteration (all messages, then all powers)
// from the decoupled water-filling profile.  `q_remaining` drives the
// per-slot power caps.  A round-limit exit with stationarity residual
// above 10 * term_tol reports converged = false; the profile is still
// returned for inspection.
GameResult solve_game(const std::vector<double>& weights,
                      const NetworkConfig& cfg, const ChannelState& h,
                      const std::vector<double>& q_remaining,
                      const GameConfig& game, double slot_ms);

// Baseline 1: only the pair with the largest direct channel gain
// transmits (ties to the lowest index), at the weight-1 water level
// capped by its queue.
PowerProfile tdma_controller(const NetworkConfig& cfg, const ChannelState& h,
                             const std::vector<double>& q_remaining,
                             double slot_ms);

// A fully assembled controller: kind, game settings, and (for the
// proposed scheme) calibrated per-pair fluid tables covering q_cap.
// Immutable after construction; shareable across simulation threads.
struct Controller {
  ControllerKind kind = ControllerKind::kProposed;
  GameConfig game;
  std::vector<FluidValueTable> tables;  // kProposed only
};

Controller make_controller(ControllerKind kind, const NetworkConfig& cfg,
                           const GameConfig& game = {});

// Per-epoch weights from the epoch-start queue: J'_k(Q_k) for the
// proposed scheme, 1 for CSI-only, Q_k for queue-weighted.
std::vector<double> epoch_weights(const Controller& ctrl,
                                  const NetworkConfig& cfg,
                                  const QueueState& q);

// One slot's power decision for any controller kind.
PowerProfile slot_powers(const Controller& ctrl, const NetworkConfig& cfg,
                         const ChannelState& h,
                         const std::vector<double>& weights,
                         const std::vector<double>& q_remaining,
                         double slot_ms);

}  // namespace fluidctl

#endif
