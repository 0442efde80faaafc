#ifndef FLUIDCTL_MDP_ORACLE_HPP
#define FLUIDCTL_MDP_ORACLE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fluidctl/fluid_value.hpp"
#include "fluidctl/network_model.hpp"

namespace fluidctl {

// Exact small-instance machinery (K <= 2).  The epoch is modeled with
// one channel draw (the per-CSI policy optimizes each channel atom
// independently inside the Bellman minimization), arrivals are a
// truncated Poisson, and queue levels round to the nearest grid point
// with reflection at 0 and saturation at the cap.
struct OracleOptions {
  int queue_levels = 21;
  double q_step = 1.0;  // packets per grid step
  std::vector<double> power_grid = {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  int channel_atoms = 10;      // per link; exponential decile midpoints
  double arrival_tail = 1e-6;  // Poisson truncated at 1 - arrival_tail
  double tol = 1e-8;           // span seminorm stopping tolerance
  int max_sweeps = 50000;
  int n_threads = 1;
  bool want_policy = true;
};

struct DiscreteMdp {
  NetworkConfig cfg;
  OracleOptions opts;
  std::vector<double> queue_grid;                  // shared across pairs
  std::vector<double> channel_atom_h2;             // equal-weight atoms
  std::vector<std::vector<double>> arrival_prob;   // per pair, index = count

  size_t n_states() const;
  size_t n_joint_atoms() const;  // channel_atoms^(K*K)
  double q_of(int level) const { return queue_grid[level]; }
};

// Throws std::invalid_argument for K > 2 and std::runtime_error
// ("state explosion") above 1e6 joint queue states.
DiscreteMdp build_discrete_mdp(const NetworkConfig& cfg,
                               const OracleOptions& opts);

struct MdpSolution {
  std::vector<double> V;  // over joint queue states, V(0) = 0
  double theta = 0.0;     // optimal average cost per ms
  // Greedy power indices, [state][joint atom][pair] flattened; empty
  // unless want_policy.
  std::vector<uint8_t> policy;
  double span_residual = 0.0;
  double bellman_residual = 0.0;
  int sweeps = 0;
  bool converged = false;
};

MdpSolution relative_value_iteration(const DiscreteMdp& mdp, double tol,
                                     int max_sweeps);

// Dense transition row for one state under per-atom power choices
// (power_idx[atom][pair]), aggregated over channel atoms and arrivals.
// Rows sum to 1 by construction; exposed for kernel-level tests.
std::vector<double> transition_row(
    const DiscreteMdp& mdp, size_t state,
    const std::vector<std::vector<int>>& power_idx);

struct GapBin {
  double norm_lo = 0.0, norm_hi = 0.0;
  int count = 0;
  double mean_rel_gap = 0.0;
  double mean_abs_gap = 0.0;
  double max_abs_gap = 0.0;
};

// Per-state gap V(Q) - sum_k J_k(Q_k), binned into equal-count deciles
// of ||Q|| (the all-zero state is excluded from the bins).
struct GapReport {
  std::vector<double> gap;  // per state
  std::vector<GapBin> bins;
  double rel_smallest_decile = 0.0;
  double rel_largest_decile = 0.0;
};

GapReport approximation_gap(const DiscreteMdp& mdp, const MdpSolution& sol,
                            const std::vector<FluidValueTable>& tables);

struct CouplingReport {
  std::vector<double> L;  // swept cross gains (nonzero entries fitted)
  std::vector<double> e;  // max-state |V_L - V_0|
  double slope = 0.0;     // least-squares slope of log e vs log L
};

// Solves the K=2 oracle at each cross gain with identical grids and
// atoms, against the decoupled (L = 0) baseline.
CouplingReport coupling_sweep(const NetworkConfig& base,
                              const std::vector<double>& L_values,
                              const OracleOptions& opts);

// CSV export with header "q1,q2,V" (q2 = 0 for K = 1).
void write_solution_csv(const DiscreteMdp& mdp, const MdpSolution& sol,
                        const std::string& path);

}  // namespace fluidctl

#endif
