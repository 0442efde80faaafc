#include "fluidctl/mdp_oracle.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "doctest.h"

using namespace fluidctl;

namespace {

PairParams pair_ms() { return {0.2, 0.05, 1.0, 1.0, 5.0}; }

NetworkConfig oracle_cfg(int K, double L_cross) {
  NetworkConfig cfg = make_symmetric_config(K, pair_ms(), L_cross);
  cfg.slots_per_epoch = 1;
  cfg.q_cap = 20.0;
  return cfg;
}

OracleOptions small_opts() {
  OracleOptions o;
  o.queue_levels = 7;
  o.power_grid = {0.0, 1.0, 4.0};
  o.channel_atoms = 3;
  o.tol = 1e-9;
  return o;
}

}  // namespace

TEST_CASE("transition rows are stochastic") {
  const DiscreteMdp mdp = build_discrete_mdp(oracle_cfg(2, 0.1), small_opts());
  // Probabilities of each truncated arrival list sum to one.
  for (const auto& pr : mdp.arrival_prob) {
    const double s = std::accumulate(pr.begin(), pr.end(), 0.0);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
  std::vector<std::vector<int>> policy(mdp.n_joint_atoms(),
                                       std::vector<int>{1, 2});
  for (size_t state : {size_t{0}, size_t{10}, mdp.n_states() - 1}) {
    const std::vector<double> row = transition_row(mdp, state, policy);
    const double s = std::accumulate(row.begin(), row.end(), 0.0);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("two-level kernel matches hand enumeration") {
  NetworkConfig cfg = oracle_cfg(1, 0.0);
  OracleOptions o;
  o.queue_levels = 2;
  o.power_grid = {0.0, 2.0};
  o.channel_atoms = 1;  // single atom at -ln(1/2)
  const DiscreteMdp mdp = build_discrete_mdp(cfg, o);
  REQUIRE(mdp.channel_atom_h2.size() == 1);
  const double atom = mdp.channel_atom_h2[0];
  CHECK(atom == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const auto& pr = mdp.arrival_prob[0];
  const double p_none = pr[0];
  // Service at full power over one epoch: log(1 + 2 ln 2) * 5 > 0.5
  // packets, so level 1 drains to level 0.
  const double service = std::log1p(2.0 * atom) * cfg.tau();
  REQUIRE(service > 0.5);

  // State 0: nothing to serve; next level is 1 unless no packet
  // arrives.
  const std::vector<double> row0 =
      transition_row(mdp, 0, {{1}});
  CHECK(row0[0] == doctest::Approx(p_none).epsilon(1e-12));
  CHECK(row0[1] == doctest::Approx(1.0 - p_none).epsilon(1e-12));

  // State 1 at full power drains, then arrivals may refill.
  const std::vector<double> row1 = transition_row(mdp, 1, {{1}});
  CHECK(row1[0] == doctest::Approx(p_none).epsilon(1e-12));
  CHECK(row1[1] == doctest::Approx(1.0 - p_none).epsilon(1e-12));

  // State 1 idle stays, and any arrival saturates at the cap.
  const std::vector<double> idle = transition_row(mdp, 1, {{0}});
  CHECK(idle[0] == 0.0);
  CHECK(idle[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("value iteration certifies its own Bellman equation") {
  const DiscreteMdp mdp = build_discrete_mdp(oracle_cfg(2, 0.1), small_opts());
  const MdpSolution sol = relative_value_iteration(mdp, 1e-9, 20000);
  CHECK(sol.converged);
  CHECK(sol.V[0] == 0.0);
  CHECK(sol.span_residual <= 1e-9);
  CHECK(sol.bellman_residual < 10.0 * 1e-9);
  CHECK(sol.theta > 0.0);
  REQUIRE(sol.policy.size() ==
          mdp.n_states() * mdp.n_joint_atoms() * 2);
}

TEST_CASE("fast engine agrees with the explicit kernel") {
  // Single channel atom so the per-atom action is the whole policy;
  // the slow route rebuilds the Bellman operator from dense rows.
  NetworkConfig cfg = oracle_cfg(2, 0.1);
  OracleOptions o = small_opts();
  o.channel_atoms = 1;
  o.queue_levels = 6;
  const DiscreteMdp mdp = build_discrete_mdp(cfg, o);
  const MdpSolution sol = relative_value_iteration(mdp, 1e-10, 20000);

  // The greedy choice must not depend on a constant shift of V.
  std::vector<double> shifted = sol.V;
  for (double& v : shifted) v += 123.0;

  const double theta_tau = sol.theta * cfg.tau();
  const int np = static_cast<int>(o.power_grid.size());
  for (size_t x = 0; x < mdp.n_states(); ++x) {
    double best = 1e300;
    int best_i0 = -1, best_i1 = -1;
    for (int i0 = 0; i0 < np; ++i0)
      for (int i1 = 0; i1 < np; ++i1) {
        const std::vector<double> row = transition_row(mdp, x, {{i0, i1}});
        const int q0 = static_cast<int>(x) / 6, q1 = static_cast<int>(x) % 6;
        double cost =
            cfg.tau() *
            (cfg.pairs[0].beta * mdp.queue_grid[q0] / cfg.pairs[0].lambda +
             cfg.pairs[1].beta * mdp.queue_grid[q1] / cfg.pairs[1].lambda +
             cfg.pairs[0].gamma * o.power_grid[i0] +
             cfg.pairs[1].gamma * o.power_grid[i1]);
        for (size_t nxt = 0; nxt < row.size(); ++nxt)
          cost += row[nxt] * shifted[nxt];
        if (cost < best) { best = cost; best_i0 = i0; best_i1 = i1; }
      }
    best -= 123.0;  // undo the shift carried through the expectation
    REQUIRE(std::fabs(theta_tau + sol.V[x] - best) < 1e-8);
    // Engine's stored greedy action equals the explicit-kernel one.
    REQUIRE(sol.policy[x * 2] == best_i0);
    REQUIRE(sol.policy[x * 2 + 1] == best_i1);
  }
}

TEST_CASE("near-free power doubles theta when beta doubles") {
  NetworkConfig cfg = oracle_cfg(1, 0.0);
  for (auto& p : cfg.pairs) p.gamma = 1e-12;
  OracleOptions o = small_opts();
  o.queue_levels = 9;
  const DiscreteMdp mdp = build_discrete_mdp(cfg, o);
  const double theta1 = relative_value_iteration(mdp, 1e-10, 20000).theta;

  NetworkConfig cfg2 = cfg;
  for (auto& p : cfg2.pairs) p.beta *= 2.0;
  const DiscreteMdp mdp2 = build_discrete_mdp(cfg2, o);
  const double theta2 = relative_value_iteration(mdp2, 1e-10, 20000).theta;
  CHECK(theta2 == doctest::Approx(2.0 * theta1).epsilon(1e-6));
}

TEST_CASE("drained system has zero average cost") {
  NetworkConfig cfg = oracle_cfg(1, 0.0);
  OracleOptions o = small_opts();
  DiscreteMdp mdp = build_discrete_mdp(cfg, o);
  mdp.arrival_prob[0] = {1.0};  // degenerate: no arrivals ever
  const MdpSolution sol = relative_value_iteration(mdp, 1e-11, 20000);
  CHECK(sol.theta == doctest::Approx(0.0).epsilon(1e-9));
  // Cost-to-drain grows with the starting queue.
  for (size_t x = 1; x < mdp.n_states(); ++x) CHECK(sol.V[x] > sol.V[x - 1]);
  // Greedy policy serves every nonempty queue and idles at zero.
  const size_t n_joint = mdp.n_joint_atoms();
  for (size_t x = 0; x < mdp.n_states(); ++x)
    for (size_t a = 0; a < n_joint; ++a) {
      const uint8_t ip = sol.policy[x * n_joint + a];
      if (x == 0) CHECK(ip == 0);
      else CHECK(o.power_grid[ip] > 0.0);
    }
}

TEST_CASE("decoupled joint oracle is additive across pairs") {
  NetworkConfig cfg = oracle_cfg(2, 0.0);
  cfg.pairs[1].gamma = 0.1;  // make the pairs distinguishable
  OracleOptions o = small_opts();
  o.queue_levels = 9;
  const double tol = 1e-9;
  const DiscreteMdp joint = build_discrete_mdp(cfg, o);
  const MdpSolution sj = relative_value_iteration(joint, tol, 30000);

  double theta_sum = 0.0;
  for (int k = 0; k < 2; ++k) {
    NetworkConfig solo = make_symmetric_config(1, cfg.pairs[k], 0.0);
    solo.slots_per_epoch = 1;
    solo.q_cap = cfg.q_cap;
    const DiscreteMdp m = build_discrete_mdp(solo, o);
    theta_sum += relative_value_iteration(m, tol, 30000).theta;
  }
  CHECK(sj.theta * cfg.tau() ==
        doctest::Approx(theta_sum * cfg.tau()).epsilon(1e-6));
}

TEST_CASE("approximation gap vanishes at the origin and reports bins") {
  NetworkConfig cfg = oracle_cfg(2, 0.1);
  OracleOptions o = small_opts();
  o.queue_levels = 11;
  o.power_grid = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0};
  o.channel_atoms = 4;
  const DiscreteMdp mdp = build_discrete_mdp(cfg, o);
  const MdpSolution sol = relative_value_iteration(mdp, 1e-8, 30000);
  std::vector<FluidValueTable> tables;
  for (int k = 0; k < 2; ++k)
    tables.push_back(build_fluid_table(cfg.pairs[k], 12.0));
  const GapReport rep = approximation_gap(mdp, sol, tables);
  CHECK(rep.gap[0] == 0.0);  // both sides anchored at zero
  REQUIRE(rep.bins.size() == 10);
  int count = 0;
  for (const GapBin& b : rep.bins) count += b.count;
  CHECK(count == static_cast<int>(mdp.n_states()) - 1);
  CHECK(rep.rel_largest_decile > 0.0);
}

TEST_CASE("coupling sweep is zero at zero and grows with the gain") {
  NetworkConfig cfg = oracle_cfg(2, 0.1);
  OracleOptions o = small_opts();
  o.queue_levels = 9;
  const CouplingReport rep = coupling_sweep(cfg, {0.0, 0.02, 0.08}, o);
  REQUIRE(rep.e.size() == 3);
  CHECK(rep.e[0] == 0.0);
  CHECK(rep.e[1] > 0.0);
  CHECK(rep.e[2] > rep.e[1]);
}

TEST_CASE("guard rails") {
  CHECK_THROWS_AS(
      build_discrete_mdp(oracle_cfg(3, 0.1), small_opts()),
      std::invalid_argument);
  OracleOptions o = small_opts();
  o.queue_levels = 255;  // 255^2 < 1e6, fine; push over with 3 pairs blocked
  CHECK_NOTHROW(build_discrete_mdp(oracle_cfg(2, 0.1), o));
  o.power_grid = {1.0, 0.5};
  CHECK_THROWS_AS(build_discrete_mdp(oracle_cfg(2, 0.1), o),
                  std::invalid_argument);
}
