#include "fluidctl/mdp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <thread>

namespace fluidctl {

size_t DiscreteMdp::n_states() const {
  size_t n = 1;
  for (int k = 0; k < cfg.K; ++k) n *= queue_grid.size();
  return n;
}

size_t DiscreteMdp::n_joint_atoms() const {
  size_t n = 1;
  for (int i = 0; i < cfg.K * cfg.K; ++i) n *= channel_atom_h2.size();
  return n;
}

DiscreteMdp build_discrete_mdp(const NetworkConfig& cfg,
                               const OracleOptions& opts) {
  cfg.validate();
  if (cfg.K > 2)
    throw std::invalid_argument("build_discrete_mdp: K <= 2 required");
  if (opts.queue_levels < 2 || opts.queue_levels > 255 ||
      opts.power_grid.empty() || opts.power_grid.size() > 255 ||
      opts.channel_atoms < 1)
    throw std::invalid_argument("build_discrete_mdp: bad grids");
  for (size_t i = 1; i < opts.power_grid.size(); ++i)
    if (!(opts.power_grid[i] > opts.power_grid[i - 1]))
      throw std::invalid_argument(
          "build_discrete_mdp: power grid must be strictly increasing");

  DiscreteMdp mdp;
  mdp.cfg = cfg;
  mdp.opts = opts;
  mdp.queue_grid.resize(opts.queue_levels);
  for (int i = 0; i < opts.queue_levels; ++i)
    mdp.queue_grid[i] = i * opts.q_step;

  if (mdp.n_states() > 1000000) throw std::runtime_error("state explosion");

  // Exponential decile-midpoint atoms, equal weights.
  mdp.channel_atom_h2.resize(opts.channel_atoms);
  for (int i = 0; i < opts.channel_atoms; ++i) {
    const double u = (i + 0.5) / opts.channel_atoms;
    mdp.channel_atom_h2[i] = -std::log1p(-u);
  }

  // Poisson(lambda * tau) truncated at the 1 - arrival_tail quantile,
  // renormalized.
  mdp.arrival_prob.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    const double mean = cfg.pairs[k].lambda * cfg.tau();
    std::vector<double>& pr = mdp.arrival_prob[k];
    double p = std::exp(-mean), cum = p;
    pr.push_back(p);
    while (cum < 1.0 - opts.arrival_tail && pr.size() < 400) {
      p *= mean / pr.size();
      pr.push_back(p);
      cum += p;
    }
    for (double& x : pr) x /= cum;
  }
  return mdp;
}

namespace {

double service_pkts(const NetworkConfig& cfg, int k, double atom_own,
                    double atom_cross, double p_own, double p_other) {
  double interference = 0.0;
  if (cfg.K == 2) {
    interference = p_other * cfg.L(k, 1 - k) * atom_cross;
  }
  const double sinr = p_own * cfg.L(k, k) * atom_own / (1.0 + interference);
  return cfg.rate_scale * std::log1p(sinr) * cfg.tau();
}

int post_service_idx(const DiscreteMdp& mdp, int q_level, double service) {
  const double q = mdp.queue_grid[q_level];
  const double v = q - std::min(service, q);
  const int idx = static_cast<int>(std::llround(v / mdp.opts.q_step));
  return std::clamp(idx, 0, static_cast<int>(mdp.queue_grid.size()) - 1);
}

// Precomputed sweep machinery shared by the value iteration, the
// Bellman-residual certificate, and the policy extraction.
struct SweepEngine {
  const DiscreteMdp& mdp;
  int K, nq, na, np;
  size_t n_states, n_joint;
  double w_joint;
  std::vector<double> base_cost;  // tau * sum_k beta_k q_k / lambda_k
  std::vector<double> pc;         // tau * sum_k gamma_k p_k, per action combo
  // Post-service next index per pair: K=1 [q][a][ip]; K=2 flattened
  // [q][a_own][a_cross][ip0][ip1] (global power order for both pairs).
  std::vector<uint8_t> nidx0, nidx1;
  std::vector<double> T;  // E_A V(. + A) on the post-service grid
  std::vector<double> U;  // scratch for the K=2 tensor pass

  explicit SweepEngine(const DiscreteMdp& m)
      : mdp(m),
        K(m.cfg.K),
        nq(static_cast<int>(m.queue_grid.size())),
        na(static_cast<int>(m.channel_atom_h2.size())),
        np(static_cast<int>(m.opts.power_grid.size())),
        n_states(m.n_states()),
        n_joint(m.n_joint_atoms()) {
    w_joint = 1.0;
    for (int i = 0; i < K * K; ++i) w_joint /= na;
    const auto& grid = m.opts.power_grid;
    const double tau = m.cfg.tau();

    base_cost.resize(n_states);
    for (size_t x = 0; x < n_states; ++x) {
      double c = 0.0;
      size_t rem = x;
      for (int k = K - 1; k >= 0; --k) {
        const int lvl = static_cast<int>(rem % nq);
        rem /= nq;
        c += m.cfg.pairs[k].beta * m.queue_grid[lvl] / m.cfg.pairs[k].lambda;
      }
      base_cost[x] = tau * c;
    }

    if (K == 1) {
      pc.resize(np);
      for (int i = 0; i < np; ++i)
        pc[i] = tau * m.cfg.pairs[0].gamma * grid[i];
      nidx0.resize(static_cast<size_t>(nq) * na * np);
      for (int q = 0; q < nq; ++q)
        for (int a = 0; a < na; ++a)
          for (int i = 0; i < np; ++i) {
            const double s =
                service_pkts(m.cfg, 0, m.channel_atom_h2[a], 0.0, grid[i], 0.0);
            nidx0[(static_cast<size_t>(q) * na + a) * np + i] =
                static_cast<uint8_t>(post_service_idx(m, q, s));
          }
      T.resize(nq);
    } else {
      pc.resize(static_cast<size_t>(np) * np);
      for (int i0 = 0; i0 < np; ++i0)
        for (int i1 = 0; i1 < np; ++i1)
          pc[static_cast<size_t>(i0) * np + i1] =
              tau * (m.cfg.pairs[0].gamma * grid[i0] +
                     m.cfg.pairs[1].gamma * grid[i1]);
      const size_t per_pair =
          static_cast<size_t>(nq) * na * na * np * np;
      nidx0.resize(per_pair);
      nidx1.resize(per_pair);
      for (int q = 0; q < nq; ++q)
        for (int ao = 0; ao < na; ++ao)
          for (int ac = 0; ac < na; ++ac)
            for (int i0 = 0; i0 < np; ++i0)
              for (int i1 = 0; i1 < np; ++i1) {
                const size_t at =
                    (((static_cast<size_t>(q) * na + ao) * na + ac) * np + i0) *
                        np + i1;
                const double s0 = service_pkts(
                    m.cfg, 0, m.channel_atom_h2[ao], m.channel_atom_h2[ac],
                    grid[i0], grid[i1]);
                nidx0[at] = static_cast<uint8_t>(post_service_idx(m, q, s0));
                const double s1 = service_pkts(
                    m.cfg, 1, m.channel_atom_h2[ao], m.channel_atom_h2[ac],
                    grid[i1], grid[i0]);
                nidx1[at] = static_cast<uint8_t>(post_service_idx(m, q, s1));
              }
      T.resize(static_cast<size_t>(nq) * nq);
      U.resize(T.size());
    }
  }

  // T = E over arrivals of V at the capped next level(s).
  void build_arrival_expectation(const std::vector<double>& V) {
    const int cap = nq - 1;
    if (K == 1) {
      const auto& pr = mdp.arrival_prob[0];
      for (int j = 0; j < nq; ++j) {
        double acc = 0.0;
        for (size_t c = 0; c < pr.size(); ++c)
          acc += pr[c] * V[std::min<int>(j + offset(c), cap)];
        T[j] = acc;
      }
    } else {
      const auto& pr1 = mdp.arrival_prob[1];
      for (int j0 = 0; j0 < nq; ++j0)
        for (int j1 = 0; j1 < nq; ++j1) {
          double acc = 0.0;
          for (size_t c = 0; c < pr1.size(); ++c)
            acc += pr1[c] *
                   V[static_cast<size_t>(j0) * nq + std::min<int>(j1 + offset(c), cap)];
          U[static_cast<size_t>(j0) * nq + j1] = acc;
        }
      const auto& pr0 = mdp.arrival_prob[0];
      for (int j0 = 0; j0 < nq; ++j0)
        for (int j1 = 0; j1 < nq; ++j1) {
          double acc = 0.0;
          for (size_t c = 0; c < pr0.size(); ++c)
            acc += pr0[c] *
                   U[static_cast<size_t>(std::min<int>(j0 + offset(c), cap)) * nq + j1];
          T[static_cast<size_t>(j0) * nq + j1] = acc;
        }
    }
  }

  int offset(size_t count) const {
    return static_cast<int>(std::llround(count / mdp.opts.q_step));
  }

  // One Bellman application at state x; optionally records the greedy
  // per-atom power indices.
  double bellman_at(size_t x, uint8_t* policy_slice) const {
    if (K == 1) {
      const uint8_t* nb = &nidx0[x * na * np];
      double acc = 0.0;
      for (int a = 0; a < na; ++a) {
        const uint8_t* row = nb + static_cast<size_t>(a) * np;
        double best = std::numeric_limits<double>::infinity();
        int best_i = 0;
        for (int i = 0; i < np; ++i) {
          const double cand = pc[i] + T[row[i]];
          if (cand < best) { best = cand; best_i = i; }
        }
        acc += best;
        if (policy_slice) policy_slice[a] = static_cast<uint8_t>(best_i);
      }
      return base_cost[x] + w_joint * acc;
    }

    const int q0 = static_cast<int>(x) / nq;
    const int q1 = static_cast<int>(x) % nq;
    const size_t stride_a = static_cast<size_t>(np) * np;
    const uint8_t* n0q = &nidx0[static_cast<size_t>(q0) * na * na * stride_a];
    const uint8_t* n1q = &nidx1[static_cast<size_t>(q1) * na * na * stride_a];
    const int nn = np * np;
    double acc = 0.0;
    for (int a00 = 0; a00 < na; ++a00)
      for (int a01 = 0; a01 < na; ++a01) {
        const uint8_t* p0 = n0q + (static_cast<size_t>(a00) * na + a01) * stride_a;
        for (int a10 = 0; a10 < na; ++a10)
          for (int a11 = 0; a11 < na; ++a11) {
            const uint8_t* p1 =
                n1q + (static_cast<size_t>(a11) * na + a10) * stride_a;
            double best = std::numeric_limits<double>::infinity();
            int best_i = 0;
            for (int i = 0; i < nn; ++i) {
              const double cand =
                  pc[i] + T[static_cast<size_t>(p0[i]) * nq + p1[i]];
              if (cand < best) { best = cand; best_i = i; }
            }
            acc += best;
            if (policy_slice) {
              const size_t joint =
                  ((static_cast<size_t>(a00) * na + a01) * na + a10) * na + a11;
              policy_slice[joint * 2] = static_cast<uint8_t>(best_i / np);
              policy_slice[joint * 2 + 1] = static_cast<uint8_t>(best_i % np);
            }
          }
      }
    return base_cost[x] + w_joint * acc;
  }

  // Full sweep W = (Bellman op)(V); parallel over states, each state
  // computed by a single thread so results do not depend on the thread
  // count.
  void apply(const std::vector<double>& V, std::vector<double>& W,
             int n_threads, uint8_t* policy) {
    build_arrival_expectation(V);
    const int threads = std::max(1, n_threads);
    auto worker = [&](size_t begin, size_t end) {
      for (size_t x = begin; x < end; ++x) {
        uint8_t* slice =
            policy ? policy + x * n_joint * static_cast<size_t>(K) : nullptr;
        W[x] = bellman_at(x, slice);
      }
    };
    if (threads == 1 || n_states < 2 * static_cast<size_t>(threads)) {
      worker(0, n_states);
      return;
    }
    std::vector<std::thread> pool;
    const size_t chunk = (n_states + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const size_t b = std::min(n_states, t * chunk);
      const size_t e = std::min(n_states, b + chunk);
      if (b < e) pool.emplace_back(worker, b, e);
    }
    for (auto& th : pool) th.join();
  }
};

}  // namespace

MdpSolution relative_value_iteration(const DiscreteMdp& mdp, double tol,
                                     int max_sweeps) {
  if (!(tol > 0.0) || max_sweeps < 1)
    throw std::invalid_argument("relative_value_iteration: bad arguments");
  SweepEngine eng(mdp);
  const size_t n = eng.n_states;

  MdpSolution sol;
  sol.V.assign(n, 0.0);
  std::vector<double> W(n);

  double span = std::numeric_limits<double>::infinity();
  int sweep = 0;
  while (sweep < max_sweeps) {
    eng.apply(sol.V, W, mdp.opts.n_threads, nullptr);
    ++sweep;
    double dmin = W[0] - sol.V[0], dmax = dmin;
    for (size_t x = 1; x < n; ++x) {
      const double d = W[x] - sol.V[x];
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    span = dmax - dmin;
    const double anchor = W[0];
    for (size_t x = 0; x < n; ++x) sol.V[x] = W[x] - anchor;
    if (span <= tol) break;
  }
  sol.sweeps = sweep;
  sol.span_residual = span;
  sol.converged = span <= tol;
  if (!sol.converged)
    throw std::runtime_error("no convergence in relative_value_iteration");

  // Certificate pass: residual of the Bellman equation at the returned
  // (theta, V), plus the greedy policy.
  if (mdp.opts.want_policy)
    sol.policy.assign(n * eng.n_joint * static_cast<size_t>(eng.K), 0);
  eng.apply(sol.V, W, mdp.opts.n_threads,
            mdp.opts.want_policy ? sol.policy.data() : nullptr);
  double dmin = W[0] - sol.V[0], dmax = dmin;
  for (size_t x = 1; x < n; ++x) {
    const double d = W[x] - sol.V[x];
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  const double theta_tau = 0.5 * (dmin + dmax);
  sol.theta = theta_tau / mdp.cfg.tau();
  double resid = 0.0;
  for (size_t x = 0; x < n; ++x)
    resid = std::max(resid, std::fabs(theta_tau + sol.V[x] - W[x]));
  sol.bellman_residual = resid;
  return sol;
}

std::vector<double> transition_row(
    const DiscreteMdp& mdp, size_t state,
    const std::vector<std::vector<int>>& power_idx) {
  const int K = mdp.cfg.K;
  const int nq = static_cast<int>(mdp.queue_grid.size());
  const int na = static_cast<int>(mdp.channel_atom_h2.size());
  const int cap = nq - 1;
  const size_t n_joint = mdp.n_joint_atoms();
  if (power_idx.size() != n_joint)
    throw std::invalid_argument("transition_row: one power vector per atom");
  double w_joint = 1.0;
  for (int i = 0; i < K * K; ++i) w_joint /= na;

  std::vector<double> row(mdp.n_states(), 0.0);
  const auto& grid = mdp.opts.power_grid;
  for (size_t joint = 0; joint < n_joint; ++joint) {
    if (K == 1) {
      const int a = static_cast<int>(joint);
      const double s =
          service_pkts(mdp.cfg, 0, mdp.channel_atom_h2[a], 0.0,
                       grid[power_idx[joint][0]], 0.0);
      const int j = post_service_idx(mdp, static_cast<int>(state), s);
      const auto& pr = mdp.arrival_prob[0];
      for (size_t c = 0; c < pr.size(); ++c) {
        const int nxt = std::min<int>(
            j + static_cast<int>(std::llround(c / mdp.opts.q_step)), cap);
        row[nxt] += w_joint * pr[c];
      }
    } else {
      size_t rem = joint;
      const int a11 = static_cast<int>(rem % na); rem /= na;
      const int a10 = static_cast<int>(rem % na); rem /= na;
      const int a01 = static_cast<int>(rem % na); rem /= na;
      const int a00 = static_cast<int>(rem % na);
      const int q0 = static_cast<int>(state) / nq;
      const int q1 = static_cast<int>(state) % nq;
      const double p0 = grid[power_idx[joint][0]];
      const double p1 = grid[power_idx[joint][1]];
      const double s0 = service_pkts(mdp.cfg, 0, mdp.channel_atom_h2[a00],
                                     mdp.channel_atom_h2[a01], p0, p1);
      const double s1 = service_pkts(mdp.cfg, 1, mdp.channel_atom_h2[a11],
                                     mdp.channel_atom_h2[a10], p1, p0);
      const int j0 = post_service_idx(mdp, q0, s0);
      const int j1 = post_service_idx(mdp, q1, s1);
      const auto& pr0 = mdp.arrival_prob[0];
      const auto& pr1 = mdp.arrival_prob[1];
      for (size_t c0 = 0; c0 < pr0.size(); ++c0)
        for (size_t c1 = 0; c1 < pr1.size(); ++c1) {
          const int n0 = std::min<int>(
              j0 + static_cast<int>(std::llround(c0 / mdp.opts.q_step)), cap);
          const int n1 = std::min<int>(
              j1 + static_cast<int>(std::llround(c1 / mdp.opts.q_step)), cap);
          row[static_cast<size_t>(n0) * nq + n1] += w_joint * pr0[c0] * pr1[c1];
        }
    }
  }
  return row;
}

GapReport approximation_gap(const DiscreteMdp& mdp, const MdpSolution& sol,
                            const std::vector<FluidValueTable>& tables) {
  const int K = mdp.cfg.K;
  const int nq = static_cast<int>(mdp.queue_grid.size());
  if (static_cast<int>(tables.size()) != K)
    throw std::invalid_argument("approximation_gap: one table per pair");

  GapReport rep;
  const size_t n = mdp.n_states();
  rep.gap.resize(n);
  struct Entry { double norm, rel, abs; };
  std::vector<Entry> entries;
  entries.reserve(n);
  for (size_t x = 0; x < n; ++x) {
    double sumJ = 0.0, norm2 = 0.0;
    size_t rem = x;
    for (int k = K - 1; k >= 0; --k) {
      const int lvl = static_cast<int>(rem % nq);
      rem /= nq;
      const double q = mdp.queue_grid[lvl];
      sumJ += eval_J(tables[k], q);
      norm2 += q * q;
    }
    const double gap = sol.V[x] - sumJ;
    rep.gap[x] = gap;
    if (norm2 > 0.0) {
      entries.push_back({std::sqrt(norm2),
                         std::fabs(gap) / std::max(1.0, sol.V[x]),
                         std::fabs(gap)});
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.norm < b.norm; });
  const int n_bins = 10;
  const size_t m = entries.size();
  for (int b = 0; b < n_bins; ++b) {
    const size_t lo = m * b / n_bins;
    const size_t hi = m * (b + 1) / n_bins;
    if (lo >= hi) continue;
    GapBin bin;
    bin.norm_lo = entries[lo].norm;
    bin.norm_hi = entries[hi - 1].norm;
    bin.count = static_cast<int>(hi - lo);
    for (size_t i = lo; i < hi; ++i) {
      bin.mean_rel_gap += entries[i].rel;
      bin.mean_abs_gap += entries[i].abs;
      bin.max_abs_gap = std::max(bin.max_abs_gap, entries[i].abs);
    }
    bin.mean_rel_gap /= bin.count;
    bin.mean_abs_gap /= bin.count;
    rep.bins.push_back(bin);
  }
  if (!rep.bins.empty()) {
    rep.rel_smallest_decile = rep.bins.front().mean_rel_gap;
    rep.rel_largest_decile = rep.bins.back().mean_rel_gap;
  }
  return rep;
}

CouplingReport coupling_sweep(const NetworkConfig& base,
                              const std::vector<double>& L_values,
                              const OracleOptions& opts) {
  if (base.K != 2)
    throw std::invalid_argument("coupling_sweep: K = 2 required");

  auto solve_at = [&](double L) {
    NetworkConfig cfg = base;
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j)
        if (k != j) cfg.L(k, j) = L;
    OracleOptions o = opts;
    o.want_policy = false;
    const DiscreteMdp mdp = build_discrete_mdp(cfg, o);
    return relative_value_iteration(mdp, o.tol, o.max_sweeps).V;
  };

  const std::vector<double> V0 = solve_at(0.0);
  CouplingReport rep;
  for (double L : L_values) {
    const std::vector<double> VL = solve_at(L);
    double e = 0.0;
    for (size_t x = 0; x < V0.size(); ++x)
      e = std::max(e, std::fabs(VL[x] - V0[x]));
    rep.L.push_back(L);
    rep.e.push_back(e);
  }

  // Least-squares slope of log e vs log L over the nonzero points.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (size_t i = 0; i < rep.L.size(); ++i) {
    if (!(rep.L[i] > 0.0) || !(rep.e[i] > 0.0)) continue;
    const double lx = std::log(rep.L[i]), ly = std::log(rep.e[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    ++m;
  }
  if (m >= 2) rep.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return rep;
}

void write_solution_csv(const DiscreteMdp& mdp, const MdpSolution& sol,
                        const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fputs("q1,q2,V\n", f);
  const int nq = static_cast<int>(mdp.queue_grid.size());
  for (size_t x = 0; x < sol.V.size(); ++x) {
    double q1, q2;
    if (mdp.cfg.K == 1) {
      q1 = mdp.queue_grid[x];
      q2 = 0.0;
    } else {
      q1 = mdp.queue_grid[x / nq];
      q2 = mdp.queue_grid[x % nq];
    }
    std::fprintf(f, "%.12g,%.12g,%.17g\n", q1, q2, sol.V[x]);
  }
  std::fclose(f);
}

}  // namespace fluidctl
