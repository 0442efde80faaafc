#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "fluidctl/config.hpp"
#include "fluidctl/errors.hpp"
#include "fluidctl/sim_engine.hpp"

namespace fluidctl {

namespace {

std::string format_row(const char* sweep_var, double value,
                       const char* controller, const NetworkConfig& cfg,
                       const SimResult& res) {
  double delay = 0.0, power = 0.0, drops = 0.0;
  for (int k = 0; k < cfg.K; ++k) {
    delay += res.mean_delay[k];
    power += res.mean_power[k];
    drops += res.drops[k];
  }
  delay /= cfg.K;
  power /= cfg.K;

  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%s,%.12g,%s,%.12g,%.12g,%.12g,%.12g,%.12g,%llu,%d\n",
                sweep_var, value, controller, delay, power, res.mean_cost,
                drops, res.ci_halfwidth.delay,
                static_cast<unsigned long long>(cfg.rng_seed),
                cfg.slots_per_epoch);
  return buf;
}

}  // namespace

void run_plan(const ExperimentPlan& plan) {
  std::string body =
      "sweep_var,value,controller,mean_delay,mean_power,mean_cost,drops,"
      "ci_delay,seed,slots_per_epoch\n";

  for (double value : plan.values) {
    const NetworkConfig cfg = apply_sweep(plan, value);
    for (ControllerKind kind : plan.controllers) {
      SimSpec spec;
      spec.cfg = cfg;
      spec.controller = kind;
      spec.game = plan.base.game;
      spec.epochs = plan.epochs;
      spec.warmup_epochs = plan.warmup_epochs;
      spec.replications = plan.replications;
      spec.n_threads = plan.threads;
      const SimResult res = run_simulation(spec);
      body += format_row(sweep_var_name(plan.sweep), value,
                         controller_kind_name(kind), cfg, res);
    }
  }

  const std::filesystem::path out(plan.output);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  const std::filesystem::path tmp = out.string() + ".tmp";
  {
    std::FILE* f = std::fopen(tmp.string().c_str(), "w");
    if (!f) throw IoError("cannot open for writing: " + tmp.string());
    const size_t n = std::fwrite(body.data(), 1, body.size(), f);
    std::fclose(f);
    if (n != body.size()) {
      std::filesystem::remove(tmp);
      throw IoError("short write: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, out);

  if (plan.emit_tables) {
    for (int k = 0; k < plan.base.net.K; ++k) {
      const FluidValueTable t = build_fluid_table(
          plan.base.net.pairs[k], plan.base.net.q_cap * 1.02 + 1.0);
      write_table_csv(t, plan.output + ".table_pair" + std::to_string(k) +
                             ".csv");
    }
  }
  if (plan.oracle_compare) {
    const DiscreteMdp mdp =
        build_discrete_mdp(plan.base.net, plan.base.oracle);
    const MdpSolution sol = relative_value_iteration(
        mdp, plan.base.oracle.tol, plan.base.oracle.max_sweeps);
    write_solution_csv(mdp, sol, plan.output + ".oracle_V.csv");
    std::vector<FluidValueTable> tables;
    for (int k = 0; k < plan.base.net.K; ++k)
      tables.push_back(build_fluid_table(plan.base.net.pairs[k],
                                         mdp.queue_grid.back() * 1.02 + 1.0));
    const GapReport gap = approximation_gap(mdp, sol, tables);
    std::FILE* f = std::fopen((plan.output + ".oracle_gap.csv").c_str(), "w");
    if (!f) throw IoError("cannot open for writing: " + plan.output +
                          ".oracle_gap.csv");
    std::fputs("norm_lo,norm_hi,count,mean_rel_gap,mean_abs_gap,max_abs_gap\n",
               f);
    for (const GapBin& b : gap.bins) {
      std::fprintf(f, "%.12g,%.12g,%d,%.12g,%.12g,%.12g\n", b.norm_lo,
                   b.norm_hi, b.count, b.mean_rel_gap, b.mean_abs_gap,
                   b.max_abs_gap);
    }
    std::fclose(f);
  }
}

}  // namespace fluidctl
