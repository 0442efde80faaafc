#include "fluidctl/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <map>
#include <sstream>
#include <unistd.h>

#include "doctest.h"
#include "fluidctl/errors.hpp"

using namespace fluidctl;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() /
          ("fluidctl_cfg_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string write(const std::string& name, const std::string& body) {
    const fs::path p = dir / name;
    std::ofstream(p) << body;
    return p.string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("minimal config fills documented defaults") {
  TempDir td;
  const std::string p = td.write("min.cfg",
                                 "K = 2\n"
                                 "lambda_pkts_per_epoch = 1.0\n");
  const LoadedConfig lc = parse_network_config(p);
  CHECK(lc.net.K == 2);
  CHECK(lc.net.tau() == 5.0);
  CHECK(lc.net.slots_per_epoch == 10);
  CHECK(lc.net.q_cap == 200.0);
  CHECK(lc.net.rate_scale == 1.0);
  CHECK(lc.net.rng_seed == 1);
  CHECK(lc.net.pairs[0].lambda == doctest::Approx(0.2));  // 1 pkt / 5 ms
  CHECK(lc.net.pairs[0].gamma == 0.05);
  CHECK(lc.net.pairs[0].beta == 1.0);
  CHECK(lc.net.L(0, 1) == 0.1);
  CHECK(lc.net.L(0, 0) == 1.0);
  CHECK(lc.game.term_tol == 1e-8);
  CHECK(lc.game.max_rounds == 200);
  CHECK(lc.oracle.queue_levels == 21);
}

TEST_CASE("per-pair overrides and explicit gains") {
  TempDir td;
  const std::string p = td.write("pairs.cfg",
                                 "K = 2\n"
                                 "lambda_pkts_per_epoch = 1.0\n"
                                 "pair.1.lambda_pkts_per_epoch = 2.0\n"
                                 "pair.1.gamma = 0.5\n"
                                 "gain.0.1 = 0.03\n");
  const LoadedConfig lc = parse_network_config(p);
  CHECK(lc.net.pairs[0].lambda == doctest::Approx(0.2));
  CHECK(lc.net.pairs[1].lambda == doctest::Approx(0.4));
  CHECK(lc.net.pairs[1].gamma == 0.5);
  CHECK(lc.net.L(0, 1) == 0.03);
  CHECK(lc.net.L(1, 0) == 0.1);
}

TEST_CASE("a diagonal gain override violates the invariant") {
  TempDir td;
  const std::string p = td.write("diag.cfg",
                                 "K = 2\n"
                                 "lambda_pkts_per_epoch = 1.0\n"
                                 "gain.0.0 = 3.0\n");
  CHECK_THROWS_WITH_AS(parse_network_config(p),
                       "invariant violated: NetworkConfig: diagonal path gain "
                       "must equal L_direct",
                       std::invalid_argument);
}

TEST_CASE("missing arrival rate names the key") {
  TempDir td;
  const std::string p = td.write("nolambda.cfg", "K = 2\n");
  try {
    parse_network_config(p);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("lambda_pkts_per_epoch") !=
          std::string::npos);
  }
}

TEST_CASE("parse errors carry line numbers") {
  TempDir td;
  const std::string bad_num = td.write("bad.cfg",
                                       "K = 2\n"
                                       "lambda_pkts_per_epoch = 1.0\n"
                                       "q_cap = twelve\n");
  try {
    parse_network_config(bad_num);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  const std::string unknown = td.write("unk.cfg",
                                       "K = 2\n"
                                       "lambda_pkts_per_epoch = 1.0\n"
                                       "lambda_typo = 4\n");
  try {
    parse_network_config(unknown);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("lambda_typo") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_network_config((td.dir / "missing.cfg").string()),
                  IoError);
}

TEST_CASE("environment seed override") {
  TempDir td;
  const std::string p = td.write("seeded.cfg",
                                 "K = 1\n"
                                 "lambda_pkts_per_epoch = 1.0\n"
                                 "L_cross = 0.0\n"
                                 "seed = 5\n");
  ::setenv("FLUIDCTL_SEED", "987", 1);
  const LoadedConfig lc = parse_network_config(p);
  ::unsetenv("FLUIDCTL_SEED");
  CHECK(lc.net.rng_seed == 987);
  CHECK(parse_network_config(p).net.rng_seed == 5);
}

TEST_CASE("plan parsing, sweep application, and relative base paths") {
  TempDir td;
  td.write("base.cfg",
           "K = 2\n"
           "lambda_pkts_per_epoch = 1.0\n");
  const std::string plan_path = td.write("plan.plan",
                                         "base = base.cfg\n"
                                         "sweep = gamma\n"
                                         "values = 0.5,1.0\n"
                                         "controllers = PROPOSED,TDMA\n"
                                         "epochs = 300\n"
                                         "warmup_epochs = 50\n"
                                         "replications = 2\n"
                                         "output = out.csv\n");
  const ExperimentPlan plan = parse_plan(plan_path);
  CHECK(plan.name == "plan");
  CHECK(plan.values == std::vector<double>{0.5, 1.0});
  REQUIRE(plan.controllers.size() == 2);
  CHECK(plan.controllers[0] == ControllerKind::kProposed);

  const NetworkConfig swept = apply_sweep(plan, 0.5);
  CHECK(swept.pairs[0].gamma == 0.5);
  CHECK(swept.pairs[1].gamma == 0.5);

  ExperimentPlan lam = plan;
  lam.sweep = ExperimentPlan::Sweep::kLambda;
  CHECK(apply_sweep(lam, 2.0).pairs[0].lambda == doctest::Approx(0.4));

  ExperimentPlan ks = plan;
  ks.sweep = ExperimentPlan::Sweep::kK;
  const NetworkConfig k4 = apply_sweep(ks, 4.0);
  CHECK(k4.K == 4);
  CHECK(k4.L(2, 3) == 0.1);
  CHECK_THROWS_AS(apply_sweep(ks, 2.5), std::invalid_argument);

  ExperimentPlan cp = plan;
  cp.sweep = ExperimentPlan::Sweep::kCoupling;
  CHECK(apply_sweep(cp, 0.04).L(1, 0) == 0.04);
}

TEST_CASE("bad plans are rejected") {
  TempDir td;
  td.write("base.cfg", "K = 1\nlambda_pkts_per_epoch = 1\nL_cross = 0\n");
  const std::string bad_sweep = td.write("bad1.plan",
                                         "base = base.cfg\n"
                                         "sweep = frequency\n"
                                         "values = 1\n"
                                         "controllers = TDMA\n"
                                         "output = o.csv\n");
  CHECK_THROWS_AS(parse_plan(bad_sweep), ParseError);

  const std::string bad_ctrl = td.write("bad2.plan",
                                        "base = base.cfg\n"
                                        "sweep = gamma\n"
                                        "values = 1\n"
                                        "controllers = GREEDY\n"
                                        "output = o.csv\n");
  CHECK_THROWS_AS(parse_plan(bad_ctrl), ParseError);

  const std::string bad_warm = td.write("bad3.plan",
                                        "base = base.cfg\n"
                                        "sweep = gamma\n"
                                        "values = 1\n"
                                        "controllers = TDMA\n"
                                        "epochs = 100\n"
                                        "warmup_epochs = 100\n"
                                        "output = o.csv\n");
  CHECK_THROWS_AS(parse_plan(bad_warm), std::invalid_argument);
}

TEST_CASE("tdma weight and game knobs are configurable") {
  TempDir td;
  const std::string p = td.write("knobs.cfg",
                                 "K = 2\n"
                                 "lambda_pkts_per_epoch = 1.0\n"
                                 "tdma_weight = 2.5\n"
                                 "game.term_tol = 1e-6\n"
                                 "game.max_rounds = 50\n");
  const LoadedConfig lc = parse_network_config(p);
  CHECK(lc.net.tdma_weight == 2.5);
  CHECK(lc.game.term_tol == 1e-6);
  CHECK(lc.game.max_rounds == 50);
}

TEST_CASE("plans can emit fluid tables and oracle comparisons") {
  TempDir td;
  td.write("base.cfg",
           "K = 1\n"
           "lambda_pkts_per_epoch = 1.0\n"
           "L_cross = 0\n"
           "q_cap = 8\n"
           "slots_per_epoch = 1\n"
           "oracle.queue_levels = 9\n"
           "oracle.power_grid = 0,1,4\n"
           "oracle.channel_atoms = 3\n");
  const std::string out = (td.dir / "mini.csv").string();
  const std::string plan_path = td.write(
      "mini.plan", "base = base.cfg\n"
                   "sweep = gamma\n"
                   "values = 1.0\n"
                   "controllers = TDMA\n"
                   "epochs = 60\n"
                   "warmup_epochs = 10\n"
                   "replications = 1\n"
                   "emit_tables = true\n"
                   "oracle_compare = true\n"
                   "output = " +
                       out + "\n");
  run_plan(parse_plan(plan_path));
  CHECK(fs::exists(out));
  CHECK(fs::exists(out + ".table_pair0.csv"));
  CHECK(fs::exists(out + ".oracle_V.csv"));
  CHECK(fs::exists(out + ".oracle_gap.csv"));
  const std::string vbody = slurp(out + ".oracle_V.csv");
  CHECK(vbody.substr(0, vbody.find('\n')) == "q1,q2,V");
}

TEST_CASE("run_plan writes a stable CSV with the documented schema") {
  TempDir td;
  td.write("base.cfg",
           "K = 2\n"
           "lambda_pkts_per_epoch = 1.0\n"
           "seed = 31\n");
  const std::string out = (td.dir / "result.csv").string();
  const std::string plan_path = td.write(
      "go.plan", "base = base.cfg\n"
                 "sweep = gamma\n"
                 "values = 1.0,2.0,4.0\n"
                 "controllers = PROPOSED,TDMA\n"
                 "epochs = 200\n"
                 "warmup_epochs = 40\n"
                 "replications = 2\n"
                 "threads = 2\n"
                 "output = " +
                     out + "\n");
  run_plan(parse_plan(plan_path));
  const std::string body = slurp(out);
  CHECK(body.substr(0, body.find('\n')) ==
        "sweep_var,value,controller,mean_delay,mean_power,mean_cost,drops,"
        "ci_delay,seed,slots_per_epoch");
  // 3 values x 2 controllers data rows.
  int rows = -1;
  for (char c : body)
    if (c == '\n') ++rows;
  CHECK(rows == 6);
  CHECK(body.find(",31,10") != std::string::npos);  // seed + slots embedded

  // Deterministic rerun: byte-identical output.
  run_plan(parse_plan(plan_path));
  CHECK(slurp(out) == body);

  // Cheaper power (higher SNR) means less queueing: delay at gamma = 1
  // is no worse than at gamma = 4, per controller.
  std::map<std::string, std::map<double, double>> delay;
  std::stringstream data(body.substr(body.find('\n') + 1));
  std::string line;
  while (std::getline(data, line)) {
    char ctrl[32];
    double value, d;
    REQUIRE(std::sscanf(line.c_str(), "%*[^,],%lg,%31[^,],%lg", &value, ctrl,
                        &d) == 3);
    delay[ctrl][value] = d;
  }
  for (const auto& [ctrl, by_gamma] : delay) {
    CAPTURE(ctrl);
    CHECK(by_gamma.at(1.0) <= by_gamma.at(4.0) * 1.05);
  }
}

TEST_CASE("a failing sweep leaves no partial CSV behind") {
  TempDir td;
  td.write("base.cfg", "K = 1\nlambda_pkts_per_epoch = 1\nL_cross = 0\n");
  const std::string out = (td.dir / "partial.csv").string();
  const std::string plan_path = td.write(
      "fail.plan", "base = base.cfg\n"
                   "sweep = gamma\n"
                   "values = 1.0,-5.0\n"  // second value is invalid
                   "controllers = TDMA\n"
                   "epochs = 60\n"
                   "warmup_epochs = 10\n"
                   "replications = 1\n"
                   "output = " +
                       out + "\n");
  CHECK_THROWS_AS(run_plan(parse_plan(plan_path)), std::invalid_argument);
  CHECK(!fs::exists(out));
  CHECK(!fs::exists(out + ".tmp"));
}
