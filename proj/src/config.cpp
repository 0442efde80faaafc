#include "fluidctl/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fluidctl/errors.hpp"

namespace fluidctl {

namespace {

struct KeyValue {
  std::string value;
  int line = 0;
  mutable bool used = false;
};

class FlatFile {
 public:
  explicit FlatFile(const std::string& path) : path_(path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const size_t eq = trimmed.find('=');
      if (eq == std::string::npos) {
        fail(lineno, "expected key = value");
      }
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty()) fail(lineno, "empty key");
      if (entries_.count(key)) fail(lineno, "duplicate key '" + key + "'");
      entries_[key] = KeyValue{value, lineno};
    }
  }

  bool has(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return false;
    it->second.used = true;
    return true;
  }

  std::string get_string(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      throw ParseError("parse error in " + path_ + ": missing key " + key);
    }
    it->second.used = true;
    return it->second.value;
  }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
  }

  double get_double(const std::string& key) const {
    return parse_double(get_string(key), line_of(key));
  }
  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  long long get_int(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const std::string s = get_string(key);
    try {
      size_t pos = 0;
      const long long v = std::stoll(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      fail(line_of(key), "bad integer '" + s + "' for key " + key);
    }
    return 0;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string s = get_string(key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    fail(line_of(key), "bad boolean '" + s + "' for key " + key);
    return false;
  }

  std::vector<double> get_double_list(const std::string& key) const {
    const std::string s = get_string(key);
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) fail(line_of(key), "empty list element for key " + key);
      out.push_back(parse_double(t, line_of(key)));
    }
    if (out.empty()) fail(line_of(key), "empty list for key " + key);
    return out;
  }

  std::vector<std::string> get_string_list(const std::string& key) const {
    const std::string s = get_string(key);
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string t = trim(item);
      if (!t.empty()) out.push_back(t);
    }
    if (out.empty()) fail(line_of(key), "empty list for key " + key);
    return out;
  }

  // Keys matching prefix "pair.N." / "gain.N.M", for per-pair lookups.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
      if (k.rfind(prefix, 0) == 0) out.push_back(k);
    return out;
  }

  void check_all_used() const {
    for (const auto& [k, v] : entries_) {
      if (!v.used) fail(v.line, "unknown key '" + k + "'");
    }
  }

  int line_of(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  [[noreturn]] void fail(int line, const std::string& what) const {
    throw ParseError("parse error at line " + std::to_string(line) + " of " +
                     path_ + ": " + what);
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  double parse_double(const std::string& s, int line) const {
    try {
      size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      fail(line, "bad number '" + s + "'");
    }
  }

  std::string path_;
  std::map<std::string, KeyValue> entries_;
};

LoadedConfig load_network(const FlatFile& f) {
  LoadedConfig lc;
  NetworkConfig& net = lc.net;
  net.K = static_cast<int>(f.get_int("K", 0));
  if (net.K < 1) {
    throw ParseError("parse error: missing key K (pair count)");
  }
  const double tau = f.get_double("tau", 5.0);
  net.slots_per_epoch = static_cast<int>(f.get_int("slots_per_epoch", 10));
  net.q_cap = f.get_double("q_cap", 200.0);
  net.rate_scale = f.get_double("rate_scale", 1.0);
  net.rng_seed = static_cast<uint64_t>(f.get_int("seed", 1));
  net.tdma_weight = f.get_double("tdma_weight", 1.0);

  const bool has_global_lambda = f.has("lambda_pkts_per_epoch");
  const double global_lambda =
      has_global_lambda ? f.get_double("lambda_pkts_per_epoch") : 0.0;
  const double global_gamma = f.get_double("gamma", 0.05);
  const double global_beta = f.get_double("beta", 1.0);
  const double global_Ld = f.get_double("L_direct", 1.0);
  const double L_cross = f.get_double("L_cross", 0.1);

  net.pairs.resize(net.K);
  for (int k = 0; k < net.K; ++k) {
    const std::string pfx = "pair." + std::to_string(k) + ".";
    double lambda_epoch;
    if (f.has(pfx + "lambda_pkts_per_epoch")) {
      lambda_epoch = f.get_double(pfx + "lambda_pkts_per_epoch");
    } else if (has_global_lambda) {
      lambda_epoch = global_lambda;
    } else {
      throw ParseError("parse error: missing key lambda_pkts_per_epoch");
    }
    PairParams& p = net.pairs[k];
    p.lambda = lambda_epoch / tau;
    p.gamma = f.get_double(pfx + "gamma", global_gamma);
    p.beta = f.get_double(pfx + "beta", global_beta);
    p.L_direct = f.get_double(pfx + "L_direct", global_Ld);
    p.tau = tau;
  }

  net.L_flat.assign(static_cast<size_t>(net.K) * net.K, L_cross);
  for (int k = 0; k < net.K; ++k) net.L(k, k) = net.pairs[k].L_direct;
  for (int k = 0; k < net.K; ++k)
    for (int j = 0; j < net.K; ++j) {
      const std::string key =
          "gain." + std::to_string(k) + "." + std::to_string(j);
      if (f.has(key)) net.L(k, j) = f.get_double(key);
    }

  lc.game.term_tol = f.get_double("game.term_tol", 1e-8);
  lc.game.max_rounds = static_cast<int>(f.get_int("game.max_rounds", 200));

  OracleOptions& o = lc.oracle;
  o.queue_levels = static_cast<int>(f.get_int("oracle.queue_levels", 21));
  o.q_step = f.get_double("oracle.q_step", 1.0);
  if (f.has("oracle.power_grid"))
    o.power_grid = f.get_double_list("oracle.power_grid");
  o.channel_atoms = static_cast<int>(f.get_int("oracle.channel_atoms", 10));
  o.arrival_tail = f.get_double("oracle.arrival_tail", 1e-6);
  o.tol = f.get_double("oracle.tol", 1e-8);
  o.max_sweeps = static_cast<int>(f.get_int("oracle.max_sweeps", 50000));
  o.n_threads = static_cast<int>(f.get_int("oracle.threads", 1));

  if (f.has("sweep.values")) lc.sweep_values = f.get_double_list("sweep.values");

  if (const char* env = std::getenv("FLUIDCTL_SEED")) {
    net.rng_seed = std::strtoull(env, nullptr, 10);
  }

  try {
    net.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("invariant violated: ") + e.what());
  }
  return lc;
}

}  // namespace

LoadedConfig parse_network_config(const std::string& path) {
  FlatFile f(path);
  LoadedConfig lc = load_network(f);
  f.check_all_used();
  return lc;
}

ExperimentPlan parse_plan(const std::string& path) {
  FlatFile f(path);
  ExperimentPlan plan;
  plan.name = f.get_string("name", std::filesystem::path(path).stem().string());

  const std::string base_rel = f.get_string("base");
  std::filesystem::path base(base_rel);
  if (base.is_relative())
    base = std::filesystem::path(path).parent_path() / base;
  plan.base_path = base.string();
  plan.base = parse_network_config(plan.base_path);

  const std::string sweep = f.get_string("sweep");
  if (sweep == "gamma") plan.sweep = ExperimentPlan::Sweep::kGamma;
  else if (sweep == "lambda") plan.sweep = ExperimentPlan::Sweep::kLambda;
  else if (sweep == "K") plan.sweep = ExperimentPlan::Sweep::kK;
  else if (sweep == "coupling") plan.sweep = ExperimentPlan::Sweep::kCoupling;
  else f.fail(f.line_of("sweep"), "sweep must be gamma|lambda|K|coupling");

  plan.values = f.get_double_list("values");
  for (const std::string& name : f.get_string_list("controllers")) {
    try {
      plan.controllers.push_back(controller_kind_from_string(name));
    } catch (const std::invalid_argument& e) {
      f.fail(f.line_of("controllers"), e.what());
    }
  }
  plan.epochs = static_cast<int>(f.get_int("epochs", 5000));
  plan.warmup_epochs = static_cast<int>(f.get_int("warmup_epochs", plan.epochs / 5));
  plan.replications = static_cast<int>(f.get_int("replications", 8));
  plan.threads = static_cast<int>(f.get_int("threads", 1));
  plan.output = f.get_string("output");
  plan.emit_tables = f.get_bool("emit_tables", false);
  plan.oracle_compare = f.get_bool("oracle_compare", false);
  f.check_all_used();

  if (plan.values.empty())
    throw std::invalid_argument("invariant violated: empty sweep");
  if (plan.controllers.empty())
    throw std::invalid_argument("invariant violated: no controllers");
  if (plan.warmup_epochs >= plan.epochs)
    throw std::invalid_argument("invariant violated: warmup >= epochs");
  return plan;
}

const char* sweep_var_name(ExperimentPlan::Sweep sweep) {
  switch (sweep) {
    case ExperimentPlan::Sweep::kGamma: return "gamma";
    case ExperimentPlan::Sweep::kLambda: return "lambda_pkts_per_epoch";
    case ExperimentPlan::Sweep::kK: return "K";
    case ExperimentPlan::Sweep::kCoupling: return "L_cross";
  }
  return "?";
}

NetworkConfig apply_sweep(const ExperimentPlan& plan, double value) {
  NetworkConfig cfg = plan.base.net;
  switch (plan.sweep) {
    case ExperimentPlan::Sweep::kGamma:
      for (auto& p : cfg.pairs) p.gamma = value;
      break;
    case ExperimentPlan::Sweep::kLambda:
      for (auto& p : cfg.pairs) p.lambda = value / p.tau;
      break;
    case ExperimentPlan::Sweep::kK: {
      const int K = static_cast<int>(value);
      if (K < 1 || value != K)
        throw std::invalid_argument("invariant violated: K sweep values must "
                                    "be positive integers");
      NetworkConfig next =
          make_symmetric_config(K, cfg.pairs[0], cfg.coupling());
      next.slots_per_epoch = cfg.slots_per_epoch;
      next.q_cap = cfg.q_cap;
      next.rate_scale = cfg.rate_scale;
      next.rng_seed = cfg.rng_seed;
      next.tdma_weight = cfg.tdma_weight;
      cfg = next;
      break;
    }
    case ExperimentPlan::Sweep::kCoupling:
      for (int k = 0; k < cfg.K; ++k)
        for (int j = 0; j < cfg.K; ++j)
          if (k != j) cfg.L(k, j) = value;
      break;
  }
  cfg.validate();
  return cfg;
}

}  // namespace fluidctl
