#include "fluidctl/fluid_value.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "fluidctl/special_math.hpp"

namespace fluidctl {

void PairParams::validate() const {
  auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!pos(lambda) || !pos(gamma) || !pos(beta) || !pos(L_direct) || !pos(tau)) {
    throw std::invalid_argument(
        "PairParams: all fields must be finite and strictly positive");
  }
}

SteadyState solve_steady_state(const PairParams& params) {
  params.validate();
  const double a = params.a();
  const double r = params.lambda / params.tau;  // target E1 value

  // E1(1/(a v)) is strictly increasing in v, from 0 to +inf.  Bracket
  // the root in log(v) space, expanding both ends geometrically.
  auto g = [&](double u) { return exp_integral_e1(std::exp(-u) / a) - r; };

  double u_lo = std::log(1e-8);
  double u_hi = std::log(1.0);
  int guard = 0;
  while (g(u_lo) > 0.0) {
    u_lo -= 8.0;
    if (++guard > 200) throw std::runtime_error("infeasible load");
  }
  guard = 0;
  while (g(u_hi) < 0.0) {
    u_hi += 8.0;
    // exp(u) beyond ~1e300 means the required service slope is not
    // representable: the offered load exceeds any attainable service.
    if (u_hi > 690.0 || ++guard > 200)
      throw std::runtime_error("infeasible load");
  }

  RootConfig rc;
  rc.abs_tol = 1e-13;
  rc.max_iter = 400;
  const double v = std::exp(solve_monotone_root(g, {u_lo, u_hi}, rc));

  const double x = 1.0 / (a * v);
  const double c_inf =
      v * params.tau * std::exp(-x) -
      (params.gamma / params.L_direct) * exp_integral_e1(x);
  return {v, c_inf};
}

double parametric_q(const PairParams& params, const SteadyState& steady,
                    double y) {
  const double a = params.a();
  const double r = params.lambda / params.tau;
  const double x = 1.0 / (a * y);
  const double e1 = exp_integral_e1(x);
  return (params.lambda * params.tau / params.beta) *
         ((1.0 / a + y) * e1 - r * y - std::exp(-x) * y +
          steady.c_inf / params.tau);
}

double parametric_j_raw(const PairParams& params, double y) {
  const double a = params.a();
  const double r = params.lambda / params.tau;
  const double x = 1.0 / (a * y);
  const double e1 = exp_integral_e1(x);
  return (params.lambda * params.tau / params.beta) *
         ((1.0 - a * y) / (4.0 * a) * y * std::exp(-x) -
          0.5 * r * y * y + (0.5 * y * y - 1.0 / (4.0 * a * a)) * e1);
}

// d q / d y = (lambda tau / beta) (E1(1/(a y)) - lambda/tau); vanishes
// exactly at y = v, so q(y) = 0 is a tangent root there.
static double parametric_dq_dy(const PairParams& params, double y) {
  const double a = params.a();
  const double r = params.lambda / params.tau;
  return (params.lambda * params.tau / params.beta) *
         (exp_integral_e1(1.0 / (a * y)) - r);
}

double hjb_residual_at(const PairParams& params, const SteadyState& steady,
                       double q, double jprime) {
  const double a = params.a();
  const double x = 1.0 / (a * jprime);
  const double e1 = exp_integral_e1(x);
  return params.beta * q / (params.lambda * params.tau) -
         steady.c_inf / params.tau + jprime * std::exp(-x) - e1 / a +
         jprime * (params.lambda / params.tau - e1);
}

FluidValueTable build_fluid_table(const PairParams& params, double q_max,
                                  int n_points) {
  params.validate();
  if (!(q_max > 0.0) || !std::isfinite(q_max)) {
    throw std::invalid_argument("build_fluid_table: q_max must be positive");
  }
  if (n_points < 8) {
    throw std::invalid_argument("build_fluid_table: n_points too small");
  }

  FluidValueTable t;
  t.params = params;
  t.steady = solve_steady_state(params);

  // q(y) has a tangent root at the steady-state slope v (dq/dy = 0
  // there), so the boundary root y0 is v itself; verify the tangency
  // numerically instead of bracketing a sign change that does not
  // exist.
  t.y0 = t.steady.v;
  const double q_at_y0 = parametric_q(params, t.steady, t.y0);
  const double q_scale = std::max(1.0, std::fabs(t.steady.c_inf * params.lambda /
                                                 params.beta));
  if (std::fabs(q_at_y0) > 1e-8 * q_scale) {
    throw std::runtime_error("non-monotone branch: q(y0) not zero");
  }
  t.b = -parametric_j_raw(params, t.y0);

  // Upper end of the y grid: expand until the requested queue range is
  // covered.
  double y_start = t.y0 * (1.0 + 1e-6);
  double y_end = std::max(2.0 * t.y0, y_start * 2.0);
  int guard = 0;
  while (parametric_q(params, t.steady, y_end) < q_max) {
    y_end *= 1.5;
    if (++guard > 4000) throw std::runtime_error("non-monotone branch");
  }

  t.y.reserve(n_points + 1);
  t.q.reserve(n_points + 1);
  t.J.reserve(n_points + 1);
  t.y.push_back(t.y0);
  t.q.push_back(0.0);
  t.J.push_back(0.0);

  const double ratio = std::pow(y_end / y_start, 1.0 / (n_points - 1));
  double prev_q = 0.0;
  for (int i = 0; i < n_points; ++i) {
    const double y = y_start * std::pow(ratio, i);
    const double q = parametric_q(params, t.steady, y);
    if (!(q > prev_q)) {
      // The first few offsets from the tangent point can collapse to
      // the same double; drop exact stragglers, fail on real decreases.
      if (q >= prev_q - 1e-12 * q_scale) continue;
      throw std::runtime_error("non-monotone branch: q(y) not increasing");
    }
    t.y.push_back(y);
    t.q.push_back(q);
    t.J.push_back(parametric_j_raw(params, y) + t.b);
    prev_q = q;
  }
  t.q_max = t.q.back();
  if (t.q_max < q_max) throw std::runtime_error("non-monotone branch");
  return t;
}

namespace {

// Index of the interval [q[i], q[i+1]] containing qv.
size_t interval_index(const std::vector<double>& q, double qv) {
  auto it = std::upper_bound(q.begin(), q.end(), qv);
  size_t i = static_cast<size_t>(it - q.begin());
  if (i == 0) return 0;
  if (i >= q.size()) return q.size() - 2;
  return i - 1;
}

void check_range(const FluidValueTable& t, double q) {
  if (!(q >= 0.0) || !std::isfinite(q)) {
    throw std::out_of_range("queue level must be nonnegative and finite");
  }
  if (q > t.q_max) {
    throw std::out_of_range("queue level above tabulated q_max");
  }
}

}  // namespace

double eval_J(const FluidValueTable& table, double q) {
  check_range(table, q);
  const size_t i = interval_index(table.q, q);
  const double h = table.q[i + 1] - table.q[i];
  const double s = (q - table.q[i]) / h;
  // Cubic Hermite with the exact slopes J'(q_i) = y_i.
  const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = s * s * (s - 1.0);
  return h00 * table.J[i] + h10 * h * table.y[i] + h01 * table.J[i + 1] +
         h11 * h * table.y[i + 1];
}

double eval_J_prime(const FluidValueTable& table, double q) {
  check_range(table, q);
  if (q == 0.0) return table.y0;
  const size_t i = interval_index(table.q, q);
  double lo = table.y[i], hi = table.y[i + 1];

  // Safeguarded Newton on the closed form, warm-started by linear
  // inverse interpolation of the bracketing samples.
  double y = lo + (hi - lo) * (q - table.q[i]) / (table.q[i + 1] - table.q[i]);
  for (int it = 0; it < 100; ++it) {
    const double f = parametric_q(table.params, table.steady, y) - q;
    if (std::fabs(f) <= 1e-13 * std::max(1.0, q)) return y;
    if (f > 0.0) hi = y; else lo = y;
    const double d = parametric_dq_dy(table.params, y);
    double next = (d > 0.0) ? y - f / d : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == y) return y;
    y = next;
  }
  return y;
}

double hjb_residual(const FluidValueTable& table, double q) {
  check_range(table, q);
  if (!(q > 0.0)) throw std::out_of_range("hjb_residual requires q > 0");
  return hjb_residual_at(table.params, table.steady, q,
                         eval_J_prime(table, q));
}

void write_table_csv(const FluidValueTable& table, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fputs("y,q,J\n", f);
  for (size_t i = 0; i < table.q.size(); ++i) {
    std::fprintf(f, "%.17g,%.17g,%.17g\n", table.y[i], table.q[i], table.J[i]);
  }
  std::fclose(f);
}

std::vector<TableSample> read_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "y,q,J") {
    throw std::runtime_error("bad table CSV header in " + path);
  }
  std::vector<TableSample> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TableSample s{};
    if (std::sscanf(line.c_str(), "%lg,%lg,%lg", &s.y, &s.q, &s.J) != 3) {
      throw std::runtime_error("bad table CSV row in " + path);
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace fluidctl
