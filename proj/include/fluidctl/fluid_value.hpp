#ifndef FLUIDCTL_FLUID_VALUE_HPP
#define FLUIDCTL_FLUID_VALUE_HPP

#include <string>
#include <vector>

namespace fluidctl {

// Per-pair scalars.  Working units are milliseconds throughout the
// library: `lambda` is an arrival rate in packets/ms, `tau` the epoch
// duration in ms.  The CLI-facing configs accept lambda in packets per
// epoch and convert by lambda = lambda_epoch / tau.
struct PairParams {
  double lambda;    // mean arrival rate, pkts/ms
  double gamma;     // power price, per watt
  double beta;      // delay weight
  double L_direct;  // direct path gain
  double tau;       // epoch duration, ms

  double a() const { return tau * L_direct / gamma; }
  void validate() const;  // throws std::invalid_argument
};

// Steady state of the single-pair fluid dynamics: v is the value slope
// at zero queue and solves E1(1/(a*v)) * tau = lambda; c_inf is the
// matching stationary cost offset.
struct SteadyState {
  double v;
  double c_inf;
};

SteadyState solve_steady_state(const PairParams& params);

// Parametric closed form of the single-pair fluid value function.  The
// curve is parameterized by y = J'(q); `parametric_q` maps y to the
// queue level and `parametric_j_raw` to the unshifted value (the table
// adds the boundary constant b so that J(0) = 0).
double parametric_q(const PairParams& params, const SteadyState& steady,
                    double y);
double parametric_j_raw(const PairParams& params, double y);

// ODE residual evaluated from (q, J'(q)) directly; exposed so tests can
// probe perturbed derivatives.
double hjb_residual_at(const PairParams& params, const SteadyState& steady,
                       double q, double jprime);

// Calibrated table of one per-flow fluid value function.  Samples are
// strictly increasing in q (and in y); sample 0 is the exact boundary
// point (y0, 0, 0).  Immutable once built and safe to share across
// threads.
struct FluidValueTable {
  PairParams params{};
  SteadyState steady{};
  double y0 = 0.0;    // root of q(y) = 0; equals steady.v
  double b = 0.0;     // boundary constant, J(y0) + b = 0
  double q_max = 0.0; // largest tabulated queue
  std::vector<double> y;  // = J'(q) at each sample
  std::vector<double> q;
  std::vector<double> J;
};

FluidValueTable build_fluid_table(const PairParams& params, double q_max,
                                  int n_points = 4096);

// Monotone cubic (Hermite, exact slopes J' = y) interpolation of J.
// Exact at sample points.  Throws std::out_of_range outside [0, q_max].
double eval_J(const FluidValueTable& table, double q);

// Inverse of the parametric q(.): returns y with q(y) = q, bracketed by
// the table samples and polished on the closed form.  J' is
// nondecreasing in q.
double eval_J_prime(const FluidValueTable& table, double q);

// Residual of the transformed per-flow HJB ODE at queue level q; the
// magnitude certifies the tabulated solution.
double hjb_residual(const FluidValueTable& table, double q);

// CSV export/import with header "y,q,J" (17 significant digits, exact
// round trip).
struct TableSample {
  double y, q, J;
};
void write_table_csv(const FluidValueTable& table, const std::string& path);
std::vector<TableSample> read_table_csv(const std::string& path);

}  // namespace fluidctl

#endif
