#include "fluidctl/fluid_value.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "doctest.h"
#include "fluidctl/special_math.hpp"

using namespace fluidctl;

namespace {

// Figure-style preset: tau = 5 ms, 1 pkt/epoch, unit direct gain.
PairParams fig_params() { return {0.2, 0.05, 1.0, 1.0, 5.0}; }

}  // namespace

TEST_CASE("steady state inverts E1 at the constructed point") {
  // a = tau L / gamma = 1 and lambda chosen as E1(1), so v = 1 exactly.
  PairParams p{0.21938393, 1.0, 1.0, 1.0, 1.0};
  const SteadyState s = solve_steady_state(p);
  CHECK(s.v == doctest::Approx(1.0).epsilon(1e-6));
  // c_inf = e^{-1} - E1(1) by direct substitution.
  const double expect = std::exp(-1.0) - exp_integral_e1(1.0);
  CHECK(s.c_inf == doctest::Approx(expect).epsilon(1e-6));
  CHECK(expect == doctest::Approx(0.14849550677592205).epsilon(1e-12));
  // The defining equation holds at the root.
  CHECK(exp_integral_e1(1.0 / (p.a() * s.v)) * p.tau ==
        doctest::Approx(p.lambda).epsilon(1e-10));
}

TEST_CASE("steady state vanishes with the load") {
  PairParams p{1e-7, 0.05, 1.0, 1.0, 5.0};
  const SteadyState s = solve_steady_state(p);
  CHECK(s.v > 0.0);
  CHECK(s.v < 1e-3);
  CHECK(std::fabs(s.c_inf) < 1e-6);
}

TEST_CASE("steady state rejects unattainable loads") {
  // Requires E1(1/(a v)) ~ 1e5, far beyond representable slopes.
  PairParams p{1e5, 0.05, 1.0, 1.0, 1.0};
  CHECK_THROWS_WITH_AS(solve_steady_state(p), "infeasible load",
                       std::runtime_error);
}

TEST_CASE("table boundary conditions") {
  const FluidValueTable t = build_fluid_table(fig_params(), 1200.0);
  CHECK(t.q.front() == 0.0);
  CHECK(t.J.front() == 0.0);
  CHECK(eval_J(t, 0.0) == 0.0);
  // y0 is the steady-state slope; q(y0) = 0 within tolerance.
  CHECK(t.y0 == doctest::Approx(t.steady.v));
  CHECK(std::fabs(parametric_q(t.params, t.steady, t.y0)) < 1e-9);
  // strictly increasing samples
  for (size_t i = 1; i < t.q.size(); ++i) {
    REQUIRE(t.q[i] > t.q[i - 1]);
    REQUIRE(t.J[i] > t.J[i - 1]);
    REQUIRE(t.y[i] > t.y[i - 1]);
  }
  CHECK(t.q_max >= 1200.0);
}

TEST_CASE("figure band: J stays within [0.2, 0.7] q^2/ln q") {
  const FluidValueTable t = build_fluid_table(fig_params(), 1100.0);
  for (double q = 50.0; q <= 1000.0; q *= 1.11) {
    const double bound = q * q / std::log(q);
    const double J = eval_J(t, q);
    CAPTURE(q);
    CHECK(J >= 0.2 * bound);
    CHECK(J <= 0.7 * bound);
  }
}

TEST_CASE("asymptotic ratio bounded by the beta/(lambda tau) scale") {
  for (const PairParams& p :
       {fig_params(), PairParams{0.4, 0.2, 2.0, 1.0, 5.0},
        PairParams{0.25, 0.01, 1.0, 0.5, 2.0}}) {
    const FluidValueTable t = build_fluid_table(p, 900.0);
    const double scale = p.beta / (p.lambda * p.tau);
    for (double q = 100.0; q <= 800.0; q *= 1.7) {
      const double ratio = eval_J(t, q) * std::log(q) / (q * q);
      CAPTURE(p.gamma);
      CAPTURE(q);
      CHECK(ratio > 0.05 * scale);
      CHECK(ratio < 5.0 * scale);
    }
  }
}

TEST_CASE("beta scaling follows the closed form: J_{c beta}(q) = J(c q)/c") {
  const PairParams p = fig_params();
  PairParams p2 = p;
  p2.beta *= 2.0;
  const FluidValueTable t1 = build_fluid_table(p, 900.0);
  const FluidValueTable t2 = build_fluid_table(p2, 450.0);
  for (double q : {1.0, 7.0, 40.0, 150.0, 400.0}) {
    CHECK(eval_J(t2, q) ==
          doctest::Approx(eval_J(t1, 2.0 * q) / 2.0).epsilon(1e-6));
    // Same slope relation: J'_{2b}(q) = J'(2q).
    CHECK(eval_J_prime(t2, q) ==
          doctest::Approx(eval_J_prime(t1, 2.0 * q)).epsilon(1e-6));
  }
  // Steady state is beta-free.
  CHECK(t1.steady.v == doctest::Approx(t2.steady.v).epsilon(1e-12));
}

TEST_CASE("eval_J is exact at samples and converges under refinement") {
  const FluidValueTable t = build_fluid_table(fig_params(), 500.0, 4096);
  const FluidValueTable fine = build_fluid_table(fig_params(), 500.0, 40960);
  for (size_t i = 100; i < t.q.size(); i += 517) {
    CHECK(eval_J(t, t.q[i]) == t.J[i]);  // interpolation exactness
    if (i + 1 < t.q.size()) {
      const double mid = 0.5 * (t.q[i] + t.q[i + 1]);
      CHECK(eval_J(t, mid) ==
            doctest::Approx(eval_J(fine, mid)).epsilon(1e-6));
    }
  }
}

TEST_CASE("eval_J_prime inverts the parametric curve") {
  const FluidValueTable t = build_fluid_table(fig_params(), 500.0);
  CHECK(eval_J_prime(t, 0.0) == doctest::Approx(t.steady.v).epsilon(1e-10));
  for (double q : {0.01, 0.5, 3.0, 27.0, 101.5, 499.0}) {
    const double y = eval_J_prime(t, q);
    CHECK(parametric_q(t.params, t.steady, y) ==
          doctest::Approx(q).epsilon(1e-8));
  }
  CHECK(eval_J_prime(t, 10.0) <= eval_J_prime(t, 100.0));

  // Central finite difference of eval_J matches the analytic slope.
  const double q0 = 100.0, h = 1e-3;
  const double fd = (eval_J(t, q0 + h) - eval_J(t, q0 - h)) / (2.0 * h);
  CHECK(fd == doctest::Approx(eval_J_prime(t, q0)).epsilon(1e-4));
}

TEST_CASE("hjb residual certifies the table") {
  const FluidValueTable t = build_fluid_table(fig_params(), 800.0);
  for (size_t i = 1; i < t.q.size(); i += 97) {
    const double q = t.q[i];
    const double tol =
        1e-6 * std::max(1.0, t.params.beta * q /
                                 (t.params.lambda * t.params.tau));
    CHECK(std::fabs(hjb_residual(t, q)) <= tol);
  }
  // Sensitivity: a 10% derivative perturbation must be visible.
  const double q = 100.0;
  const double y = eval_J_prime(t, q);
  CHECK(std::fabs(hjb_residual_at(t.params, t.steady, q, 1.1 * y)) > 1e-3);
  // Residual vanishes with q by the steady-state condition.
  CHECK(std::fabs(hjb_residual(t, 1e-7)) < 1e-6);
}

TEST_CASE("evaluation outside the table range is an error") {
  const FluidValueTable t = build_fluid_table(fig_params(), 100.0);
  CHECK_THROWS_AS(eval_J(t, -1.0), std::out_of_range);
  CHECK_THROWS_AS(eval_J(t, t.q_max * 1.01), std::out_of_range);
  CHECK_THROWS_AS(eval_J_prime(t, t.q_max * 1.01), std::out_of_range);
  CHECK_THROWS_AS(hjb_residual(t, 0.0), std::out_of_range);
}

TEST_CASE("table CSV round trip") {
  const FluidValueTable t = build_fluid_table(fig_params(), 50.0, 64);
  const std::string path =
      (std::filesystem::temp_directory_path() / "fluidctl_table_rt.csv")
          .string();
  write_table_csv(t, path);
  const std::vector<TableSample> samples = read_table_csv(path);
  REQUIRE(samples.size() == t.q.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    CHECK(samples[i].y == t.y[i]);
    CHECK(samples[i].q == t.q[i]);
    CHECK(samples[i].J == t.J[i]);
  }
  std::filesystem::remove(path);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(solve_steady_state({0.0, 1.0, 1.0, 1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_fluid_table(fig_params(), -5.0),
                  std::invalid_argument);
}
