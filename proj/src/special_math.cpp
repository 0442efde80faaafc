#include "fluidctl/special_math.hpp"

#include <cmath>
#include <stdexcept>

namespace fluidctl {

namespace {

// Power series: E1(x) = -gamma - ln x - sum_{n>=1} (-x)^n / (n * n!).
// Converges fast for x < 1; terms alternate so the truncation error is
// bounded by the first dropped term.
double e1_series(double x) {
  double sum = 0.0;
  double term = 1.0;  // (-x)^n / n! running product
  for (int n = 1; n <= 64; ++n) {
    term *= -x / n;
    const double contrib = term / n;
    sum += contrib;
    if (std::fabs(contrib) < 1e-18 * (std::fabs(sum) + 1e-30)) break;
  }
  return -kEulerGamma - std::log(x) - sum;
}

// Continued fraction, modified Lentz:
//   E1(x) = exp(-x) / (x + 1 - 1/(x + 3 - 4/(x + 5 - 9/(...))))
double e1_continued_fraction(double x) {
  const double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 200; ++i) {
    const double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = a * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + a / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x) * h;
}

}  // namespace

double exp_integral_e1(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::domain_error("exp_integral_e1: x must be positive and finite");
  }
  if (x < 1.0) return e1_series(x);
  return e1_continued_fraction(x);
}

double solve_monotone_root(const std::function<double(double)>& f,
                           Interval bracket, const RootConfig& cfg) {
  if (!(bracket.lo < bracket.hi) || !std::isfinite(bracket.lo) ||
      !std::isfinite(bracket.hi)) {
    throw std::invalid_argument("solve_monotone_root: invalid bracket");
  }
  if (!(cfg.abs_tol > 0.0) || cfg.max_iter < 1) {
    throw std::invalid_argument("solve_monotone_root: invalid config");
  }

  double lo = bracket.lo, hi = bracket.hi;
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw std::invalid_argument("no sign change over bracket");
  }

  for (int it = 0; it < cfg.max_iter; ++it) {
    if (hi - lo <= cfg.abs_tol) return 0.5 * (lo + hi);

    // Alternate a safeguarded secant step with plain bisection; the
    // bisection turns guarantee the bracket halves every other
    // iteration.
    double x = 0.5 * (lo + hi);
    if ((it & 1) == 0) {
      const double denom = fhi - flo;
      if (denom != 0.0) {
        const double s = lo - flo * (hi - lo) / denom;
        const double margin = 1e-3 * (hi - lo);
        if (s > lo + margin && s < hi - margin) x = s;
      }
    }

    const double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx > 0.0) == (flo > 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
  }
  if (hi - lo <= cfg.abs_tol) return 0.5 * (lo + hi);
  throw std::runtime_error("no convergence in solve_monotone_root");
}

}  // namespace fluidctl
