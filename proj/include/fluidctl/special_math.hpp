#ifndef FLUIDCTL_SPECIAL_MATH_HPP
#define FLUIDCTL_SPECIAL_MATH_HPP

#include <functional>

namespace fluidctl {

// Euler-Mascheroni constant.
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// Exponential integral
//
//            inf               inf
//             /   -t x          /    -t
//            |   e             |    e
//   E (x) =  |  ----- dt   =   |   ---- dt ,   x > 0
//    1       |    t            |    t
//           /                 /
//            1                 x
//
// Series expansion below x = 1, continued fraction (modified Lentz)
// above.  Relative error <= 1e-12 over the positive reals; underflows
// to 0 for x beyond ~740.  Throws std::domain_error for x <= 0 or
// non-finite x.
double exp_integral_e1(double x);

// Bracketing interval for root finding.  Requires lo < hi, both finite.
struct Interval {
  double lo;
  double hi;
};

struct RootConfig {
  double abs_tol = 1e-12;  // terminate when |hi - lo| <= abs_tol
  int max_iter = 200;
};

// Finds the root of a continuous function with a sign change over
// `bracket`.  Bisection with a secant acceleration step, always
// safeguarded by the bracket, so the result is deterministic and the
// bracket never degrades.  Throws std::invalid_argument ("no sign
// change") when f(lo) and f(hi) have the same sign and
// std::runtime_error ("no convergence") when max_iter is exhausted.
double solve_monotone_root(const std::function<double(double)>& f,
                           Interval bracket, const RootConfig& cfg = {});

}  // namespace fluidctl

#endif
