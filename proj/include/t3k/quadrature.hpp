#pragma once

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "t3k/errors.hpp"

namespace t3k::quadrature {

struct Options {
  double abs_tol = 1e-12;
  unsigned max_depth = 18;
};

namespace detail {

struct Accum {
  double value = 0.0;
  double error = 0.0;
  bool ok = true;
};

// A panel is accepted once its Kronrod-Gauss difference is inside its share of
// the absolute budget, or at roundoff level of its own L1 norm.
template <class F>
void bisect(F& f, double a, double b, double budget, unsigned depth, Accum& acc) {
  double err = 0.0;
  double l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 0, 0.0,
                                                                                 &err, &l1);
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * l1;
  if (err <= budget || err <= floor) {
    acc.value += v;
    acc.error += err;
    return;
  }
  if (depth == 0) {
    acc.value += v;
    acc.error += err;
    acc.ok = false;
    return;
  }
  const double mid = 0.5 * (a + b);
  bisect(f, a, mid, 0.5 * budget, depth - 1, acc);
  bisect(f, mid, b, 0.5 * budget, depth - 1, acc);
}

}  // namespace detail

/// Adaptive 61-point Gauss-Kronrod bisection on [a, b]. Throws ConvergenceError
/// when some panel is still above its share of `abs_tol` at `max_depth`.
template <class F>
double integrate(F&& f, double a, double b, const Options& opts = {}) {
  if (a == b) return 0.0;
  detail::Accum acc;
  detail::bisect(f, a, b, opts.abs_tol, opts.max_depth, acc);
  if (!std::isfinite(acc.value) || !acc.ok) {
    throw ConvergenceError(fmt::format(
        "adaptive quadrature on [{:.6g}, {:.6g}] did not reach abs tol {:.3g} (estimate {:.3g})", a,
        b, opts.abs_tol, acc.error));
  }
  return acc.value;
}

}  // namespace t3k::quadrature
