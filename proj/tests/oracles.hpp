#pragma once

// Reference computations kept independent of the library code paths.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

// Composite Simpson with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

inline double box_mode(double lo, double width, int j, double x) {
  if (x < lo || x > lo + width) return 0.0;
  return std::sqrt(2.0 / width) * std::sin(j * std::numbers::pi * (x - lo) / width);
}

// int_0^ell sin(pi u/ell) sin(j pi u/Lb) du times the two normalisations, by Simpson.
inline double left_overlap(double ell, double d, int j) {
  const double lb = 2.0 * ell + d;
  return simpson([&](double u) { return box_mode(0.0, ell, 1, u) * box_mode(0.0, lb, j, u); }, 0.0,
                 ell);
}

}  // namespace oracle
