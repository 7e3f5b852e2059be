#pragma once

// Box geometry, bare single-atom modes and the atom-cavity mode couplings.
//
// Coordinates: the outer walls sit at x = -(ell + d/2) and x = ell + d/2.
// Species a sees an additional impenetrable barrier on (-d/2, d/2), so its
// modes live in two wells of width ell. Species b sees only the outer walls
// (box width Lb = 2 ell + d). Every mode function is taken positive just
// inside the left edge of its support, which makes all couplings real.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/special_functions/sin_pi.hpp>

#include "t3k/errors.hpp"
#include "t3k/quadrature.hpp"

namespace t3k {

struct Geometry {
  double ell = 1.0;  ///< width of each a-well
  double d = 1.0;    ///< central barrier thickness

  double box_width() const { return 2.0 * ell + d; }
  double outer_wall() const { return ell + 0.5 * d; }

  void validate() const {
    if (!(ell > 0.0) || !std::isfinite(ell)) throw ParameterError("geometry: ell must be > 0");
    if (!(d > 0.0) || !std::isfinite(d)) throw ParameterError("geometry: d must be > 0");
  }
  bool operator==(const Geometry&) const = default;
};

struct ConstantProfile {
  double value = 1.0;
  bool operator==(const ConstantProfile&) const = default;
};

/// Piecewise-linear cavity profile through (x[i], values[i]); x strictly increasing.
struct SampledProfile {
  std::vector<double> x;
  std::vector<double> values;

  void validate() const {
    if (x.size() < 2 || x.size() != values.size())
      throw ParameterError("sampled cavity profile needs >= 2 points and matching sizes");
    for (std::size_t i = 1; i < x.size(); ++i)
      if (!(x[i] > x[i - 1])) throw ParameterError("sampled cavity profile x must be increasing");
  }

  double operator()(double xq) const {
    if (xq <= x.front()) return values.front();
    if (xq >= x.back()) return values.back();
    const auto it = std::upper_bound(x.begin(), x.end(), xq);
    const auto i = static_cast<std::size_t>(it - x.begin());
    const double t = (xq - x[i - 1]) / (x[i] - x[i - 1]);
    return values[i - 1] + t * (values[i] - values[i - 1]);
  }
  bool operator==(const SampledProfile&) const = default;
};

using CavityProfile = std::variant<ConstantProfile, SampledProfile>;

inline bool is_constant(const CavityProfile& p) {
  return std::holds_alternative<ConstantProfile>(p);
}

/// All angular frequencies; energies are hbar times these. Natural units use hbar = 1.
struct ModelParams {
  Geometry geometry;
  double mass = 1.0;
  double Omega_a = 0.0;
  double Omega_b = 0.0;
  double omega_c = 1.0;
  double g0 = 0.0;
  CavityProfile cavity_profile = ConstantProfile{};
  double hbar = 1.0;

  /// Kinetic offset of the lowest a-mode, hbar pi^2 / (2 m ell^2).
  double a_kinetic() const {
    return hbar * std::numbers::pi * std::numbers::pi /
           (2.0 * mass * geometry.ell * geometry.ell);
  }
  double omega_a() const { return Omega_a + a_kinetic(); }

  /// Delta = Omega_b + omega_c - omega_a, with omega_a the lowest a-mode frequency.
  double detuning() const { return Omega_b + omega_c - omega_a(); }

  /// g0 * C for a constant profile (the closed-form coupling scale).
  double effective_coupling() const {
    if (const auto* c = std::get_if<ConstantProfile>(&cavity_profile)) return g0 * c->value;
    throw ParameterError("closed-form paths require a constant cavity profile");
  }

  void validate() const {
    geometry.validate();
    if (!(mass > 0.0) || !std::isfinite(mass)) throw ParameterError("mass must be > 0");
    if (!(hbar > 0.0)) throw ParameterError("hbar must be > 0");
    if (!(g0 >= 0.0) || !std::isfinite(g0)) throw ParameterError("g0 must be >= 0");
    if (!std::isfinite(Omega_a) || !std::isfinite(Omega_b) || !std::isfinite(omega_c))
      throw ParameterError("frequencies must be finite");
    if (const auto* s = std::get_if<SampledProfile>(&cavity_profile)) s->validate();
  }

  /// Parameters with a prescribed detuning: Omega_b is chosen so that
  /// Omega_b + omega_c - omega_a == Delta. Without an explicit cavity frequency
  /// the cavity is put on resonance with the bare transition, omega_c = |Delta|/2.
  static ModelParams from_detuning(Geometry geometry, double mass, double Delta, double g0,
                                   std::optional<double> omega_c = std::nullopt,
                                   double Omega_a = 0.0, double hbar = 1.0) {
    ModelParams p;
    p.geometry = geometry;
    p.mass = mass;
    p.g0 = g0;
    p.hbar = hbar;
    p.Omega_a = Omega_a;
    p.omega_c = omega_c.value_or(0.5 * std::abs(Delta));
    p.Omega_b = Delta + p.omega_a() - p.omega_c;
    p.validate();
    return p;
  }

  bool operator==(const ModelParams&) const = default;
};

enum class Species { a_left, a_right, b };
enum class Side { left, right };

inline const char* to_string(Species s) {
  switch (s) {
    case Species::a_left: return "a_left";
    case Species::a_right: return "a_right";
    case Species::b: return "b";
  }
  return "?";
}

struct ModeId {
  Species species = Species::b;
  int j = 1;
  bool operator==(const ModeId&) const = default;
};

inline Species species_of(Side s) { return s == Side::left ? Species::a_left : Species::a_right; }

/// Support [lo, hi] of a mode function.
inline std::pair<double, double> mode_support(const Geometry& g, Species s) {
  switch (s) {
    case Species::a_left: return {-g.outer_wall(), -0.5 * g.d};
    case Species::a_right: return {0.5 * g.d, g.outer_wall()};
    case Species::b: return {-g.outer_wall(), g.outer_wall()};
  }
  return {0.0, 0.0};
}

inline double mode_frequency(const ModelParams& p, const ModeId& mode) {
  p.validate();
  if (mode.j < 1) throw ParameterError("mode index j must be >= 1");
  const double j2 = static_cast<double>(mode.j) * mode.j;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  if (mode.species == Species::b) {
    const double lb = p.geometry.box_width();
    return p.Omega_b + p.hbar * pi2 * j2 / (2.0 * p.mass * lb * lb);
  }
  return p.Omega_a + p.hbar * pi2 * j2 / (2.0 * p.mass * p.geometry.ell * p.geometry.ell);
}

/// Normalised infinite-well eigenfunction; zero outside its support.
inline double mode_function(const Geometry& g, const ModeId& mode, double x) {
  g.validate();
  if (mode.j < 1) throw ParameterError("mode index j must be >= 1");
  if (x < -g.outer_wall() || x > g.outer_wall())
    throw ParameterError("position outside the outer walls");
  const auto [lo, hi] = mode_support(g, mode.species);
  if (x < lo || x > hi) return 0.0;
  const double width = hi - lo;
  return std::sqrt(2.0 / width) * boost::math::sin_pi(mode.j * (x - lo) / width);
}

inline double mode_function(const ModelParams& p, const ModeId& mode, double x) {
  return mode_function(p.geometry, mode, x);
}

namespace detail {

// |1 - j^2 ell^2 / Lb^2| below this selects the sin^2 branch of the overlap.
inline constexpr double kDegenerateOverlapTol = 1e-9;

/// Integral of phi_L^(a) phi_j^(b) over the left well (unit profile).
///
/// With u = x + Lb/2, k1 = pi/ell, kj = j pi/Lb and r = j ell/Lb,
///   int_0^ell sin(k1 u) sin(kj u) du = k1 sin(pi r) / (k1^2 - kj^2),
/// rewritten around s = 1 - r so that it stays accurate next to r = 1.
inline double left_overlap_unit(const Geometry& g, int j) {
  const double ell = g.ell;
  const double lb = g.box_width();
  const double jd = static_cast<double>(j);
  const double norm = 2.0 / std::sqrt(ell * lb);
  const double ratio = jd * ell / lb;
  if (std::abs(1.0 - ratio * ratio) < kDegenerateOverlapTol) return norm * 0.5 * ell;
  const double s = (g.d - (jd - 2.0) * ell) / lb;  // 1 - r
  const double k1 = std::numbers::pi / ell;
  return norm * boost::math::sin_pi(s) / (k1 * s * (2.0 - s));
}

}  // namespace detail

inline double reflection_sign(int j) { return (j % 2 == 1) ? 1.0 : -1.0; }

/// Overlap integral of a well mode and a box mode weighted by the profile, by
/// adaptive quadrature (any profile). Sampled profiles are split at their nodes.
inline double coupling_overlap_quadrature(const ModelParams& p, Side sigma, int j,
                                          const quadrature::Options& opts = {}) {
  p.validate();
  if (j < 1) throw ParameterError("mode index j must be >= 1");
  const Geometry& g = p.geometry;
  const Species sp = species_of(sigma);
  const auto [lo, hi] = mode_support(g, sp);
  const ModeId am{sp, 1};
  const ModeId bm{Species::b, j};

  std::vector<double> cuts{lo};
  std::function<double(double)> profile;
  if (const auto* c = std::get_if<ConstantProfile>(&p.cavity_profile)) {
    const double v = c->value;
    profile = [v](double) { return v; };
  } else {
    const auto& s = std::get<SampledProfile>(p.cavity_profile);
    const double slack = 1e-12 * g.box_width();
    if (s.x.front() > lo + slack || s.x.back() < hi - slack)
      throw ParameterError("sampled cavity profile does not cover the well support");
    for (double xn : s.x)
      if (xn > lo && xn < hi) cuts.push_back(xn);
    profile = [&s](double x) { return s(x); };
  }
  cuts.push_back(hi);

  auto integrand = [&](double x) {
    return mode_function(g, am, x) * mode_function(g, bm, x) * profile(x);
  };
  double total = 0.0;
  for (std::size_t k = 1; k < cuts.size(); ++k)
    total += quadrature::integrate(integrand, cuts[k - 1], cuts[k], opts);
  return p.g0 * total;
}

/// g0 |C| sqrt(ell/Lb): the coupling on the degenerate branch j ell = Lb, used
/// as the absolute scale when an overlap vanishes identically (sin_pi(s) = 0).
inline double coupling_reference_scale(const ModelParams& p) {
  double c = 0.0;
  if (const auto* cp = std::get_if<ConstantProfile>(&p.cavity_profile)) {
    c = std::abs(cp->value);
  } else {
    for (double v : std::get<SampledProfile>(p.cavity_profile).values) c = std::max(c, std::abs(v));
  }
  return p.g0 * c * std::sqrt(p.geometry.ell / p.geometry.box_width());
}

/// g_{sigma j} = g0 * int phi_sigma^(a) phi_j^(b) C dx. Closed form for a constant
/// profile, adaptive quadrature otherwise.
inline double coupling_overlap(const ModelParams& p, Side sigma, int j) {
  if (j < 1) throw ParameterError("mode index j must be >= 1");
  if (const auto* c = std::get_if<ConstantProfile>(&p.cavity_profile)) {
    p.validate();
    const double left = p.g0 * c->value * detail::left_overlap_unit(p.geometry, j);
    return sigma == Side::left ? left : reflection_sign(j) * left;
  }
  return coupling_overlap_quadrature(p, sigma, j);
}

}  // namespace t3k
