#pragma once

// Second-order level shifts of the a-doublet from virtual |b,j,1> states.
//
// Only odd box modes couple to the symmetric combination and only even ones to
// the antisymmetric combination, so
//   Pi_SS = -sum_{j odd}  2 hbar g_{Lj}^2 / delta_j
//   Pi_AA = -sum_{j even} 2 hbar g_{Lj}^2 / delta_j
// with delta_j = omega_j^(b) + omega_c - omega_a = Delta + hbar k_j^2 / 2m.
// Resumming the series gives the sinh/csch law for Delta > 0 and its sin/csc
// continuation for Delta < 0.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "t3k/errors.hpp"
#include "t3k/modes.hpp"

namespace t3k {

inline double xi_length(double mass, double Delta, double hbar = 1.0) {
  if (!(mass > 0.0)) throw ParameterError("xi_length: mass must be > 0");
  if (Delta == 0.0 || !std::isfinite(Delta))
    throw ResonanceError("xi_length: Delta = 0 is resonant");
  return std::sqrt(hbar / (2.0 * mass * std::abs(Delta)));
}

struct ScaleParams {
  double xi = 0.0;
  double Delta = 0.0;
  double epsilon = 0.0;
};

/// epsilon = 2 pi^2 hbar g^2 / |Delta| (xi/ell)^3.
inline double epsilon_scale(double g_tilde, double Delta, double xi, double ell,
                            double hbar = 1.0) {
  const double r = xi / ell;
  return 2.0 * std::numbers::pi * std::numbers::pi * hbar * g_tilde * g_tilde /
         std::abs(Delta) * r * r * r;
}

inline ScaleParams scale_params(const ModelParams& p) {
  const double Delta = p.detuning();
  const double xi = xi_length(p.mass, Delta, p.hbar);
  return {xi, Delta, epsilon_scale(p.effective_coupling(), Delta, xi, p.geometry.ell, p.hbar)};
}

struct SelfEnergyResult {
  double pi_ss = 0.0;
  double pi_aa = 0.0;
  double delta_e = 0.0;
  int j_used = 0;
  double tail_estimate = 0.0;
  bool converged = false;
};

/// The 2x2 second-order self-energy in the {L, R} and {S, A} bases.
struct SelfEnergyMatrix {
  Eigen::Matrix2d lr;
  Eigen::Matrix2d sa;
};

namespace detail {

// Relative size of |delta_j| / |Delta| below which a term counts as resonant.
inline constexpr double kNearResonance = 1e-6;

inline double intermediate_detuning(const ModelParams& p, int j) {
  return mode_frequency(p, {Species::b, j}) + p.omega_c - p.omega_a();
}

inline void check_resonance(const ModelParams& p, double delta_j, int j) {
  if (std::abs(delta_j) < kNearResonance * std::abs(p.detuning()) || delta_j == 0.0)
    throw ResonanceError("near-resonance: intermediate detuning of box mode j=" +
                         std::to_string(j) + " is " + std::to_string(delta_j));
}

// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace detail

/// One contribution 2 hbar g_{Lj}^2 / delta_j (positive sign convention; the
/// shift is minus this). Constant profile only.
inline double pt2_term(const ModelParams& p, int j) {
  const double g = coupling_overlap(p, Side::left, j);
  const double dj = detail::intermediate_detuning(p, j);
  detail::check_resonance(p, dj, j);
  return 2.0 * p.hbar * g * g / dj;
}

/// Series summed over j = 1..j_max exactly; tail_estimate is left at zero.
inline SelfEnergyResult pt2_truncated(const ModelParams& p, int j_max) {
  p.validate();
  (void)p.effective_coupling();
  if (j_max < 1) throw ParameterError("pt2_truncated: j_max must be >= 1");
  detail::CompensatedSum ss, aa;
  for (int j = 1; j <= j_max; ++j) (j % 2 == 1 ? ss : aa).add(-pt2_term(p, j));
  SelfEnergyResult r;
  r.pi_ss = ss.value();
  r.pi_aa = aa.value();
  r.delta_e = r.pi_aa - r.pi_ss;
  r.j_used = j_max;
  r.converged = true;
  return r;
}

/// Upper bound on sum_{j > J} |2 hbar g_{Lj}^2 / delta_j|, valid once J passes
/// tail_bound_start(). Uses |g_Lj| <= G (2/sqrt(ell Lb)) k1 / (kj^2 - k1^2) and
/// |delta_j| >= hbar kj^2 / 4m, i.e. terms <= C / j^6.
inline double tail_bound(const ModelParams& p, int J) {
  const double ell = p.geometry.ell;
  const double lb = p.geometry.box_width();
  const double g = p.effective_coupling();
  const double k1 = std::numbers::pi / ell;
  const double pi6 = std::pow(std::numbers::pi, 6);
  const double c = 128.0 * p.mass * g * g * k1 * k1 * std::pow(lb, 5) / (ell * pi6);
  return c / (5.0 * std::pow(static_cast<double>(J), 5));
}

inline int tail_bound_start(const ModelParams& p) {
  const double ell = p.geometry.ell;
  const double lb = p.geometry.box_width();
  const double j_overlap = std::sqrt(2.0) * lb / ell;
  const double j_detuning =
      lb / std::numbers::pi * std::sqrt(4.0 * p.mass * std::abs(p.detuning()) / p.hbar);
  return static_cast<int>(std::ceil(std::max(j_overlap, j_detuning))) + 1;
}

/// Series extended until the analytic tail bound drops below `tol` (energy).
inline SelfEnergyResult pt2_series(const ModelParams& p, double tol = 1e-12,
                                   int j_limit = 1 << 22) {
  p.validate();
  (void)p.effective_coupling();
  if (!(tol > 0.0)) throw ParameterError("pt2_series: tol must be > 0");
  SelfEnergyResult r;
  if (p.g0 == 0.0) {
    r.converged = true;
    r.j_used = 1;
    return r;
  }
  const int j_start = tail_bound_start(p);
  detail::CompensatedSum ss, aa;
  int j = 1;
  double tail = std::numeric_limits<double>::infinity();
  for (; j <= j_limit; ++j) {
    (j % 2 == 1 ? ss : aa).add(-pt2_term(p, j));
    if (j >= j_start) {
      tail = tail_bound(p, j);
      if (tail < tol) break;
    }
  }
  if (j > j_limit)
    throw ConvergenceError("pt2_series: tail bound still " + std::to_string(tail) +
                           " after j = " + std::to_string(j_limit));
  r.pi_ss = ss.value();
  r.pi_aa = aa.value();
  r.delta_e = r.pi_aa - r.pi_ss;
  r.j_used = j;
  r.tail_estimate = tail;
  r.converged = true;
  return r;
}

/// Full 2x2 second-order matrix Pi_{nn'} = -sum_j hbar g_{nj} g_{n'j} / delta_j
/// (cavity photon emitted and reabsorbed on the same box mode j).
inline SelfEnergyMatrix pt2_matrix(const ModelParams& p, int j_max) {
  p.validate();
  (void)p.effective_coupling();
  Eigen::Matrix2d lr = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d sa = Eigen::Matrix2d::Zero();
  const double r = 1.0 / std::sqrt(2.0);
  for (int j = 1; j <= j_max; ++j) {
    const double gl = coupling_overlap(p, Side::left, j);
    const double gr = coupling_overlap(p, Side::right, j);
    const double dj = detail::intermediate_detuning(p, j);
    detail::check_resonance(p, dj, j);
    const Eigen::Vector2d v_lr(gl, gr);
    const Eigen::Vector2d v_sa(r * (gl + gr), r * (gl - gr));
    lr -= p.hbar * v_lr * v_lr.transpose() / dj;
    sa -= p.hbar * v_sa * v_sa.transpose() / dj;
  }
  return {lr, sa};
}

enum class DetuningBranch { positive, negative };

struct ClosedFormResult {
  double delta_e = 0.0;
  double xi = 0.0;
  DetuningBranch branch = DetuningBranch::positive;
  /// Negative branch only: (2 ell + d)/xi relative to the nearest k pi.
  int pole_k = 0;
  double pole_distance = std::numeric_limits<double>::infinity();
  bool near_pole = false;  ///< within the warning band, outside the error tolerance
};

struct PoleOptions {
  double tolerance = 1e-6;     ///< |(2 ell + d)/xi - k pi| below this is an error
  double warning_band = 1e-3;  ///< below this the result carries a proximity warning
};

namespace detail {

inline double log_sinh(double x) {
  return x + std::log1p(-std::exp(-2.0 * x)) - std::numbers::ln2;
}

// sinh^2(a) / sinh(b) for 0 < a < b, overflow-safe for large arguments.
inline double sinh2_csch(double a, double b) {
  if (a <= 30.0) {
    const double sa = std::sinh(a);
    return sa * sa / std::sinh(b);
  }
  return std::exp(2.0 * log_sinh(a) - log_sinh(b));
}

// sin(y) / (1 - y^2/pi^2), continuous through the removable point y = pi.
inline double sin_over_defect(double y) {
  const double pi = std::numbers::pi;
  const double e = pi - y;
  if (std::abs(e) < 1e-4) {
    const double sinc = 1.0 - e * e / 6.0 + e * e * e * e / 120.0;
    return pi * pi * sinc / (pi + y);
  }
  return std::sin(y) / (1.0 - y * y / (pi * pi));
}

}  // namespace detail

/// delta_E from the resummed series in terms of (g~0, m, xi, ell, d) directly.
///   Delta > 0:  8 g^2 m xi ell sinh^2(ell/xi) csch(Lb/xi) / (pi^2 (1 + ell^2/(xi pi)^2)^2)
///   Delta < 0:  8 g^2 m xi ell sin^2(ell/xi)  csc(Lb/xi)  / (pi^2 (1 - ell^2/(xi pi)^2)^2)
inline double delta_e_closed_form(double g_tilde, double mass, double xi, double ell, double d,
                                  DetuningBranch branch) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double y = ell / xi;
  const double u = (2.0 * ell + d) / xi;
  const double pref = 8.0 * g_tilde * g_tilde * mass * xi * ell / pi2;
  if (branch == DetuningBranch::positive) {
    const double defect = 1.0 + y * y / pi2;
    return pref * detail::sinh2_csch(y, u) / (defect * defect);
  }
  const double q = detail::sin_over_defect(y);
  return pref * q * q / std::sin(u);
}

inline ClosedFormResult delta_e_closed(const ModelParams& p, const PoleOptions& opts = {}) {
  p.validate();
  const double g = p.effective_coupling();
  const double Delta = p.detuning();
  ClosedFormResult r;
  r.xi = xi_length(p.mass, Delta, p.hbar);
  r.branch = Delta > 0.0 ? DetuningBranch::positive : DetuningBranch::negative;
  const double ell = p.geometry.ell;
  const double d = p.geometry.d;
  if (r.branch == DetuningBranch::negative) {
    const double u = p.geometry.box_width() / r.xi;
    const double k = std::max(1.0, std::round(u / std::numbers::pi));
    r.pole_k = static_cast<int>(k);
    r.pole_distance = std::abs(u - k * std::numbers::pi);
    if (r.pole_distance < opts.tolerance)
      throw PoleError("pole of the negative-detuning branch: (2 ell + d)/xi is within " +
                          std::to_string(r.pole_distance) + " of " + std::to_string(r.pole_k) +
                          " pi (resonant box mode)",
                      r.pole_k, r.pole_distance);
    r.near_pole = r.pole_distance < opts.warning_band;
  }
  r.delta_e = delta_e_closed_form(g, p.mass, r.xi, ell, d, r.branch);
  return r;
}

struct AsymptoticResult {
  double epsilon = 0.0;
  double delta_e_approx = 0.0;
};

/// ell >> xi limit for Delta > 0: delta_E ~ epsilon exp(-d/xi).
inline AsymptoticResult delta_e_asymptotic(const ModelParams& p) {
  p.validate();
  const double Delta = p.detuning();
  if (!(Delta > 0.0)) throw ParameterError("asymptotic law needs Delta > 0");
  const auto s = scale_params(p);
  return {s.epsilon, s.epsilon * std::exp(-p.geometry.d / s.xi)};
}

}  // namespace t3k
