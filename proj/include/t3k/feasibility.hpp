#pragma once

// Experiment-design calculator in SI units: xi, epsilon, the largest useful
// wall thickness and a verdict against the cavity decay rate.
//
// Report JSON field names are stable:
//   xi_m, epsilon_over_hbar_rad_s, epsilon_over_hbar_hz, delta_e_over_hbar_rad_s,
//   delta_e_over_hbar_hz, kappa_rad_s, d_max_m, d_max_unbounded, xi_over_ell,
//   eps_over_hbar_kappa, delta_e_over_hbar_kappa, branch, feasible, notes

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "t3k/errors.hpp"
#include "t3k/selfenergy.hpp"

namespace t3k::feasibility {

inline constexpr double kHbar = 1.054571817e-34;          // J s
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;  // kg
inline constexpr double kRb87Mass = 86.909180531 * kAtomicMassUnit;
/// "significantly greater": delta_E / hbar >= kMargin * kappa.
inline constexpr double kMargin = 10.0;

enum class DeltaSign { positive, negative };

inline const char* to_string(DeltaSign s) { return s == DeltaSign::positive ? "positive" : "negative"; }

struct ExperimentParams {
  double atom_mass = kRb87Mass;   // kg
  double rabi_coupling_hz = 50e3; // Omega / 2 pi; g~0 = 2 pi * value
  double transition_hz = 51.1e9;  // |Delta| / 2 pi
  double cavity_decay_hz = 7.7;   // kappa / 2 pi
  double ell = 0.0;               // m
  double d = 0.0;                 // m
  DeltaSign delta_sign = DeltaSign::positive;

  double g_tilde() const { return 2.0 * std::numbers::pi * rabi_coupling_hz; }
  double delta_abs() const { return 2.0 * std::numbers::pi * transition_hz; }
  double kappa() const { return 2.0 * std::numbers::pi * cavity_decay_hz; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw ParameterError(fmt::format("experiment: {} must be > 0", name));
    };
    positive(atom_mass, "atom_mass");
    positive(rabi_coupling_hz, "rabi_coupling_hz");
    positive(transition_hz, "transition_hz");
    positive(ell, "ell");
    positive(d, "d");
    if (!(cavity_decay_hz >= 0.0) || !std::isfinite(cavity_decay_hz))
      throw ParameterError("experiment: cavity_decay_hz must be >= 0");
  }
};

/// Units the calculation is carried out in, given as their SI size. The
/// dimensionless report ratios do not depend on this choice.
struct UnitSystem {
  double length = 1.0;  // m
  double time = 1.0;    // s
  double mass = 1.0;    // kg

  double hbar() const { return kHbar * time / (mass * length * length); }
};

struct Scales {
  double xi_m = 0.0;
  double epsilon_over_hbar = 0.0;  // rad/s
};

namespace detail {

struct Internal {
  double hbar, mass, g, delta, kappa, ell, d;
};

inline Internal to_internal(const ExperimentParams& p, const UnitSystem& u) {
  return {u.hbar(),          p.atom_mass / u.mass, p.g_tilde() * u.time, p.delta_abs() * u.time,
          p.kappa() * u.time, p.ell / u.length,    p.d / u.length};
}

}  // namespace detail

inline Scales characteristic_scales(const ExperimentParams& p, const UnitSystem& u = {}) {
  p.validate();
  const auto q = detail::to_internal(p, u);
  const double xi = xi_length(q.mass, q.delta, q.hbar);
  // epsilon_scale returns an energy; divide hbar back out for a rate.
  const double eps = epsilon_scale(q.g, q.delta, xi, q.ell, q.hbar) / q.hbar;
  return {xi * u.length, eps / u.time};
}

/// xi ln(epsilon / hbar kappa), signed; +inf for kappa = 0.
inline double max_wall_thickness(double xi_m, double epsilon_over_hbar, double kappa) {
  if (!(xi_m > 0.0)) throw ParameterError("max_wall_thickness: xi must be > 0");
  if (!(epsilon_over_hbar > 0.0)) throw ParameterError("max_wall_thickness: epsilon must be > 0");
  if (!(kappa >= 0.0)) throw ParameterError("max_wall_thickness: kappa must be >= 0");
  if (kappa == 0.0) return std::numeric_limits<double>::infinity();
  return xi_m * std::log(epsilon_over_hbar / kappa);
}

struct FeasibilityReport {
  double xi_m = 0.0;
  double epsilon_over_hbar = 0.0;                 // rad/s
  std::optional<double> delta_e_over_hbar;        // rad/s; empty at a pole
  double kappa = 0.0;                             // rad/s
  double d_max_m = 0.0;                           // may be <= 0 or +inf
  double xi_over_ell = 0.0;
  double eps_over_hbar_kappa = 0.0;               // +inf for kappa = 0
  std::optional<double> delta_e_over_hbar_kappa;
  DeltaSign branch = DeltaSign::positive;
  bool feasible = false;
  std::vector<std::string> notes;
};

inline FeasibilityReport feasibility_report(const ExperimentParams& p, const UnitSystem& u = {}) {
  p.validate();
  const auto q = detail::to_internal(p, u);
  const auto sc = characteristic_scales(p, u);

  FeasibilityReport r;
  r.xi_m = sc.xi_m;
  r.epsilon_over_hbar = sc.epsilon_over_hbar;
  r.kappa = p.kappa();
  r.branch = p.delta_sign;
  r.d_max_m = max_wall_thickness(sc.xi_m, sc.epsilon_over_hbar, r.kappa);
  const double xi_int = sc.xi_m / u.length;
  r.xi_over_ell = xi_int / q.ell;
  const double eps_int = sc.epsilon_over_hbar * u.time;
  r.eps_over_hbar_kappa = q.kappa > 0.0 ? eps_int / q.kappa : std::numeric_limits<double>::infinity();

  std::optional<double> de_int;
  if (p.delta_sign == DeltaSign::positive) {
    de_int = delta_e_closed_form(q.g, q.mass, xi_int, q.ell, q.d, DetuningBranch::positive) / q.hbar;
  } else {
    const double uarg = (2.0 * q.ell + q.d) / xi_int;
    const double k = std::max(1.0, std::round(uarg / std::numbers::pi));
    const double dist = std::abs(uarg - k * std::numbers::pi);
    const PoleOptions po;
    if (dist < po.tolerance) {
      r.notes.push_back(fmt::format(
          "resonance proximity: (2 ell + d)/xi is within {:.3g} of {} pi; the non-exponential "
          "estimate diverges here",
          dist, static_cast<int>(k)));
    } else {
      de_int = delta_e_closed_form(q.g, q.mass, xi_int, q.ell, q.d, DetuningBranch::negative) / q.hbar;
      if (dist < po.warning_band)
        r.notes.push_back(fmt::format("resonance proximity: (2 ell + d)/xi is {:.3g} from {} pi",
                                      dist, static_cast<int>(k)));
    }
    r.notes.push_back(
        "negative detuning: delta_E is not exponentially suppressed in d; d_max is the "
        "positive-branch bound and is kept as a conservative wall limit");
  }

  if (de_int) {
    // delta_E oscillates in sign on the negative branch; the rate is its magnitude.
    const double rate = std::abs(*de_int);
    r.delta_e_over_hbar = rate / u.time;
    if (q.kappa > 0.0) r.delta_e_over_hbar_kappa = rate / q.kappa;
  }

  const bool rate_ok = r.delta_e_over_hbar && *r.delta_e_over_hbar >= kMargin * r.kappa;
  const bool wall_ok = p.d > 0.0 && p.d < r.d_max_m;
  r.feasible = rate_ok && wall_ok;

  if (r.delta_e_over_hbar) {
    const char* cmp = rate_ok ? "exceeds" : "does not exceed";
    r.notes.push_back(fmt::format(
        "delta_E/hbar = {:.4g} rad/s {} {:.0f} x cavity decay rate kappa = {:.4g} rad/s", *r.delta_e_over_hbar,
        cmp, kMargin, r.kappa));
  }
  if (!(r.d_max_m > 0.0))
    r.notes.push_back(fmt::format(
        "no viable wall thickness: epsilon/hbar = {:.4g} rad/s is below kappa, so d_max = {:.4g} m",
        r.epsilon_over_hbar, r.d_max_m));
  else if (!wall_ok)
    r.notes.push_back(fmt::format("wall d = {:.4g} m is not below d_max = {:.4g} m", p.d, r.d_max_m));
  if (std::isinf(r.d_max_m)) r.notes.push_back("kappa = 0: d_max unbounded");
  return r;
}

inline nlohmann::ordered_json to_json(const FeasibilityReport& r) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    if (v) return *v;
    return nullptr;
  };
  const double two_pi = 2.0 * std::numbers::pi;
  nlohmann::ordered_json j;
  j["xi_m"] = r.xi_m;
  j["epsilon_over_hbar_rad_s"] = r.epsilon_over_hbar;
  j["epsilon_over_hbar_hz"] = r.epsilon_over_hbar / two_pi;
  j["delta_e_over_hbar_rad_s"] = opt(r.delta_e_over_hbar);
  j["delta_e_over_hbar_hz"] =
      opt(r.delta_e_over_hbar ? std::optional<double>(*r.delta_e_over_hbar / two_pi) : std::nullopt);
  j["kappa_rad_s"] = r.kappa;
  j["d_max_m"] = std::isinf(r.d_max_m) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.d_max_m);
  j["d_max_unbounded"] = std::isinf(r.d_max_m);
  j["xi_over_ell"] = r.xi_over_ell;
  j["eps_over_hbar_kappa"] =
      std::isinf(r.eps_over_hbar_kappa) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.eps_over_hbar_kappa);
  j["delta_e_over_hbar_kappa"] = opt(r.delta_e_over_hbar_kappa);
  j["branch"] = to_string(r.branch);
  j["feasible"] = r.feasible;
  j["notes"] = r.notes;
  return j;
}

}  // namespace t3k::feasibility
