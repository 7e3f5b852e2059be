#pragma once

// One-axis parameter sweeps. Every point yields a record; failures are kept
// as flagged rows and never turn into silent NaNs.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "t3k/cli/config.hpp"
#include "t3k/dynamics.hpp"
#include "t3k/hamiltonian.hpp"
#include "t3k/selfenergy.hpp"

namespace t3k::cli {

struct SweepPoint {
  double axis_value = 0.0;
  std::optional<double> value;
  int j_used = 0;
  bool converged = false;
  std::string status;  ///< ok, near_pole, pole, resonance, not_converged, classification, invalid
};

struct SweepResult {
  std::string axis;
  std::string observable;
  std::vector<SweepPoint> points;
};

inline ModelConfig with_axis(ModelConfig m, const std::string& axis, double v) {
  if (axis == "d") m.d = v;
  else if (axis == "ell") m.ell = v;
  else if (axis == "Delta") m.Delta = v;
  else if (axis == "g0") m.g0 = v;
  else throw ConfigError("sweep.axis", "unknown axis '" + axis + "'");
  return m;
}

inline SweepPoint evaluate_point(const ModelConfig& model, const TruncationConfig& trunc,
                                 const std::string& observable, double series_tol) {
  SweepPoint pt;
  try {
    const ModelParams p = model.params();
    if (observable == "delta_e_series") {
      const auto r = pt2_series(p, series_tol);
      pt.value = r.delta_e;
      pt.j_used = r.j_used;
      pt.converged = r.converged;
    } else if (observable == "delta_e_closed") {
      const auto r = delta_e_closed(p);
      pt.value = r.delta_e;
      pt.converged = true;
      if (r.near_pole) pt.status = "near_pole";
    } else if (observable == "splitting_spectrum") {
      const auto h = build_hamiltonian(p, trunc.truncation, trunc.rwa);
      pt.value = splitting_from_spectrum(h).delta_e;
      pt.j_used = trunc.truncation.j_max;
      pt.converged = true;
    } else {
      throw ConfigError("sweep.observable", "unknown observable '" + observable + "'");
    }
    if (pt.value && !std::isfinite(*pt.value)) {
      pt.value.reset();
      pt.status = "non_finite";
    } else if (pt.status.empty()) {
      pt.status = "ok";
    }
  } catch (const PoleError&) {
    pt.status = "pole";
  } catch (const ResonanceError&) {
    pt.status = "resonance";
  } catch (const ConvergenceError&) {
    pt.status = "not_converged";
  } catch (const ClassificationError&) {
    pt.status = "classification";
  } catch (const ConfigError&) {
    throw;
  } catch (const ParameterError&) {
    pt.status = "invalid";
  }
  if (!pt.value) pt.converged = false;
  return pt;
}

inline SweepResult run_sweep(const ModelConfig& model, const TruncationConfig& trunc,
                             const SweepConfig& sweep, double series_tol = 1e-12) {
  SweepResult out{sweep.axis, sweep.observable, {}};
  for (double v : sweep.values()) {
    auto pt = evaluate_point(with_axis(model, sweep.axis, v), trunc, sweep.observable, series_tol);
    pt.axis_value = v;
    out.points.push_back(pt);
  }
  return out;
}

/// Least-squares polynomial coefficients c[0] + c[1] x + ... + c[deg] x^deg.
inline std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y,
                                   int deg) {
  if (x.size() != y.size() || static_cast<int>(x.size()) <= deg || deg < 0)
    throw ParameterError("polyfit: need more points than the degree");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(n, deg + 1);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double xp = 1.0;
    for (int k = 0; k <= deg; ++k, xp *= x[i]) a(i, k) = xp;
    b(i) = y[i];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  return {c.data(), c.data() + c.size()};
}

}  // namespace t3k::cli
