#pragma once

// Time-local effective kernel for the a-field after integrating out the
// b-atom/photon fluctuations at second order:
//
//   Pi(x, x') = -hbar g~0^2 sum_j phi_j^(b)(x) phi_j^(b)(x') / delta_j
//
// Its projections on the a-doublet reproduce the perturbative shifts, and its
// left-well/right-well block is what carries the atom across the barrier.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/LU>

#include "t3k/dynamics.hpp"
#include "t3k/errors.hpp"
#include "t3k/modes.hpp"
#include "t3k/selfenergy.hpp"

namespace t3k {

/// Nodes and composite-Simpson weights over [-Lb/2, Lb/2], uniform within each
/// of the three segments (left well, barrier, right well) with nodes on the
/// segment boundaries.
struct SpatialGrid {
  std::vector<double> x;
  std::vector<double> w;
  std::vector<double> w_coarse;  ///< Simpson weights of the every-other-node subgrid (0 off it)
  std::array<std::size_t, 4> segment_nodes{};  ///< node index of each segment boundary

  std::size_t size() const { return x.size(); }
};

inline SpatialGrid make_spatial_grid(const Geometry& g, int target_points = 801) {
  g.validate();
  if (target_points < 13) throw ParameterError("spatial grid needs at least 13 points");
  const double h = g.box_width() / (target_points - 1);
  const double edges[4] = {-g.outer_wall(), -0.5 * g.d, 0.5 * g.d, g.outer_wall()};
  SpatialGrid grid;
  grid.x.push_back(edges[0]);
  for (int s = 0; s < 3; ++s) {
    const double len = edges[s + 1] - edges[s];
    // multiple of 4 so the coarse subgrid is also Simpson-compatible
    int n = std::max(4, static_cast<int>(std::ceil(len / h / 4.0)) * 4);
    grid.segment_nodes[s] = grid.x.size() - 1;
    for (int k = 1; k <= n; ++k)
      grid.x.push_back(k == n ? edges[s + 1] : edges[s] + len * k / n);
  }
  grid.segment_nodes[3] = grid.x.size() - 1;
  grid.w.assign(grid.x.size(), 0.0);
  grid.w_coarse.assign(grid.x.size(), 0.0);
  for (int s = 0; s < 3; ++s) {
    const std::size_t a = grid.segment_nodes[s];
    const std::size_t b = grid.segment_nodes[s + 1];
    const auto n = b - a;
    const double hs = (grid.x[b] - grid.x[a]) / static_cast<double>(n);
    for (std::size_t k = 0; k <= n; ++k) {
      const double c = (k == 0 || k == n) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
      grid.w[a + k] += c * hs / 3.0;
      if (k % 2 == 0) {
        const std::size_t kc = k / 2, nc = n / 2;
        const double cc = (kc == 0 || kc == nc) ? 1.0 : (kc % 2 == 1 ? 4.0 : 2.0);
        grid.w_coarse[a + k] += cc * 2.0 * hs / 3.0;
      }
    }
  }
  return grid;
}

struct KernelGrid {
  SpatialGrid grid;
  Eigen::MatrixXd pi;  ///< Pi(x_i, x_k), energy per length^2
  int j_max = 0;
  double pointwise_tail_bound = 0.0;  ///< bound on |omitted modes| at any (x, x')
  ModelParams params;
};

inline KernelGrid build_kernel(const ModelParams& p, const SpatialGrid& grid, int j_max) {
  p.validate();
  const double g = p.effective_coupling();
  if (j_max < 1) throw ParameterError("build_kernel: j_max must be >= 1");
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd phi(n, j_max);
  Eigen::VectorXd inv_delta(j_max);
  for (int j = 1; j <= j_max; ++j) {
    const double dj = detail::intermediate_detuning(p, j);
    detail::check_resonance(p, dj, j);
    inv_delta(j - 1) = 1.0 / dj;
    for (Eigen::Index i = 0; i < n; ++i)
      phi(i, j - 1) = mode_function(p.geometry, {Species::b, j}, grid.x[i]);
  }
  KernelGrid k;
  k.grid = grid;
  k.j_max = j_max;
  k.params = p;
  k.pi = -p.hbar * g * g * (phi * inv_delta.asDiagonal() * phi.transpose());
  k.pi = 0.5 * (k.pi + k.pi.transpose()).eval();
  // |phi_j| <= sqrt(2/Lb), |delta_j| >= hbar kj^2/4m beyond tail_bound_start.
  const int J = std::max(j_max, tail_bound_start(p));
  const double lb = p.geometry.box_width();
  k.pointwise_tail_bound = (j_max >= tail_bound_start(p))
                               ? 8.0 * p.mass * g * g * lb / (std::numbers::pi * std::numbers::pi * J)
                               : std::numeric_limits<double>::infinity();
  return k;
}

inline KernelGrid build_kernel(const ModelParams& p, int grid_points = 801, int j_max = 64) {
  return build_kernel(p, make_spatial_grid(p.geometry, grid_points), j_max);
}

enum class DoubletMode { S, A, L, R };

inline const char* to_string(DoubletMode m) {
  switch (m) {
    case DoubletMode::S: return "S";
    case DoubletMode::A: return "A";
    case DoubletMode::L: return "L";
    case DoubletMode::R: return "R";
  }
  return "?";
}

/// S = (L + R)/sqrt2, A = (L - R)/sqrt2, sampled on the grid.
inline Eigen::VectorXd doublet_samples(const Geometry& g, const SpatialGrid& grid, DoubletMode m) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd v(n);
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double l = mode_function(g, {Species::a_left, 1}, grid.x[i]);
    const double rr = mode_function(g, {Species::a_right, 1}, grid.x[i]);
    switch (m) {
      case DoubletMode::S: v(i) = r * (l + rr); break;
      case DoubletMode::A: v(i) = r * (l - rr); break;
      case DoubletMode::L: v(i) = l; break;
      case DoubletMode::R: v(i) = rr; break;
    }
  }
  return v;
}

struct Projection {
  double value = 0.0;
  double error_estimate = 0.0;  ///< Richardson estimate from the coarse subgrid
};

struct ProjectionOptions {
  double rel_tol = 1e-7;  ///< relative to |Pi_LL|
};

/// Pi_{n n'} = double integral of phi_n(x) Pi(x, x') phi_n'(x') by tensor Simpson quadrature.
inline Projection project_kernel(const KernelGrid& k, DoubletMode n, DoubletMode np,
                                 const ProjectionOptions& opts = {}) {
  const auto& grid = k.grid;
  const Eigen::Map<const Eigen::VectorXd> w(grid.w.data(), static_cast<Eigen::Index>(grid.size()));
  const Eigen::Map<const Eigen::VectorXd> wc(grid.w_coarse.data(),
                                             static_cast<Eigen::Index>(grid.size()));
  auto quad = [&](const Eigen::VectorXd& weights, const Eigen::VectorXd& a,
                  const Eigen::VectorXd& b) {
    const Eigen::VectorXd wa = weights.cwiseProduct(a);
    const Eigen::VectorXd wb = weights.cwiseProduct(b);
    return wa.dot(k.pi * wb);
  };
  const Eigen::VectorXd fn = doublet_samples(k.params.geometry, grid, n);
  const Eigen::VectorXd fnp = doublet_samples(k.params.geometry, grid, np);
  const double fine = quad(w, fn, fnp);
  const double coarse = quad(wc, fn, fnp);
  Projection out{fine, std::abs(fine - coarse) / 15.0};

  const Eigen::VectorXd fl = doublet_samples(k.params.geometry, grid, DoubletMode::L);
  const double scale = std::abs(quad(w, fl, fl));
  if (out.error_estimate > opts.rel_tol * scale)
    throw ConvergenceError("kernel grid too coarse: projection " + std::string(to_string(n)) +
                           std::string(to_string(np)) + " error estimate " +
                           std::to_string(out.error_estimate));
  return out;
}

/// Amplitudes of the reduced doublet dynamics with c_L(0) = 1.
struct TwoModeState {
  Complex c_s;
  Complex c_a;
  double energy = 0.0;
  double pi_ss = 0.0;
  double pi_aa = 0.0;

  Complex c_l() const { return (c_s + c_a) / std::sqrt(2.0); }
  Complex c_r() const { return (c_s - c_a) / std::sqrt(2.0); }
};

struct TwoModeSeries {
  std::vector<double> t;
  std::vector<double> p;  ///< sin^2((Pi_AA - Pi_SS) t / 2 hbar)
  std::vector<Complex> c_l;
  std::vector<Complex> c_r;
};

inline TwoModeState two_mode_state(double energy, double pi_ss, double pi_aa, double t,
                                   double hbar = 1.0) {
  const double r = 1.0 / std::sqrt(2.0);
  return {r * std::polar(1.0, -(energy + pi_ss) * t / hbar),
          r * std::polar(1.0, -(energy + pi_aa) * t / hbar), energy, pi_ss, pi_aa};
}

inline TwoModeSeries two_mode_evolve(double energy, double pi_ss, double pi_aa,
                                     std::span<const double> t_grid, double hbar = 1.0) {
  TwoModeSeries out;
  const double split = pi_aa - pi_ss;
  for (double t : t_grid) {
    const double s = std::sin(0.5 * split * t / hbar);
    const auto st = two_mode_state(energy, pi_ss, pi_aa, t, hbar);
    out.t.push_back(t);
    out.p.push_back(s * s);
    out.c_l.push_back(st.c_l());
    out.c_r.push_back(st.c_r());
  }
  return out;
}

struct NonlocalOptions {
  double max_step = 0.0;  ///< Cayley step; 0 picks (pi hbar / |delta E|) / 400
};

/// Direct integration of the non-local a-field equation restricted to the two
/// wells: second-order finite-difference kinetic term plus the quadrature of
/// Pi, advanced with the Cayley (Crank-Nicolson) map. Returns the probability
/// in the right-well ground mode, starting from the left-well ground mode.
inline std::vector<double> evolve_nonlocal(const KernelGrid& k, std::span<const double> t_grid,
                                           const NonlocalOptions& opts = {}) {
  const auto& grid = k.grid;
  const auto& p = k.params;
  std::vector<std::size_t> nodes;
  for (int s : {0, 2})
    for (std::size_t i = grid.segment_nodes[s] + 1; i < grid.segment_nodes[s + 1]; ++i)
      nodes.push_back(i);
  const auto m = static_cast<Eigen::Index>(nodes.size());
  const auto half = m / 2;
  const double hw = grid.x[grid.segment_nodes[0] + 1] - grid.x[grid.segment_nodes[0]];

  Eigen::MatrixXd h(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) h(r, c) = hw * k.pi(nodes[r], nodes[c]);
  const double kin = p.hbar * p.hbar / (2.0 * p.mass * hw * hw);
  for (Eigen::Index r = 0; r < m; ++r) {
    h(r, r) += 2.0 * kin;
    const bool same_well_next = (r + 1 < m) && ((r + 1 < half) == (r < half));
    if (same_well_next) {
      h(r, r + 1) -= kin;
      h(r + 1, r) -= kin;
    }
  }
  // Remove the common doublet energy (discrete well ground level plus the mean
  // self-energy shift): the Cayley map compresses the phase of a level E by
  // 1 / (1 + (E dt / 2 hbar)^2), which would otherwise slow the tunnelling.
  const double pi_ss = project_kernel(k, DoubletMode::S, DoubletMode::S).value;
  const double pi_aa = project_kernel(k, DoubletMode::A, DoubletMode::A).value;
  const double n_w = static_cast<double>(half + 1);
  const double e0 = 2.0 * kin * (1.0 - std::cos(std::numbers::pi / n_w));
  h.diagonal().array() -= e0 + 0.5 * (pi_ss + pi_aa);

  Eigen::VectorXd phi_l(m), phi_r(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    phi_l(r) = mode_function(p.geometry, {Species::a_left, 1}, grid.x[nodes[r]]);
    phi_r(r) = mode_function(p.geometry, {Species::a_right, 1}, grid.x[nodes[r]]);
  }
  phi_l /= std::sqrt(hw * phi_l.squaredNorm());
  phi_r /= std::sqrt(hw * phi_r.squaredNorm());

  double step = opts.max_step;
  if (!(step > 0.0)) {
    const double split = std::abs(pi_aa - pi_ss);
    step = split > 0.0 ? std::numbers::pi * p.hbar / split / 400.0 : 1.0;
  }

  const Complex I(0.0, 1.0);
  Eigen::VectorXcd psi = phi_l.cast<Complex>();
  std::vector<double> out;
  double t_now = 0.0;
  double cached_dt = -1.0;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
  Eigen::MatrixXcd minus;
  for (double t : t_grid) {
    if (t < t_now) throw ParameterError("evolve_nonlocal: time grid must be sorted, t >= 0");
    const double span_t = t - t_now;
    if (span_t > 0.0) {
      const auto n_steps = static_cast<long>(std::ceil(span_t / step));
      const double dt = span_t / static_cast<double>(n_steps);
      if (std::abs(dt - cached_dt) > 1e-12 * dt) {
        const Eigen::MatrixXcd a = h.cast<Complex>() * (I * 0.5 * dt / p.hbar);
        lu.compute(Eigen::MatrixXcd::Identity(m, m) + a);
        minus = Eigen::MatrixXcd::Identity(m, m) - a;
        cached_dt = dt;
      }
      for (long s = 0; s < n_steps; ++s) psi = lu.solve(minus * psi);
      t_now = t;
    }
    out.push_back(std::norm(hw * phi_r.cast<Complex>().dot(psi)));
  }
  return out;
}

}  // namespace t3k
