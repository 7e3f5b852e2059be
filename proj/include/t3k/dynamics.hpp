#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "t3k/errors.hpp"
#include "t3k/hamiltonian.hpp"

namespace t3k {

using Complex = std::complex<double>;

struct TimeSeries {
  std::vector<double> t;
  std::vector<double> p_t3k;      ///< |<a,R,0|psi(t)>|^2
  std::vector<double> p_left;     ///< population of all |a,L,n>
  std::vector<double> p_excited;  ///< population of all |b,j,n>
  std::vector<double> norm;

  std::size_t size() const { return t.size(); }
};

/// exp(-i H t / hbar) through one dense eigendecomposition. Eigenvalues are
/// shifted by a reference energy before exponentiation; this only changes a
/// global phase but keeps the arguments small for long times.
class Propagator {
 public:
  explicit Propagator(const HermitianMatrix& h, double hbar = 1.0,
                      std::optional<double> reference_energy = std::nullopt)
      : basis_(h.basis), hbar_(hbar) {
    if (h.matrix.rows() != h.matrix.cols() || h.matrix.rows() == 0)
      throw ParameterError("propagator needs a non-empty square matrix");
    const double scale = std::max(1.0, h.matrix.cwiseAbs().maxCoeff());
    if (h.max_asymmetry() > 1e-14 * scale)
      throw PhysicsError("propagator input is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.matrix);
    if (es.info() != Eigen::Success) throw PhysicsError("eigendecomposition failed");
    vectors_ = es.eigenvectors();
    values_ = es.eigenvalues();
    reference_ = reference_energy.value_or(h.matrix.diagonal().minCoeff());
  }

  const Eigen::VectorXd& eigenvalues() const { return values_; }
  const Eigen::MatrixXd& eigenvectors() const { return vectors_; }
  const Basis& basis() const { return basis_; }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& psi, double t) const {
    const Eigen::VectorXcd coeff = vectors_.transpose().cast<Complex>() * psi;
    return vectors_.cast<Complex>() * (phases(t).cwiseProduct(coeff));
  }

  /// <to| exp(-iHt/hbar) |from> for each t.
  std::vector<Complex> amplitude(std::size_t from, std::size_t to,
                                 std::span<const double> times) const {
    const Eigen::VectorXd w = vectors_.row(to).transpose().cwiseProduct(
        vectors_.row(from).transpose());
    std::vector<Complex> out;
    out.reserve(times.size());
    for (double t : times) {
      Complex acc = 0.0;
      for (Eigen::Index k = 0; k < values_.size(); ++k)
        acc += w(k) * std::polar(1.0, -(values_(k) - reference_) * t / hbar_);
      out.push_back(acc);
    }
    return out;
  }

 private:
  Eigen::VectorXcd phases(double t) const {
    Eigen::VectorXcd ph(values_.size());
    for (Eigen::Index k = 0; k < values_.size(); ++k)
      ph(k) = std::polar(1.0, -(values_(k) - reference_) * t / hbar_);
    return ph;
  }

  Basis basis_;
  double hbar_;
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd values_;
  double reference_ = 0.0;
};

inline TimeSeries evolve(const Propagator& prop, const BasisState& initial,
                         std::span<const double> t_grid) {
  const Basis& basis = prop.basis();
  const std::size_t i0 = basis.index_of(initial);
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (k == 0 && t_grid[0] < 0.0) throw ParameterError("time grid must start at t >= 0");
    if (k > 0 && !(t_grid[k] >= t_grid[k - 1])) throw ParameterError("time grid must be sorted");
  }
  const auto target = basis.find(BasisState::a(Side::right, 0));

  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  psi0(static_cast<Eigen::Index>(i0)) = 1.0;

  TimeSeries ts;
  ts.t.assign(t_grid.begin(), t_grid.end());
  for (double t : t_grid) {
    const Eigen::VectorXcd psi = prop.apply(psi0, t);
    double left = 0.0, excited = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const double pop = std::norm(psi(static_cast<Eigen::Index>(i)));
      norm += pop;
      if (basis[i].is_b())
        excited += pop;
      else if (basis[i].side == Side::left)
        left += pop;
    }
    ts.p_t3k.push_back(target ? std::norm(psi(static_cast<Eigen::Index>(*target))) : 0.0);
    ts.p_left.push_back(left);
    ts.p_excited.push_back(excited);
    ts.norm.push_back(norm);
  }
  return ts;
}

inline TimeSeries evolve(const HermitianMatrix& h, const BasisState& initial,
                         std::span<const double> t_grid, double hbar = 1.0) {
  return evolve(Propagator(h, hbar), initial, t_grid);
}

/// Lowest-order three-level tunnelling probability
///   |sin(g^2 t/delta) + 2 (g/delta)^2 exp(-i delta t/2) sin(delta t/2)|^2.
/// Valid for |g| << |delta|.
inline double p_t3k_three_level(double g_tilde, double delta, double t) {
  if (delta == 0.0 || !std::isfinite(delta))
    throw ResonanceError("three-level formula needs a nonzero detuning");
  const double r = g_tilde / delta;
  const Complex slow = std::sin(g_tilde * r * t);
  const Complex fast = 2.0 * r * r * std::polar(1.0, -0.5 * delta * t) * std::sin(0.5 * delta * t);
  return std::norm(slow + fast);
}

struct SpectralSplitting {
  double delta_e = 0.0;          ///< E_antisymmetric - E_symmetric
  double e_symmetric = 0.0;
  double e_antisymmetric = 0.0;
  double overlap_symmetric = 0.0;      ///< weight on span{|a,L,0>, |a,R,0>}
  double overlap_antisymmetric = 0.0;
};

namespace detail {

// One column of the orthogonal change to the reflection-adapted basis, with at
// most two nonzero entries.
struct AdaptedColumn {
  std::size_t i1;
  double c1;
  std::size_t i2;
  double c2;
};

struct ReflectionBlocks {
  std::vector<AdaptedColumn> even, odd;
  std::size_t even_anchor = 0;  // column of (|a,L,0> + |a,R,0>)/sqrt2
  std::size_t odd_anchor = 0;   // column of (|a,L,0> - |a,R,0>)/sqrt2
};

inline ReflectionBlocks reflection_blocks(const Basis& basis) {
  ReflectionBlocks rb;
  const double r = 1.0 / std::sqrt(2.0);
  const auto l0 = basis.find(BasisState::a(Side::left, 0));
  const auto r0 = basis.find(BasisState::a(Side::right, 0));
  if (!l0 || !r0) throw ParameterError("splitting needs both |a,L,0> and |a,R,0> in the basis");
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& s = basis[i];
    if (s.is_a()) {
      if (s.side != Side::left) continue;
      const auto partner = basis.find(mirror(s).first);
      if (!partner) throw ParameterError("basis is not closed under L<->R reflection");
      if (i == *l0) {
        rb.even_anchor = rb.even.size();
        rb.odd_anchor = rb.odd.size();
      }
      rb.even.push_back({i, r, *partner, r});
      rb.odd.push_back({i, r, *partner, -r});
    } else {
      (reflection_sign(s.j) > 0 ? rb.even : rb.odd).push_back({i, 1.0, i, 0.0});
    }
  }
  return rb;
}

inline Eigen::MatrixXd project(const Eigen::MatrixXd& h, const std::vector<AdaptedColumn>& a,
                               const std::vector<AdaptedColumn>& b) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t p = 0; p < a.size(); ++p)
    for (std::size_t q = 0; q < b.size(); ++q) {
      const auto& u = a[p];
      const auto& v = b[q];
      double acc = u.c1 * v.c1 * h(u.i1, v.i1);
      if (v.c2 != 0.0) acc += u.c1 * v.c2 * h(u.i1, v.i2);
      if (u.c2 != 0.0) {
        acc += u.c2 * v.c1 * h(u.i2, v.i1);
        if (v.c2 != 0.0) acc += u.c2 * v.c2 * h(u.i2, v.i2);
      }
      out(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = acc;
    }
  return out;
}

struct BlockLevel {
  double energy;
  double overlap;
};

// Finds the eigenvalue of `block` whose eigenvector has the largest weight on
// the anchor column and polishes it with the exact Schur-complement equation
//   s = h^T (s - K)^{-1} h,  K = H_QQ - H_pp,  E = H_pp + s,
// which resolves the level shift relative to H_pp rather than to ||H||.
inline BlockLevel anchored_level(const Eigen::MatrixXd& block, std::size_t anchor,
                                 double threshold) {
  const auto n = block.rows();
  const auto p = static_cast<Eigen::Index>(anchor);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
  if (es.info() != Eigen::Success) throw PhysicsError("eigendecomposition failed");
  Eigen::Index best = 0;
  double overlap = -1.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double w = es.eigenvectors()(p, k) * es.eigenvectors()(p, k);
    if (w > overlap) {
      overlap = w;
      best = k;
    }
  }
  if (overlap <= threshold)
    throw ClassificationError("no eigenstate has weight > " + std::to_string(threshold) +
                              " on the unperturbed a-doublet (max " + std::to_string(overlap) +
                              "); near-resonant mixing");
  const double hpp = block(p, p);
  if (n == 1) return {hpp, overlap};

  std::vector<Eigen::Index> q;
  for (Eigen::Index k = 0; k < n; ++k)
    if (k != p) q.push_back(k);
  const auto m = static_cast<Eigen::Index>(q.size());
  Eigen::MatrixXd kqq(m, m);
  Eigen::VectorXd hq(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    hq(r) = block(q[r], p);
    for (Eigen::Index c = 0; c < m; ++c) kqq(r, c) = block(q[r], q[c]);
    kqq(r, r) -= hpp;
  }
  if (hq.cwiseAbs().maxCoeff() == 0.0) return {hpp, overlap};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eq(kqq);
  if (eq.info() != Eigen::Success) throw PhysicsError("eigendecomposition failed");
  const Eigen::VectorXd proj = eq.eigenvectors().transpose() * hq;
  const Eigen::VectorXd& kappa = eq.eigenvalues();

  double s = es.eigenvalues()(best) - hpp;
  for (int it = 0; it < 200; ++it) {
    double next = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) next += proj(k) * proj(k) / (s - kappa(k));
    const double change = std::abs(next - s);
    s = next;
    if (!std::isfinite(s)) break;
    if (change <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(s)) return {hpp + s, overlap};
  }
  if (!std::isfinite(s)) throw ConvergenceError("level-shift iteration hit a resonance");
  return {hpp + s, overlap};
}

}  // namespace detail

inline SpectralSplitting splitting_from_spectrum(const HermitianMatrix& h,
                                                 double overlap_threshold = 0.9) {
  const auto rb = detail::reflection_blocks(h.basis);
  const double scale = std::max(1.0, h.matrix.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd cross = detail::project(h.matrix, rb.even, rb.odd);
  if (cross.size() > 0 && cross.cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ClassificationError("Hamiltonian is not symmetric under L<->R reflection");

  const auto sym = detail::anchored_level(detail::project(h.matrix, rb.even, rb.even),
                                          rb.even_anchor, overlap_threshold);
  const auto anti = detail::anchored_level(detail::project(h.matrix, rb.odd, rb.odd),
                                           rb.odd_anchor, overlap_threshold);
  SpectralSplitting out;
  out.e_symmetric = sym.energy;
  out.e_antisymmetric = anti.energy;
  out.overlap_symmetric = sym.overlap;
  out.overlap_antisymmetric = anti.overlap;
  out.delta_e = anti.energy - sym.energy;
  return out;
}

struct Peak {
  double t;
  double value;
};

/// Interior local maxima of a sampled signal, refined by a parabola through
/// the three bracketing samples.
inline std::vector<Peak> local_maxima(std::span<const double> t, std::span<const double> p) {
  if (t.size() != p.size()) throw ParameterError("local_maxima: size mismatch");
  std::vector<Peak> peaks;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    if (!(p[i] >= p[i - 1] && p[i] > p[i + 1])) continue;
    const double y0 = p[i - 1], y1 = p[i], y2 = p[i + 1];
    const double den = y0 - 2.0 * y1 + y2;
    const double off = den != 0.0 ? 0.5 * (y0 - y2) / den : 0.0;
    const double dt = 0.5 * (t[i + 1] - t[i - 1]);
    peaks.push_back({t[i] + off * dt, y1 - 0.25 * (y0 - y2) * off});
  }
  return peaks;
}

/// max over peaks of |peak - sin^2(delta_e t / 2 hbar)|.
inline double envelope_residual(std::span<const Peak> peaks, double delta_e, double hbar = 1.0) {
  double worst = 0.0;
  for (const auto& pk : peaks) {
    const double s = std::sin(0.5 * delta_e * pk.t / hbar);
    worst = std::max(worst, std::abs(pk.value - s * s));
  }
  return worst;
}

/// Uniform grid [0, t_stop] with at least `per_period` samples per 2 pi / omega_fast.
inline std::vector<double> envelope_grid(double t_stop, double omega_fast, int per_period = 40) {
  if (!(t_stop > 0.0) || !(omega_fast > 0.0) || per_period < 3)
    throw ParameterError("envelope_grid: invalid arguments");
  const double dt = 2.0 * std::acos(-1.0) / omega_fast / per_period;
  const auto n = static_cast<std::size_t>(std::ceil(t_stop / dt)) + 1;
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = static_cast<double>(k) * dt;
  return t;
}

}  // namespace t3k
