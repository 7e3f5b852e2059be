#pragma once

// Truncated single-atom basis {|a,sigma,n>, |b,j,n>} and the model Hamiltonian
//
//   H = sum_sigma hbar w_a a+_s a_s + sum_j hbar w_j^(b) b+_j b_j + hbar w_c c+ c
//       + sum_{sigma,j} hbar g_{sigma j} (c + c+)(a+_s b_j + b+_j a_s)
//
// with full bosonic ladder factors for the cavity photon.

#include <cmath>
#include <compare>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "t3k/errors.hpp"
#include "t3k/modes.hpp"

namespace t3k {

enum class Internal { a, b };
enum class PhotonParity { even, odd };

struct BasisState {
  Internal internal = Internal::a;
  Side side = Side::left;  // meaningful for internal == a
  int j = 0;               // meaningful for internal == b, 0 otherwise
  int photons = 0;

  static BasisState a(Side s, int n) { return {Internal::a, s, 0, n}; }
  static BasisState b(int j, int n) { return {Internal::b, Side::left, j, n}; }

  bool is_a() const { return internal == Internal::a; }
  bool is_b() const { return internal == Internal::b; }

  auto key() const {
    return std::make_tuple(static_cast<int>(internal), is_a() ? static_cast<int>(side) : 0, j,
                           photons);
  }
  bool operator==(const BasisState& o) const { return key() == o.key(); }
  bool operator<(const BasisState& o) const { return key() < o.key(); }

  /// "a,L,0" or "b,3,1".
  std::string label() const {
    std::ostringstream os;
    if (is_a())
      os << "a," << (side == Side::left ? 'L' : 'R') << ',' << photons;
    else
      os << "b," << j << ',' << photons;
    return os.str();
  }

  static BasisState parse(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    auto bad = [&] { return ParameterError("cannot parse basis state '" + text + "'"); };
    if (parts.size() != 3) throw bad();
    int n = 0;
    try {
      n = std::stoi(parts[2]);
    } catch (...) {
      throw bad();
    }
    if (n < 0) throw bad();
    if (parts[0] == "a") {
      if (parts[1] == "L") return a(Side::left, n);
      if (parts[1] == "R") return a(Side::right, n);
      throw bad();
    }
    if (parts[0] == "b") {
      int j = 0;
      try {
        j = std::stoi(parts[1]);
      } catch (...) {
        throw bad();
      }
      if (j < 1) throw bad();
      return b(j, n);
    }
    throw bad();
  }
};

inline PhotonParity photon_parity(const BasisState& s) {
  return ((s.photons + (s.is_b() ? 1 : 0)) % 2 == 0) ? PhotonParity::even : PhotonParity::odd;
}

struct Truncation {
  int j_max = 64;
  int n_max = 3;
  bool parity_reduced = false;

  void validate() const {
    if (j_max < 1) throw ParameterError("truncation: j_max must be >= 1");
    if (n_max < 0) throw ParameterError("truncation: n_max must be >= 0");
  }
  bool operator==(const Truncation&) const = default;
};

/// Ordered basis with reverse lookup. Ordering: a-states by (sigma, n) with
/// L before R, then b-states by (j, n).
class Basis {
 public:
  Basis() = default;
  explicit Basis(std::vector<BasisState> states) : states_(std::move(states)) {
    for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], i);
  }

  std::size_t size() const { return states_.size(); }
  const BasisState& operator[](std::size_t i) const { return states_[i]; }
  const std::vector<BasisState>& states() const { return states_; }
  auto begin() const { return states_.begin(); }
  auto end() const { return states_.end(); }

  std::optional<std::size_t> find(const BasisState& s) const {
    const auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t index_of(const BasisState& s) const {
    if (auto i = find(s)) return *i;
    throw ParameterError("state " + s.label() + " is not in the basis");
  }

 private:
  std::vector<BasisState> states_;
  std::map<BasisState, std::size_t> index_;
};

inline Basis enumerate_basis(const Truncation& t) {
  t.validate();
  std::vector<BasisState> out;
  auto keep = [&](const BasisState& s) {
    return !t.parity_reduced || photon_parity(s) == PhotonParity::even;
  };
  for (Side side : {Side::left, Side::right})
    for (int n = 0; n <= t.n_max; ++n)
      if (auto s = BasisState::a(side, n); keep(s)) out.push_back(s);
  for (int j = 1; j <= t.j_max; ++j)
    for (int n = 0; n <= t.n_max; ++n)
      if (auto s = BasisState::b(j, n); keep(s)) out.push_back(s);
  return Basis(std::move(out));
}

/// Dense real symmetric operator on a labelled basis.
struct HermitianMatrix {
  Eigen::MatrixXd matrix;
  Basis basis;

  Eigen::Index dimension() const { return matrix.rows(); }
  double max_asymmetry() const { return (matrix - matrix.transpose()).cwiseAbs().maxCoeff(); }
};

/// Image of a basis state under the L<->R reflection and the sign it picks up
/// (+1 for a-states, (-1)^(j+1) for box modes).
inline std::pair<BasisState, double> mirror(const BasisState& s) {
  if (s.is_a())
    return {BasisState::a(s.side == Side::left ? Side::right : Side::left, s.photons), 1.0};
  return {s, reflection_sign(s.j)};
}

inline HermitianMatrix build_hamiltonian(const ModelParams& params, const Truncation& truncation,
                                         bool rwa = false) {
  params.validate();
  Basis basis = enumerate_basis(truncation);
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);

  const double hb = params.hbar;
  const double wa = mode_frequency(params, {Species::a_left, 1});
  std::vector<double> wb(truncation.j_max + 1, 0.0);
  std::vector<double> gl(truncation.j_max + 1, 0.0), gr(truncation.j_max + 1, 0.0);
  for (int j = 1; j <= truncation.j_max; ++j) {
    wb[j] = mode_frequency(params, {Species::b, j});
    gl[j] = coupling_overlap(params, Side::left, j);
    gr[j] = coupling_overlap(params, Side::right, j);
  }

  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& s = basis[i];
    const double w = s.is_a() ? wa : wb[s.j];
    h(i, i) = hb * (w + s.photons * params.omega_c);
  }

  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& s = basis[i];
    if (!s.is_a()) continue;
    const int n = s.photons;
    for (int j = 1; j <= truncation.j_max; ++j) {
      const double g = (s.side == Side::left) ? gl[j] : gr[j];
      // Co-rotating: |a,s,n> <-> |b,j,n-1>, photon absorbed on excitation.
      if (n >= 1) {
        if (auto k = basis.find(BasisState::b(j, n - 1))) {
          const double v = hb * g * std::sqrt(static_cast<double>(n));
          h(i, *k) = v;
          h(*k, i) = v;
        }
      }
      // Counter-rotating: |a,s,n> <-> |b,j,n+1>.
      if (!rwa && n + 1 <= truncation.n_max) {
        if (auto k = basis.find(BasisState::b(j, n + 1))) {
          const double v = hb * g * std::sqrt(static_cast<double>(n + 1));
          h(i, *k) = v;
          h(*k, i) = v;
        }
      }
    }
  }

#ifndef NDEBUG
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c)
      if (h(r, c) != 0.0 && photon_parity(basis[r]) != photon_parity(basis[c]))
        throw PhysicsError("Hamiltonian element leaves its photon-parity sector");
#endif
  return HermitianMatrix{std::move(h), std::move(basis)};
}

}  // namespace t3k
