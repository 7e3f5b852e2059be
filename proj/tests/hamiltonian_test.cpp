#include <cmath>
#include <map>
#include <string>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "t3k/hamiltonian.hpp"

namespace {

using namespace t3k;

// Tensor-product construction (atom mode) x (photon number), independent of the
// library basis enumeration. Returns matrix elements keyed by state labels.
std::map<std::pair<std::string, std::string>, double> brute_force(const ModelParams& p,
                                                                  int j_max, int n_max, bool rwa) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double ell = p.geometry.ell, lb = p.geometry.box_width();
  std::vector<std::string> atom = {"a,L", "a,R"};
  std::vector<double> omega = {p.Omega_a + pi2 / (2 * p.mass * ell * ell),
                               p.Omega_a + pi2 / (2 * p.mass * ell * ell)};
  for (int j = 1; j <= j_max; ++j) {
    atom.push_back("b," + std::to_string(j));
    omega.push_back(p.Omega_b + pi2 * j * j / (2 * p.mass * lb * lb));
  }
  const auto na = atom.size();
  const int nf = n_max + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(na * nf, na * nf);
  auto idx = [&](std::size_t m, int n) { return m * nf + n; };
  for (std::size_t m = 0; m < na; ++m)
    for (int n = 0; n < nf; ++n) h(idx(m, n), idx(m, n)) = omega[m] + n * p.omega_c;
  for (int s = 0; s < 2; ++s)
    for (int j = 1; j <= j_max; ++j) {
      const double gl = p.g0 * oracle::left_overlap(ell, p.geometry.d, j);
      const double g = s == 0 ? gl : (j % 2 ? gl : -gl);
      const std::size_t a = s, b = 1 + j;
      for (int n = 0; n < nf; ++n) {
        // c: |n> -> sqrt(n)|n-1>, paired with b+ a (co-rotating)
        if (n >= 1) {
          h(idx(b, n - 1), idx(a, n)) += g * std::sqrt(n);
          h(idx(a, n), idx(b, n - 1)) += g * std::sqrt(n);
        }
        // c+: |n> -> sqrt(n+1)|n+1>, paired with b+ a (counter-rotating)
        if (!rwa && n + 1 < nf) {
          h(idx(b, n + 1), idx(a, n)) += g * std::sqrt(n + 1);
          h(idx(a, n), idx(b, n + 1)) += g * std::sqrt(n + 1);
        }
      }
    }
  std::map<std::pair<std::string, std::string>, double> out;
  for (std::size_t m = 0; m < na; ++m)
    for (int n = 0; n < nf; ++n)
      for (std::size_t k = 0; k < na; ++k)
        for (int q = 0; q < nf; ++q) {
          const double v = h(idx(m, n), idx(k, q));
          if (v != 0.0)
            out[{atom[m] + "," + std::to_string(n), atom[k] + "," + std::to_string(q)}] = v;
        }
  return out;
}

void expect_matches_brute_force(const ModelParams& p, const Truncation& t, bool rwa) {
  const auto h = build_hamiltonian(p, t, rwa);
  const auto ref = brute_force(p, t.j_max, t.n_max, rwa);
  const double scale = h.matrix.cwiseAbs().maxCoeff();
  std::size_t nonzero = 0;
  for (std::size_t r = 0; r < h.basis.size(); ++r)
    for (std::size_t c = 0; c < h.basis.size(); ++c) {
      const auto key = std::make_pair(h.basis[r].label(), h.basis[c].label());
      const auto it = ref.find(key);
      const double expected = it == ref.end() ? 0.0 : it->second;
      EXPECT_NEAR(h.matrix(r, c), expected, 1e-12 * scale) << key.first << " | " << key.second;
      if (h.matrix(r, c) != 0.0) ++nonzero;
    }
  if (!t.parity_reduced) {
    EXPECT_EQ(nonzero, ref.size());
  }
}

TEST(Hamiltonian, MatchesTensorProductConstruction) {
  const auto p = ModelParams::from_detuning({1.0, 0.7}, 1.3, 3.0, 0.2, 1.1, 0.4);
  expect_matches_brute_force(p, {5, 3, false}, false);
  expect_matches_brute_force(p, {5, 3, false}, true);
  expect_matches_brute_force(p, {4, 2, true}, false);
}

TEST(Hamiltonian, ThreeLevelPresetIsTheBareMatrix) {
  const auto p = ModelParams::from_detuning({1.0, 1.0}, 1.0, 4.0, 0.1);
  const auto h = build_hamiltonian(p, {1, 1, true});
  ASSERT_EQ(h.dimension(), 3);
  const double wa = p.omega_a();
  const double wb = mode_frequency(p, {Species::b, 1});
  const double g = coupling_overlap(p, Side::left, 1);
  // Order (a,L,0), (b,1,1), (a,R,0).
  const std::size_t L = h.basis.index_of(BasisState::a(Side::left, 0));
  const std::size_t B = h.basis.index_of(BasisState::b(1, 1));
  const std::size_t R = h.basis.index_of(BasisState::a(Side::right, 0));
  const std::size_t order[3] = {L, B, R};
  const double expected[3][3] = {{wa, g, 0.0}, {g, wb + p.omega_c, g}, {0.0, g, wa}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      EXPECT_DOUBLE_EQ(h.matrix(order[r], order[c]), expected[r][c]) << r << "," << c;
}

TEST(Hamiltonian, ParityReductionDimension) {
  const Truncation full{6, 3, false};
  const Truncation half{6, 3, true};
  EXPECT_EQ(enumerate_basis(full).size(), 2u * 4 + 6u * 4);
  EXPECT_EQ(enumerate_basis(half).size(), 2u * 2 + 6u * 2);
  for (const auto& s : enumerate_basis(half)) EXPECT_EQ(photon_parity(s), PhotonParity::even);
}

TEST(Hamiltonian, RealSymmetricAndParityBlockDiagonal) {
  const auto p = ModelParams::from_detuning({1.0, 1.0}, 1.0, 4.0, 0.3);
  const auto h = build_hamiltonian(p, {8, 3, false});
  EXPECT_EQ(h.max_asymmetry(), 0.0);
  for (Eigen::Index r = 0; r < h.dimension(); ++r)
    for (Eigen::Index c = 0; c < h.dimension(); ++c)
      if (photon_parity(h.basis[r]) != photon_parity(h.basis[c])) {
        EXPECT_EQ(h.matrix(r, c), 0.0);
      }
}

TEST(Hamiltonian, RwaDropsCounterRotatingCoupling) {
  const auto p = ModelParams::from_detuning({1.0, 1.0}, 1.0, 4.0, 0.3);
  const auto h = build_hamiltonian(p, {3, 2, false}, true);
  const auto a0 = h.basis.index_of(BasisState::a(Side::left, 0));
  for (int j = 1; j <= 3; ++j) EXPECT_EQ(h.matrix(a0, h.basis.index_of(BasisState::b(j, 1))), 0.0);
  const auto a1 = h.basis.index_of(BasisState::a(Side::left, 1));
  EXPECT_NE(h.matrix(a1, h.basis.index_of(BasisState::b(1, 0))), 0.0);
}

TEST(Hamiltonian, ZeroCouplingIsDiagonal) {
  const auto p = ModelParams::from_detuning({1.0, 1.0}, 1.0, 4.0, 0.0);
  const auto h = build_hamiltonian(p, {6, 3, false});
  const Eigen::MatrixXd off = h.matrix - Eigen::MatrixXd(h.matrix.diagonal().asDiagonal());
  EXPECT_EQ(off.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Hamiltonian, MirrorMapsBasisOntoItself) {
  const auto basis = enumerate_basis({5, 2, false});
  for (const auto& s : basis) {
    const auto [m, sign] = mirror(s);
    EXPECT_TRUE(basis.find(m).has_value());
    EXPECT_EQ(std::abs(sign), 1.0);
  }
}

TEST(Hamiltonian, LabelsRoundTrip) {
  for (const auto& s : enumerate_basis({4, 2, false})) EXPECT_EQ(BasisState::parse(s.label()), s);
  EXPECT_THROW(BasisState::parse("a,X,0"), ParameterError);
  EXPECT_THROW(BasisState::parse("b,0,1"), ParameterError);
  EXPECT_THROW(BasisState::parse("b,1"), ParameterError);
  EXPECT_THROW(BasisState::parse("a,L,-1"), ParameterError);
  EXPECT_THROW(enumerate_basis({0, 1, false}), ParameterError);
}

}  // namespace
