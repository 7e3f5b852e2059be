#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "t3k/dynamics.hpp"
#include "t3k/selfenergy.hpp"

namespace {

using namespace t3k;

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

TEST(Dynamics, ZeroCouplingNeverTunnels) {
  const auto p = ModelParams::from_detuning({1.0, 1.0}, 1.0, 4.0, 0.0);
  const auto h = build_hamiltonian(p, {6, 2, false});
  const auto ts = evolve(h, BasisState::a(Side::left, 0), linspace(0.0, 500.0, 101));
  for (double v : ts.p_t3k) EXPECT_EQ(v, 0.0);
  for (double v : ts.p_left) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(Dynamics, NormAndParityConservedForRandomSmallCouplings) {
  std::mt19937_64 rng(20241014);
  std::uniform_real_distribution<double> u(0.5, 2.0), g(0.0, 0.05), dl(2.0, 6.0);
  for (int trial = 0; trial < 4; ++trial) {
    const auto p = ModelParams::from_detuning({u(rng), u(rng)}, u(rng), dl(rng), g(rng));
    const auto h = build_hamiltonian(p, {6, 3, false});
    const Propagator prop(h);
    const auto t = linspace(0.0, 200.0, 1000);
    const auto ts = evolve(prop, BasisState::a(Side::left, 0), t);
    Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(h.dimension());
    psi0(h.basis.index_of(BasisState::a(Side::left, 0))) = 1.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      EXPECT_NEAR(ts.norm[k], 1.0, 1e-12);
      if (k % 100 == 0) {
        const auto psi = prop.apply(psi0, t[k]);
        double odd = 0.0;
        for (std::size_t i = 0; i < h.basis.size(); ++i)
          if (photon_parity(h.basis[i]) == PhotonParity::odd) odd += std::norm(psi(i));
        EXPECT_LT(odd, 1e-24);
      }
    }
  }
}

TEST(Dynamics, BackwardPropagationInverts) {
  const auto p = ModelParams::from_detuning({1.0, 1.0}, 1.0, 4.0, 0.4);
  const auto h = build_hamiltonian(p, {8, 3, true});
  const Propagator prop(h);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(h.dimension());
  psi(0) = 1.0;
  const auto back = prop.apply(prop.apply(psi, 37.5), -37.5);
  EXPECT_LT((back - psi).norm(), 1e-12);
}

TEST(Dynamics, AmplitudeAgreesWithFullPropagation) {
  const auto p = ModelParams::from_detuning({1.0, 1.0}, 1.0, 4.0, 0.4);
  const auto h = build_hamiltonian(p, {8, 3, true});
  const Propagator prop(h);
  const auto t = linspace(0.0, 100.0, 11);
  const auto ts = evolve(prop, BasisState::a(Side::left, 0), t);
  const auto amp = prop.amplitude(h.basis.index_of(BasisState::a(Side::left, 0)),
                                  h.basis.index_of(BasisState::a(Side::right, 0)), t);
  for (std::size_t k = 0; k < t.size(); ++k) EXPECT_NEAR(std::norm(amp[k]), ts.p_t3k[k], 1e-14);
}

TEST(Dynamics, ThreeLevelExactSplitting) {
  // 2x2 symmetric sector: shift of the symmetric state is (delta - sqrt(delta^2 + 8 g^2)) / 2.
  const auto p = ModelParams::from_detuning({1.0, 1.0}, 1.0, 4.0, 0.1);
  const auto h = build_hamiltonian(p, {1, 1, true});
  const double g = coupling_overlap(p, Side::left, 1);
  const double delta = mode_frequency(p, {Species::b, 1}) + p.omega_c - p.omega_a();
  const double expected = 0.5 * (std::sqrt(delta * delta + 8.0 * g * g) - delta);
  const auto s = splitting_from_spectrum(h);
  EXPECT_NEAR(s.delta_e, expected, 1e-15);
  EXPECT_NEAR(s.delta_e, 2.0 * g * g / delta, 2.0 * std::pow(g, 4) / std::pow(delta, 3) * 4.1);
  EXPECT_GT(s.overlap_symmetric, 0.99);
  EXPECT_DOUBLE_EQ(s.overlap_antisymmetric, 1.0);
}

TEST(Dynamics, ThreeLevelFormulaLowestOrderError) {
  // The closed three-level formula is lowest order; over a slow period its
  // deviation from exact evolution is set by the O(g^4/delta^3) frequency shift,
  // ~6.2 (g/delta)^2 at g/delta = 1e-2.
  const double ratio = 1e-2;
  auto p = ModelParams::from_detuning({1.0, 1.0}, 1.0, 4.0, 1.0);
  const double delta = mode_frequency(p, {Species::b, 1}) + p.omega_c - p.omega_a();
  p.g0 = ratio * delta / detail::left_overlap_unit(p.geometry, 1);
  const auto h = build_hamiltonian(p, {1, 1, true});
  const double g = coupling_overlap(p, Side::left, 1);
  ASSERT_NEAR(g / delta, ratio, 1e-14);
  const double period = std::numbers::pi * delta / (g * g);
  const auto t = envelope_grid(period, delta, 40);
  const auto ts = evolve(h, BasisState::a(Side::left, 0), t);
  double worst = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k)
    worst = std::max(worst, std::abs(ts.p_t3k[k] - p_t3k_three_level(g, delta, t[k])));
  EXPECT_LT(worst, 10.0 * ratio * ratio);
  EXPECT_GT(worst, 5.0 * ratio * ratio * ratio);  // lowest order only, by construction
  EXPECT_THROW(p_t3k_three_level(g, 0.0, 1.0), ResonanceError);
}

TEST(Dynamics, SplittingMatchesSeriesAtSmallCoupling) {
  for (double g0 : {1e-3, 1e-2}) {
    const auto p = ModelParams::from_detuning({1.0, 1.0}, 1.0, 4.0, g0);
    const auto spec = splitting_from_spectrum(build_hamiltonian(p, {128, 3, true}));
    const auto series = pt2_truncated(p, 128);
    const double rel = std::abs(spec.delta_e - series.delta_e) / series.delta_e;
    EXPECT_LT(rel, std::max(1e-6, std::pow(g0 / 4.0, 2))) << g0;
  }
}

TEST(Dynamics, ParityReductionDoesNotChangeTheSplitting) {
  const auto p = ModelParams::from_detuning({1.0, 1.0}, 1.0, 4.0, 0.3);
  const auto full = splitting_from_spectrum(build_hamiltonian(p, {16, 3, false}));
  const auto half = splitting_from_spectrum(build_hamiltonian(p, {16, 3, true}));
  EXPECT_NEAR(full.delta_e, half.delta_e, 1e-14);
}

TEST(Dynamics, ClassificationFailsWhenStronglyMixed) {
  const auto p = ModelParams::from_detuning({1.0, 1.0}, 1.0, 0.05, 2.0);
  EXPECT_THROW(splitting_from_spectrum(build_hamiltonian(p, {4, 1, true})), ClassificationError);
}

TEST(Dynamics, EnvelopeFollowsTunnellingLaw) {
  // Full model, g0/Delta = 0.05: running maxima of p_t3k trace sin^2(dE t / 2).
  const double g0 = 0.2, Delta = 4.0;
  const auto p = ModelParams::from_detuning({1.0, 1.0}, 1.0, Delta, g0);
  const auto h = build_hamiltonian(p, {16, 3, true});
  const auto split = splitting_from_spectrum(h);
  const double delta1 = mode_frequency(p, {Species::b, 1}) + p.omega_c - p.omega_a();
  const auto t = envelope_grid(std::numbers::pi / split.delta_e, delta1, 40);
  const Propagator prop(h);
  const auto amp = prop.amplitude(h.basis.index_of(BasisState::a(Side::left, 0)),
                                  h.basis.index_of(BasisState::a(Side::right, 0)), t);
  std::vector<double> pr(amp.size());
  for (std::size_t k = 0; k < amp.size(); ++k) pr[k] = std::norm(amp[k]);
  const auto peaks = local_maxima(t, pr);
  ASSERT_GT(peaks.size(), 100u);
  EXPECT_LT(envelope_residual(peaks, split.delta_e), std::pow(g0 / Delta, 2));
}

TEST(Dynamics, LocalMaximaRefinesParabola) {
  std::vector<double> t, p;
  for (int i = 0; i <= 20; ++i) {
    t.push_back(0.1 * i);
    p.push_back(1.0 - std::pow(0.1 * i - 1.03, 2));
  }
  const auto peaks = local_maxima(t, p);
  ASSERT_EQ(peaks.size(), 1u);
  EXPECT_NEAR(peaks[0].t, 1.03, 1e-12);
  EXPECT_NEAR(peaks[0].value, 1.0, 1e-12);
}

TEST(Dynamics, RejectsUnsortedGrid) {
  const auto p = ModelParams::from_detuning({1.0, 1.0}, 1.0, 4.0, 0.1);
  const auto h = build_hamiltonian(p, {2, 1, true});
  const std::vector<double> bad{0.0, 2.0, 1.0};
  EXPECT_THROW(evolve(h, BasisState::a(Side::left, 0), bad), ParameterError);
  EXPECT_THROW(evolve(h, BasisState::a(Side::left, 1), std::vector<double>{0.0}), ParameterError);
}

}  // namespace
