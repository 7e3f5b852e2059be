// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "t3k/cli/dispatch.hpp"
#include "t3k/dynamics.hpp"
#include "t3k/feasibility.hpp"
#include "t3k/kernel.hpp"
#include "t3k/selfenergy.hpp"

namespace {

using namespace t3k;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "!") + what;
  }
};

ModelParams unit(double g0, double Delta = 4.0, double ell = 1.0, double d = 1.0) {
  return ModelParams::from_detuning({ell, d}, 1.0, Delta, g0);
}

double delta1(const ModelParams& p) {
  return mode_frequency(p, {Species::b, 1}) + p.omega_c - p.omega_a();
}

Outcome overlap_oracle() {
  Outcome o;
  double worst = 0.0;
  for (double ell : {0.5, 1.0, 2.0})
    for (double d : {0.5, 1.0, 2.0}) {
      const auto p = unit(1.0, 4.0, ell, d);
      const double scale = coupling_reference_scale(p);
      for (int j = 1; j <= 50; ++j)
        for (Side s : {Side::left, Side::right}) {
          const double c = coupling_overlap(p, s, j);
          const double q = coupling_overlap_quadrature(p, s, j);
          worst = std::max(worst, std::abs(c - q) / std::max(std::abs(q), scale));
        }
    }
  o.check(worst < 1e-10, fmt::format("max rel err {:.2e} < 1e-10", worst));
  const double g3 = coupling_overlap(unit(1.0), Side::left, 3);
  const double want = std::sqrt(1.0 / 3.0);
  o.check(std::abs(g3 - want) / want < 1e-10,
          fmt::format("degenerate j=3 branch {:.15f} vs sqrt(1/3)", g3));
  return o;
}

Outcome three_level() {
  Outcome o;
  const double ratio = 1e-2;
  auto p = unit(1.0);
  const double delta = delta1(p);
  p.g0 = ratio * delta / detail::left_overlap_unit(p.geometry, 1);
  const auto h = build_hamiltonian(p, {1, 1, true});
  const double g = coupling_overlap(p, Side::left, 1);
  const std::size_t idx[3] = {h.basis.index_of(BasisState::a(Side::left, 0)),
                              h.basis.index_of(BasisState::b(1, 1)),
                              h.basis.index_of(BasisState::a(Side::right, 0))};
  const double wa = p.omega_a(), wb = mode_frequency(p, {Species::b, 1}) + p.omega_c;
  const double m[3][3] = {{wa, g, 0.0}, {g, wb, g}, {0.0, g, wa}};
  double entry = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) entry = std::max(entry, std::abs(h.matrix(idx[r], idx[c]) - m[r][c]));
  o.check(h.dimension() == 3 && entry == 0.0, fmt::format("matrix entrywise diff {:.1e}", entry));

  const double period = std::numbers::pi * delta / (g * g);
  const auto t = envelope_grid(period, delta, 40);
  const auto ts = evolve(h, BasisState::a(Side::left, 0), t);
  double worst = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k)
    worst = std::max(worst, std::abs(ts.p_t3k[k] - p_t3k_three_level(g, delta, t[k])));
  const double tol = 5.0 * std::pow(ratio, 3);
  o.check(worst < tol, fmt::format("pointwise |dP| {:.3e} < 5(g/delta)^3 = {:.1e}", worst, tol));
  return o;
}

Outcome pt2_triangle() {
  Outcome o;
  const double ref = pt2_series(unit(1.0), 1e-17).delta_e;
  o.check(std::abs(ref - 0.00256551686380231604) < 1e-15,
          fmt::format("reference dE(g0=1) = {:.15e}", ref));
  for (double g0 : {1e-3, 1e-2}) {
    const auto p = unit(g0);
    const double series = pt2_series(p, 1e-12 * g0 * g0).delta_e;  // tol is absolute
    const double closed = delta_e_closed(p).delta_e;
    const double spec = splitting_from_spectrum(build_hamiltonian(p, {128, 3, true})).delta_e;
    const double tol = std::max(1e-6, std::pow(g0 / 4.0, 2));
    auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
    const double worst = std::max({rel(series, closed), rel(spec, series), rel(spec, closed)});
    o.check(worst < tol, fmt::format("g0={:g}: worst pairwise {:.2e} < {:.1e}", g0, worst, tol));
  }
  return o;
}

Outcome exponential_law() {
  Outcome o;
  const double xi = 1.0 / std::sqrt(8.0);
  const double ell = 8.0 * xi;
  std::vector<double> d, y;
  for (int i = 0; i <= 20; ++i) {
    d.push_back(xi * (1.0 + 5.0 * i / 20.0));
    y.push_back(std::log(pt2_series(unit(1.0, 4.0, ell, d.back()), 1e-22).delta_e));
  }
  const auto fit = cli::polyfit(d, y, 1);
  const double slope = fit[1] * xi;
  o.check(std::abs(slope + 1.0) < 0.01, fmt::format("slope {:.5f}/xi", slope));
  const double eps = scale_params(unit(1.0, 4.0, ell, 1.0)).epsilon;
  const double pref = std::exp(fit[0]) / eps;
  o.check(std::abs(pref - 1.0) < 0.1, fmt::format("prefactor {:.3f} eps, within 10%", pref));
  return o;
}

Outcome negative_branch() {
  Outcome o;
  std::vector<double> v;
  int poles = 0;
  for (int i = 0; i <= 300; ++i) {
    try {
      v.push_back(delta_e_closed(unit(1.0, -4.0, 1.0, 0.01 * (i + 1))).delta_e);
    } catch (const PoleError&) {
      ++poles;
    }
  }
  int turns = 0;
  for (std::size_t i = 2; i < v.size(); ++i)
    if ((v[i] - v[i - 1]) * (v[i - 1] - v[i - 2]) < 0) ++turns;
  double late = 0.0;
  for (std::size_t i = v.size() / 2; i < v.size(); ++i) late = std::max(late, std::abs(v[i]));
  o.check(turns >= 2, fmt::format("{} turning points", turns));
  o.check(late > 0.1 * std::abs(v.front()), fmt::format("late |dE| {:.3g} vs first {:.3g}", late,
                                                         std::abs(v.front())));

  // Pole detection around k pi for k = 2, 3, 4.
  const double xi = 1.0 / std::sqrt(8.0);
  bool exact = true;
  for (int k = 2; k <= 4; ++k) {
    const double d_pole = k * std::numbers::pi * xi - 2.0;
    if (d_pole <= 0.0) continue;
    for (double off : {0.0, 0.5e-6, -0.9e-6, 1.1e-6, -1.5e-6, 1e-3}) {
      bool fired = false;
      try {
        (void)delta_e_closed(unit(1.0, -4.0, 1.0, d_pole + off * xi));
      } catch (const PoleError&) {
        fired = true;
      }
      if (fired != (std::abs(off) < 1e-6)) exact = false;
    }
  }
  o.check(exact, "pole fires iff |u - k pi| < 1e-6");
  return o;
}

Outcome kernel_cross() {
  Outcome o;
  const int j_max = 64;
  const auto p = unit(1.0);
  const auto k = build_kernel(p, 801, j_max);
  const auto ref = pt2_truncated(p, j_max);
  const double ss = project_kernel(k, DoubletMode::S, DoubletMode::S).value;
  const double aa = project_kernel(k, DoubletMode::A, DoubletMode::A).value;
  const double sa = project_kernel(k, DoubletMode::S, DoubletMode::A).value;
  const double rel = std::max(std::abs(ss / ref.pi_ss - 1.0), std::abs(aa / ref.pi_aa - 1.0));
  o.check(rel < 1e-6, fmt::format("Pi_SS, Pi_AA rel {:.2e} < 1e-6", rel));
  o.check(std::abs(sa) < 1e-10 * std::abs(ss), fmt::format("|Pi_SA|/|Pi_SS| {:.1e}", std::abs(sa / ss)));

  for (double g0 : {0.2, 0.4}) {
    const auto q = unit(g0);
    const auto h = build_hamiltonian(q, {16, 3, true});
    const auto kq = build_kernel(q, 801, 16);
    const double qss = project_kernel(kq, DoubletMode::S, DoubletMode::S).value;
    const double qaa = project_kernel(kq, DoubletMode::A, DoubletMode::A).value;
    const auto t = envelope_grid(std::numbers::pi / (qaa - qss), delta1(q), 40);
    const Propagator prop(h);
    const auto amp = prop.amplitude(h.basis.index_of(BasisState::a(Side::left, 0)),
                                    h.basis.index_of(BasisState::a(Side::right, 0)), t);
    std::vector<double> pr(amp.size());
    for (std::size_t i = 0; i < amp.size(); ++i) pr[i] = std::norm(amp[i]);
    const auto peaks = local_maxima(t, pr);
    std::vector<double> tp;
    for (const auto& pk : peaks) tp.push_back(pk.t);
    const auto two = two_mode_evolve(q.omega_a(), qss, qaa, tp);
    double worst = 0.0;
    for (std::size_t i = 0; i < peaks.size(); ++i)
      worst = std::max(worst, std::abs(peaks[i].value - two.p[i]));
    const double tol = std::pow(g0 / 4.0, 2);
    o.check(worst < tol && peaks.size() > 100,
            fmt::format("g0={:g}: envelope {:.2e} < (g0/Delta)^2 = {:.2e}", g0, worst, tol));
  }
  return o;
}

Outcome conservation() {
  Outcome o;
  std::mt19937_64 rng(20241014);
  std::uniform_real_distribution<double> u(0.5, 2.0), g(0.0, 0.05), dl(2.0, 6.0);
  double norm_err = 0.0, odd = 0.0;
  for (int trial = 0; trial < 8; ++trial) {
    const auto p = ModelParams::from_detuning({u(rng), u(rng)}, u(rng), dl(rng), g(rng));
    const auto h = build_hamiltonian(p, {8, 3, false});
    const Propagator prop(h);
    Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(h.dimension());
    psi0(h.basis.index_of(BasisState::a(Side::left, 0))) = 1.0;
    for (int k = 0; k < 1000; ++k) {
      const auto psi = prop.apply(psi0, 0.5 * k);
      norm_err = std::max(norm_err, std::abs(psi.squaredNorm() - 1.0));
      double w = 0.0;
      for (std::size_t i = 0; i < h.basis.size(); ++i)
        if (photon_parity(h.basis[i]) == PhotonParity::odd) w += std::norm(psi(i));
      odd = std::max(odd, w);
    }
  }
  o.check(norm_err < 1e-12, fmt::format("norm drift {:.1e}", norm_err));
  o.check(odd < 1e-12, fmt::format("odd-parity weight {:.1e}", odd));

  const double ss = -0.134765625, aa = -0.1318359375;  // few-bit dyadics: shifts are exact
  std::vector<double> t;
  for (int i = 0; i < 1000; ++i) t.push_back(3.25 * i);
  const auto a = two_mode_evolve(1.0, ss, aa, t);
  bool bitwise = true;
  for (double c : {0.5, -0.25, 1024.0}) {
    const auto b = two_mode_evolve(1.0, ss + c, aa + c, t);
    for (std::size_t i = 0; i < t.size(); ++i) bitwise = bitwise && a.p[i] == b.p[i];
  }
  o.check(bitwise, "P(t) bitwise invariant under common shift");
  return o;
}

Outcome feasibility_check() {
  using namespace t3k::feasibility;
  Outcome o;
  ExperimentParams p;
  p.ell = p.d = 1.0;
  p.ell = p.d = characteristic_scales(p).xi_m;
  const auto r = feasibility_report(p);
  o.check(r.xi_m >= 24e-12 && r.xi_m <= 40e-12, fmt::format("xi = {:.2f} pm", r.xi_m * 1e12));
  o.check(r.epsilon_over_hbar >= 4.8 && r.epsilon_over_hbar <= 7.3,
          fmt::format("eps/hbar = {:.3f} rad/s", r.epsilon_over_hbar));
  o.check(!r.feasible && r.d_max_m <= 0.0,
          fmt::format("infeasible, d_max = {:.2e} m", r.d_max_m));
  return o;
}

Outcome determinism() {
  namespace fs = std::filesystem;
  Outcome o;
  const fs::path src = T3K_SOURCE_DIR;
  const std::vector<std::pair<std::string, std::vector<std::string>>> runs = {
      {"three_level", {"modes", "couplings", "spectrum", "evolve"}},
      {"natural_units", {"delta-e", "spectrum"}},
      {"full_evolve", {"evolve"}},
      {"kernel", {"kernel"}},
      {"sweep_d", {"sweep"}},
      {"sweep_negative", {"sweep"}},
      {"feasibility", {"feasibility"}},
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  int files = 0, mismatched = 0;
  for (const auto& [name, subs] : runs) {
    const auto cfg = cli::parse_config(slurp(src / "tests" / "fixtures" / (name + ".yaml")));
    const auto tmp = fs::temp_directory_path() / ("t3k_acceptance_" + name);
    for (const auto& sub : subs)
      for (int rep = 0; rep < 2; ++rep) {
        fs::remove_all(tmp);
        std::ostringstream out, err;
        if (cli::dispatch(sub, cfg, out, err, tmp.string()) != 0) {
          ++mismatched;
          continue;
        }
        for (const auto& e : fs::directory_iterator(tmp)) {
          const auto golden = src / "tests" / "golden" / name / e.path().filename();
          ++files;
          if (!fs::exists(golden) || slurp(golden) != slurp(e.path())) ++mismatched;
        }
      }
    fs::remove_all(tmp);
  }
  o.check(files > 0 && mismatched == 0,
          fmt::format("{} artifacts over 2 runs, {} differ from golden", files, mismatched));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"overlap oracle", overlap_oracle},
      {"three-level reproduction", three_level},
      {"PT2 triangle", pt2_triangle},
      {"exponential law", exponential_law},
      {"negative-detuning branch", negative_branch},
      {"kernel cross-formalism", kernel_cross},
      {"conservation suite", conservation},
      {"feasibility reproduction", feasibility_check},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failed;
    fmt::print("{} {}. {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
