#pragma once

// Subcommand dispatch. Each command computes all of its artifacts in memory
// first, then writes them atomically; an error leaves no files behind.
//
// Exit status: 0 success, 1 physics-domain error (resonance, pole,
// classification, convergence), 2 configuration error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "t3k/cli/config.hpp"
#include "t3k/cli/output.hpp"
#include "t3k/cli/sweep.hpp"
#include "t3k/dynamics.hpp"
#include "t3k/feasibility.hpp"
#include "t3k/hamiltonian.hpp"
#include "t3k/kernel.hpp"
#include "t3k/modes.hpp"
#include "t3k/selfenergy.hpp"

namespace t3k::cli {

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"modes",   "couplings", "spectrum", "evolve",
                                              "delta-e", "kernel",    "sweep",    "feasibility"};
  return names;
}

struct CommandResult {
  std::vector<Artifact> artifacts;
  std::string summary;
};

namespace detail {

inline const ModelConfig& need_model(const RunConfig& c) {
  if (!c.model) throw ConfigError("model", "this subcommand needs a model block");
  return *c.model;
}

inline std::string file_name(const RunConfig& c, const std::string& base) {
  return c.output.stem.empty() ? base : c.output.stem + "_" + base;
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  return v;
}

inline CommandResult cmd_modes(const RunConfig& c) {
  const ModelParams p = need_model(c).params();
  CsvWriter csv(provenance_header(c));
  csv.header({"species", "j", "omega", "support_lo", "support_hi"});
  auto emit = [&](Species s, int j) {
    const auto [lo, hi] = mode_support(p.geometry, s);
    csv.row({to_string(s), std::to_string(j), csv_number(mode_frequency(p, {s, j})),
             csv_number(lo), csv_number(hi)});
  };
  emit(Species::a_left, 1);
  emit(Species::a_right, 1);
  for (int j = 1; j <= c.truncation.truncation.j_max; ++j) emit(Species::b, j);
  const std::string name = file_name(c, "modes.csv");
  return {{{name, csv.text()}},
          fmt::format("modes: {} rows, omega_a = {:.15g} -> {}", csv.data_rows(),
                      p.omega_a(), name)};
}

inline CommandResult cmd_couplings(const RunConfig& c) {
  const ModelParams p = need_model(c).params();
  CsvWriter csv(provenance_header(c));
  csv.header({"j", "g_left", "g_right", "g_left_quadrature", "rel_diff"});
  double worst = 0.0;
  const double scale = coupling_reference_scale(p);
  for (int j = 1; j <= c.truncation.truncation.j_max; ++j) {
    const double gl = coupling_overlap(p, Side::left, j);
    const double gr = coupling_overlap(p, Side::right, j);
    const double gq = coupling_overlap_quadrature(p, Side::left, j);
    const double den = std::max(std::abs(gq), scale);
    const double rel = den > 0.0 ? std::abs(gl - gq) / den : 0.0;
    worst = std::max(worst, rel);
    csv.row({std::to_string(j), csv_number(gl), csv_number(gr), csv_number(gq), csv_number(rel)});
  }
  const std::string name = file_name(c, "couplings.csv");
  return {{{name, csv.text()}},
          fmt::format("couplings: {} modes, max rel_diff = {:.3g} -> {}", csv.data_rows(), worst,
                      name)};
}

inline CommandResult cmd_spectrum(const RunConfig& c) {
  const ModelParams p = need_model(c).params();
  const auto h = build_hamiltonian(p, c.truncation.truncation, c.truncation.rwa);
  const std::string head = provenance_header(c);

  CsvWriter matrix(head);
  matrix.header({"row", "col", "value"});
  for (Eigen::Index r = 0; r < h.dimension(); ++r)
    for (Eigen::Index k = 0; k < h.dimension(); ++k)
      if (h.matrix(r, k) != 0.0)
        matrix.row({std::to_string(r), std::to_string(k), csv_number(h.matrix(r, k))});

  CsvWriter basis(head);
  basis.header({"index", "label"});
  for (std::size_t i = 0; i < h.basis.size(); ++i)
    basis.row({std::to_string(i), h.basis[i].label()});

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.matrix, Eigen::EigenvaluesOnly);
  CsvWriter eig(head);
  eig.header({"index", "eigenvalue"});
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    eig.row({std::to_string(i), csv_number(es.eigenvalues()(i))});

  std::string split;
  try {
    split = fmt::format("delta_E = {:.15g}", splitting_from_spectrum(h).delta_e);
  } catch (const PhysicsError& e) {
    split = std::string("splitting unavailable: ") + e.what();
  }
  const std::string n1 = file_name(c, "spectrum_matrix.csv");
  const std::string n2 = file_name(c, "spectrum_basis.csv");
  const std::string n3 = file_name(c, "spectrum_eigenvalues.csv");
  return {{{n1, matrix.text()}, {n2, basis.text()}, {n3, eig.text()}},
          fmt::format("spectrum: dimension {}, {} -> {}, {}, {}", h.dimension(), split, n1, n2,
                      n3)};
}

inline CommandResult cmd_evolve(const RunConfig& c) {
  const ModelParams p = need_model(c).params();
  const auto h = build_hamiltonian(p, c.truncation.truncation, c.truncation.rwa);
  BasisState initial;
  try {
    initial = BasisState::parse(c.evolve.initial);
    (void)h.basis.index_of(initial);
  } catch (const ParameterError& e) {
    throw ConfigError("evolve.initial", e.what());
  }
  const auto t = linspace(0.0, c.evolve.t_stop, c.evolve.samples);
  const auto ts = evolve(h, initial, t, p.hbar);
  CsvWriter csv(provenance_header(c));
  csv.header({"t", "p_t3k", "p_left", "p_excited", "norm"});
  double pmax = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    csv.row(std::vector<double>{ts.t[i], ts.p_t3k[i], ts.p_left[i], ts.p_excited[i], ts.norm[i]});
    pmax = std::max(pmax, ts.p_t3k[i]);
  }
  const std::string name = file_name(c, "evolve.csv");
  return {{{name, csv.text()}},
          fmt::format("evolve: {} samples, max p_t3k = {:.6g} -> {}", ts.size(), pmax, name)};
}

inline CommandResult cmd_delta_e(const RunConfig& c) {
  const ModelConfig& m = need_model(c);
  std::vector<double> ds = c.delta_e.d_values;
  if (ds.empty()) ds.push_back(m.d);
  CsvWriter csv(provenance_header(c));
  csv.header({"d", "delta_e_series", "delta_e_closed", "rel_diff", "j_used"});
  double worst = 0.0;
  for (double d : ds) {
    ModelConfig md = m;
    md.d = d;
    const ModelParams p = md.params();
    const auto series = pt2_series(p, c.delta_e.series_tol);
    const auto closed = delta_e_closed(p);
    const double rel = closed.delta_e != 0.0
                           ? std::abs(series.delta_e - closed.delta_e) / std::abs(closed.delta_e)
                           : std::abs(series.delta_e);
    worst = std::max(worst, rel);
    csv.row({csv_number(d), csv_number(series.delta_e), csv_number(closed.delta_e),
             csv_number(rel), std::to_string(series.j_used)});
  }
  const std::string name = file_name(c, "delta_e.csv");
  return {{{name, csv.text()}},
          fmt::format("delta-e: {} rows, max rel_diff = {:.3g} -> {}", csv.data_rows(), worst,
                      name)};
}

inline CommandResult cmd_kernel(const RunConfig& c) {
  const ModelParams p = need_model(c).params();
  const auto k = build_kernel(p, c.kernel.grid_points, c.kernel.j_max);
  const std::string head = provenance_header(c);

  CsvWriter heat(head);
  heat.header({"x", "x_prime", "pi_value"});
  const auto n = k.grid.size();
  const auto stride = static_cast<std::size_t>(c.kernel.export_stride);
  auto keep = [&](std::size_t i) { return i % stride == 0 || i + 1 == n; };
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep(i)) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (keep(j))
        heat.row(std::vector<double>{k.grid.x[i], k.grid.x[j],
                                     k.pi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
  }

  CsvWriter proj(head);
  proj.header({"pair", "value", "error_estimate"});
  const DoubletMode modes[] = {DoubletMode::S, DoubletMode::A, DoubletMode::L, DoubletMode::R};
  double pi_ss = 0.0, pi_aa = 0.0;
  for (auto a : modes)
    for (auto b : modes) {
      const auto pr = project_kernel(k, a, b);
      if (a == DoubletMode::S && b == DoubletMode::S) pi_ss = pr.value;
      if (a == DoubletMode::A && b == DoubletMode::A) pi_aa = pr.value;
      proj.row({std::string(to_string(a)) + to_string(b), csv_number(pr.value),
                csv_number(pr.error_estimate)});
    }

  const double de = pi_aa - pi_ss;
  double t_stop = 0.0;
  if (c.kernel.t_stop) {
    t_stop = *c.kernel.t_stop;
  } else {
    if (de == 0.0) throw ConfigError("kernel.t_stop", "auto needs a nonzero splitting");
    t_stop = std::numbers::pi * p.hbar / std::abs(de);
  }
  const auto t = linspace(0.0, t_stop, c.kernel.samples);
  const auto series = two_mode_evolve(p.hbar * p.omega_a(), pi_ss, pi_aa, t, p.hbar);
  CsvWriter two(head);
  two.header({"t", "p", "c_l_re", "c_l_im", "c_r_re", "c_r_im"});
  for (std::size_t i = 0; i < series.t.size(); ++i)
    two.row(std::vector<double>{series.t[i], series.p[i], series.c_l[i].real(),
                                series.c_l[i].imag(), series.c_r[i].real(), series.c_r[i].imag()});

  const std::string n1 = file_name(c, "kernel.csv");
  const std::string n2 = file_name(c, "kernel_projections.csv");
  const std::string n3 = file_name(c, "two_mode.csv");
  return {{{n1, heat.text()}, {n2, proj.text()}, {n3, two.text()}},
          fmt::format("kernel: Pi_SS = {:.15g}, Pi_AA = {:.15g}, delta_E = {:.15g} -> {}, {}, {}",
                      pi_ss, pi_aa, de, n1, n2, n3)};
}

inline CommandResult cmd_sweep(const RunConfig& c) {
  const ModelConfig& m = need_model(c);
  if (!c.sweep) throw ConfigError("sweep", "this subcommand needs a sweep block");
  const auto res = run_sweep(m, c.truncation, *c.sweep, c.delta_e.series_tol);
  CsvWriter csv(provenance_header(c));
  csv.header({res.axis, res.observable, "j_used", "converged", "status"});
  std::size_t flagged = 0;
  for (const auto& pt : res.points) {
    if (pt.status != "ok") ++flagged;
    csv.row({csv_number(pt.axis_value), csv_optional(pt.value), std::to_string(pt.j_used),
             pt.converged ? "true" : "false", pt.status});
  }
  const std::string name = file_name(c, "sweep.csv");
  return {{{name, csv.text()}},
          fmt::format("sweep: {} over {}, {} points, {} flagged -> {}", res.observable, res.axis,
                      res.points.size(), flagged, name)};
}

inline CommandResult cmd_feasibility(const RunConfig& c) {
  if (!c.experiment) throw ConfigError("experiment", "this subcommand needs an experiment block");
  const auto& e = *c.experiment;
  const auto params = experiment_params(e);
  const auto report = feasibility::feasibility_report(params);
  nlohmann::ordered_json doc;
  doc["version"] = kToolVersion;
  doc["config"] = echo_config(c);
  doc["report"] = feasibility::to_json(report);
  CommandResult out;
  const std::string name = file_name(c, "feasibility.json");
  out.artifacts.push_back({name, doc.dump(2) + "\n"});
  std::string extra;
  if (e.scan) {
    const auto& s = *e.scan;
    const auto dim = scan_dimension(s.param);
    const double xi = xi_length(params.atom_mass, params.delta_abs(), feasibility::kHbar);
    const double a = to_si(s.start, dim, "experiment.scan.start", xi);
    const double b = to_si(s.stop, dim, "experiment.scan.stop", xi);
    CsvWriter csv(provenance_header(c));
    csv.header({"param", "value", "delta_e_over_hbar", "xi_m", "eps_over_hbar", "d_max_m",
                "feasible"});
    for (double v : linspace(a, b, s.count)) {
      auto q = params;
      if (s.param == "d") q.d = v;
      else if (s.param == "ell") q.ell = v;
      else if (s.param == "rabi_coupling") q.rabi_coupling_hz = v;
      else if (s.param == "transition") q.transition_hz = v;
      else q.cavity_decay_hz = v;
      const auto r = feasibility::feasibility_report(q);
      csv.row({s.param, csv_number(v), csv_optional(r.delta_e_over_hbar), csv_number(r.xi_m),
               csv_number(r.epsilon_over_hbar), csv_number(r.d_max_m),
               r.feasible ? "true" : "false"});
    }
    const std::string scan_name = file_name(c, "feasibility_scan.csv");
    out.artifacts.push_back({scan_name, csv.text()});
    extra = ", " + scan_name;
  }
  out.summary = fmt::format("feasibility: xi = {:.4g} m, epsilon/hbar = {:.4g} rad/s, d_max = {:.4g} m, "
                            "feasible = {} -> {}{}",
                            report.xi_m, report.epsilon_over_hbar, report.d_max_m,
                            report.feasible ? "true" : "false", name, extra);
  return out;
}

}  // namespace detail

/// Computes the artifacts of a subcommand without touching the filesystem.
inline CommandResult run_command(const std::string& sub, const RunConfig& c) {
  if (sub == "modes") return detail::cmd_modes(c);
  if (sub == "couplings") return detail::cmd_couplings(c);
  if (sub == "spectrum") return detail::cmd_spectrum(c);
  if (sub == "evolve") return detail::cmd_evolve(c);
  if (sub == "delta-e") return detail::cmd_delta_e(c);
  if (sub == "kernel") return detail::cmd_kernel(c);
  if (sub == "sweep") return detail::cmd_sweep(c);
  if (sub == "feasibility") return detail::cmd_feasibility(c);
  throw ConfigError("<subcommand>", "unknown subcommand '" + sub + "'");
}

/// Output directory: explicit override, then $T3K_OUTPUT_DIR, then output.dir.
inline std::filesystem::path output_dir(const RunConfig& c,
                                        const std::optional<std::string>& override_dir) {
  if (override_dir && !override_dir->empty()) return *override_dir;
  if (const char* env = std::getenv("T3K_OUTPUT_DIR"); env && *env) return env;
  return c.output.dir;
}

inline int dispatch(const std::string& sub, const RunConfig& c, std::ostream& out,
                    std::ostream& err, const std::optional<std::string>& override_dir = {}) {
  try {
    const auto result = run_command(sub, c);
    const auto dir = output_dir(c, override_dir);
    for (const auto& a : result.artifacts) write_atomic(dir / a.name, a.content);
    out << result.summary << "\n";
    return 0;
  } catch (const ParameterError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const PhysicsError& e) {
    err << "physics error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

/// Reads and parses a config file, then dispatches.
inline int run_file(const std::string& sub, const std::string& config_path, std::ostream& out,
                    std::ostream& err, const std::optional<std::string>& override_dir = {}) {
  std::ifstream is(config_path, std::ios::binary);
  if (!is) {
    err << "config error: cannot read " << config_path << "\n";
    return 2;
  }
  std::stringstream ss;
  ss << is.rdbuf();
  RunConfig cfg;
  try {
    cfg = parse_config(ss.str());
  } catch (const ParameterError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  return dispatch(sub, cfg, out, err, override_dir);
}

}  // namespace t3k::cli
