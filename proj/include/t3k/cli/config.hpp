#pragma once

// Run configuration: one YAML document, every physical quantity written as
// "<number> <unit>". Model quantities use the unit "natural"; the experiment
// block uses SI-style tags. Unknown keys are rejected with their full path.
//
// The materialized configuration (all defaults filled in) is echoed into every
// artifact header; echo_config(parse_config(text)) reparses to an equal value.

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "t3k/errors.hpp"
#include "t3k/feasibility.hpp"
#include "t3k/hamiltonian.hpp"
#include "t3k/modes.hpp"

namespace t3k::cli {

inline constexpr const char* kToolVersion = "t3k 1.0.0";

class ConfigError : public ParameterError {
 public:
  ConfigError(const std::string& path, const std::string& msg)
      : ParameterError(path + ": " + msg), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Shortest decimal text that reads back to the same double.
inline std::string exact(double v) { return fmt::format("{:.17g}", v); }

struct Quantity {
  double value = 0.0;
  std::string unit;
  bool operator==(const Quantity&) const = default;
  std::string text() const { return exact(value) + " " + unit; }
};

struct ModelConfig {
  double ell = 1.0;
  double d = 1.0;
  double mass = 1.0;
  double Delta = 4.0;
  double g0 = 0.0;
  std::optional<double> omega_c;  ///< empty: |Delta| / 2
  double Omega_a = 0.0;
  double hbar = 1.0;
  CavityProfile cavity_profile = ConstantProfile{};

  ModelParams params() const {
    ModelParams p =
        ModelParams::from_detuning({ell, d}, mass, Delta, g0, omega_c, Omega_a, hbar);
    p.cavity_profile = cavity_profile;
    p.validate();
    return p;
  }
  bool operator==(const ModelConfig&) const = default;
};

struct TruncationConfig {
  Truncation truncation;
  bool rwa = false;
  bool operator==(const TruncationConfig&) const = default;
};

struct EvolveConfig {
  std::string initial = "a,L,0";
  double t_stop = 100.0;
  int samples = 1001;
  bool operator==(const EvolveConfig&) const = default;
};

struct DeltaEConfig {
  std::vector<double> d_values;  ///< empty: the model's d
  double series_tol = 1e-12;
  bool operator==(const DeltaEConfig&) const = default;
};

struct KernelConfig {
  int grid_points = 801;
  int j_max = 64;
  int export_stride = 8;
  std::optional<double> t_stop;  ///< empty: half a tunnelling period
  int samples = 201;
  bool operator==(const KernelConfig&) const = default;
};

struct SweepConfig {
  std::string axis = "d";  ///< d, ell, Delta, g0
  double start = 0.0;
  double stop = 0.0;
  int count = 1;
  std::string observable = "delta_e_series";  ///< delta_e_series, delta_e_closed, splitting_spectrum
  bool operator==(const SweepConfig&) const = default;

  std::vector<double> values() const {
    std::vector<double> v;
    for (int i = 0; i < count; ++i)
      v.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
    return v;
  }
};

struct ScanConfig {
  std::string param = "d";  ///< d, ell, rabi_coupling, transition, cavity_decay
  Quantity start;
  Quantity stop;
  int count = 1;
  bool operator==(const ScanConfig&) const = default;
};

struct ExperimentConfig {
  Quantity atom_mass{86.909180531, "u"};
  Quantity rabi_coupling{50.0, "kHz"};
  Quantity transition{51.1, "GHz"};
  Quantity cavity_decay{7.7, "Hz"};
  Quantity ell{1.0, "xi"};
  Quantity d{1.0, "xi"};
  feasibility::DeltaSign delta_sign = feasibility::DeltaSign::positive;
  std::optional<ScanConfig> scan;
  bool operator==(const ExperimentConfig&) const = default;
};

struct OutputConfig {
  std::string dir = ".";
  std::string stem;  ///< file-name prefix, may be empty
  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  std::optional<ModelConfig> model;
  TruncationConfig truncation;
  EvolveConfig evolve;
  DeltaEConfig delta_e;
  KernelConfig kernel;
  std::optional<SweepConfig> sweep;
  std::optional<ExperimentConfig> experiment;
  OutputConfig output;
  bool operator==(const RunConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Unit conversion.

enum class Dimension { mass, frequency, length };

inline double to_si(const Quantity& q, Dimension dim, const std::string& path,
                    double xi_m = std::nan("")) {
  const auto bad = [&] {
    return ConfigError(path, "unit '" + q.unit + "' is not valid for this quantity");
  };
  switch (dim) {
    case Dimension::mass:
      if (q.unit == "kg") return q.value;
      if (q.unit == "u") return q.value * feasibility::kAtomicMassUnit;
      throw bad();
    case Dimension::frequency:  // to ordinary Hz
      if (q.unit == "Hz") return q.value;
      if (q.unit == "kHz") return q.value * 1e3;
      if (q.unit == "MHz") return q.value * 1e6;
      if (q.unit == "GHz") return q.value * 1e9;
      if (q.unit == "rad/s") return q.value / (2.0 * std::numbers::pi);
      throw bad();
    case Dimension::length:
      if (q.unit == "m") return q.value;
      if (q.unit == "um") return q.value * 1e-6;
      if (q.unit == "nm") return q.value * 1e-9;
      if (q.unit == "pm") return q.value * 1e-12;
      if (q.unit == "xi") return q.value * xi_m;
      throw bad();
  }
  throw bad();
}

inline Dimension scan_dimension(const std::string& param) {
  if (param == "d" || param == "ell") return Dimension::length;
  return Dimension::frequency;
}

/// SI experiment parameters; lengths tagged "xi" resolve against the xi of
/// the configured mass and transition.
inline feasibility::ExperimentParams experiment_params(const ExperimentConfig& e) {
  feasibility::ExperimentParams p;
  p.atom_mass = to_si(e.atom_mass, Dimension::mass, "experiment.atom_mass");
  p.rabi_coupling_hz = to_si(e.rabi_coupling, Dimension::frequency, "experiment.rabi_coupling");
  p.transition_hz = to_si(e.transition, Dimension::frequency, "experiment.transition");
  p.cavity_decay_hz = to_si(e.cavity_decay, Dimension::frequency, "experiment.cavity_decay");
  p.delta_sign = e.delta_sign;
  const double xi = xi_length(p.atom_mass, p.delta_abs(), feasibility::kHbar);
  p.ell = to_si(e.ell, Dimension::length, "experiment.ell", xi);
  p.d = to_si(e.d, Dimension::length, "experiment.d", xi);
  return p;
}

// ---------------------------------------------------------------------------
// Parsing.

namespace detail {

inline std::string join(const std::string& a, const std::string& b) {
  return a.empty() ? b : a + "." + b;
}

inline void check_keys(const YAML::Node& node, const std::string& path,
                       const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(path.empty() ? "<root>" : path, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(join(path, key), "unknown key");
  }
}

inline std::string scalar(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) throw ConfigError(path, "expected a scalar");
  return n.Scalar();
}

inline double parse_number(const std::string& s, const std::string& path) {
  if (s.empty()) throw ConfigError(path, "expected a number");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
    throw ConfigError(path, "'" + s + "' is not a finite number");
  return v;
}

inline Quantity parse_quantity(const YAML::Node& n, const std::string& path) {
  const std::string text = scalar(n, path);
  std::istringstream is(text);
  std::string num, unit, extra;
  is >> num >> unit >> extra;
  if (num.empty()) throw ConfigError(path, "expected '<number> <unit>'");
  if (unit.empty()) throw ConfigError(path, "missing unit tag in '" + text + "'");
  if (!extra.empty()) throw ConfigError(path, "trailing text in '" + text + "'");
  return {parse_number(num, path), unit};
}

inline double natural(const YAML::Node& n, const std::string& path) {
  const auto q = parse_quantity(n, path);
  if (q.unit != "natural")
    throw ConfigError(path, "unit '" + q.unit + "' is not valid here (expected 'natural')");
  return q.value;
}

inline std::vector<double> natural_list(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) throw ConfigError(path, "expected a list");
  std::vector<double> out;
  for (std::size_t i = 0; i < n.size(); ++i)
    out.push_back(natural(n[i], fmt::format("{}[{}]", path, i)));
  return out;
}

inline int integer(const YAML::Node& n, const std::string& path) {
  const std::string s = scalar(n, path);
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || v < INT32_MIN ||
      v > INT32_MAX)
    throw ConfigError(path, "'" + s + "' is not an integer");
  return static_cast<int>(v);
}

inline bool boolean(const YAML::Node& n, const std::string& path) {
  const std::string s = scalar(n, path);
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError(path, "expected true or false");
}

inline std::string choice(const YAML::Node& n, const std::string& path,
                          const std::set<std::string>& allowed) {
  const std::string s = scalar(n, path);
  if (!allowed.count(s)) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    throw ConfigError(path, "'" + s + "' is not one of {" + list + "}");
  }
  return s;
}

inline void require_positive(double v, const std::string& path) {
  if (!(v > 0.0)) throw ConfigError(path, "must be > 0");
}

inline void require_min(int v, int lo, const std::string& path) {
  if (v < lo) throw ConfigError(path, fmt::format("must be >= {}", lo));
}

inline ModelConfig parse_model(const YAML::Node& n) {
  const std::string P = "model";
  check_keys(n, P, {"ell", "d", "mass", "Delta", "g0", "omega_c", "Omega_a", "hbar",
                    "cavity_profile"});
  ModelConfig m;
  for (const char* key : {"ell", "d", "mass", "Delta", "g0"})
    if (!n[key]) throw ConfigError(join(P, key), "required key missing");
  m.ell = natural(n["ell"], "model.ell");
  m.d = natural(n["d"], "model.d");
  m.mass = natural(n["mass"], "model.mass");
  m.Delta = natural(n["Delta"], "model.Delta");
  m.g0 = natural(n["g0"], "model.g0");
  require_positive(m.ell, "model.ell");
  require_positive(m.d, "model.d");
  require_positive(m.mass, "model.mass");
  if (m.Delta == 0.0) throw ConfigError("model.Delta", "must be nonzero (Delta = 0 is resonant)");
  if (m.g0 < 0.0) throw ConfigError("model.g0", "must be >= 0");
  if (n["omega_c"] && scalar(n["omega_c"], "model.omega_c") != "auto") {
    m.omega_c = natural(n["omega_c"], "model.omega_c");
    require_positive(*m.omega_c, "model.omega_c");
  }
  if (n["Omega_a"]) m.Omega_a = natural(n["Omega_a"], "model.Omega_a");
  if (n["hbar"]) {
    m.hbar = natural(n["hbar"], "model.hbar");
    require_positive(m.hbar, "model.hbar");
  }
  if (const auto c = n["cavity_profile"]) {
    const std::string cp = "model.cavity_profile";
    if (!c.IsMap()) throw ConfigError(cp, "expected a mapping with 'constant' or 'x'/'values'");
    check_keys(c, cp, {"constant", "x", "values"});
    if (c["constant"]) {
      if (c["x"] || c["values"]) throw ConfigError(cp, "'constant' excludes 'x'/'values'");
      m.cavity_profile = ConstantProfile{natural(c["constant"], cp + ".constant")};
    } else {
      if (!c["x"] || !c["values"]) throw ConfigError(cp, "sampled profile needs 'x' and 'values'");
      SampledProfile s{natural_list(c["x"], cp + ".x"), natural_list(c["values"], cp + ".values")};
      try {
        s.validate();
      } catch (const ParameterError& e) {
        throw ConfigError(cp, e.what());
      }
      m.cavity_profile = s;
    }
  }
  return m;
}

inline TruncationConfig parse_truncation(const YAML::Node& n) {
  check_keys(n, "truncation", {"j_max", "n_max", "parity_reduced", "rwa"});
  TruncationConfig t;
  if (n["j_max"]) t.truncation.j_max = integer(n["j_max"], "truncation.j_max");
  if (n["n_max"]) t.truncation.n_max = integer(n["n_max"], "truncation.n_max");
  if (n["parity_reduced"])
    t.truncation.parity_reduced = boolean(n["parity_reduced"], "truncation.parity_reduced");
  if (n["rwa"]) t.rwa = boolean(n["rwa"], "truncation.rwa");
  require_min(t.truncation.j_max, 1, "truncation.j_max");
  require_min(t.truncation.n_max, 0, "truncation.n_max");
  return t;
}

inline EvolveConfig parse_evolve(const YAML::Node& n) {
  check_keys(n, "evolve", {"initial", "t_stop", "samples"});
  EvolveConfig e;
  if (n["initial"]) {
    e.initial = scalar(n["initial"], "evolve.initial");
    try {
      (void)BasisState::parse(e.initial);
    } catch (const ParameterError& err) {
      throw ConfigError("evolve.initial", err.what());
    }
  }
  if (n["t_stop"]) e.t_stop = natural(n["t_stop"], "evolve.t_stop");
  if (n["samples"]) e.samples = integer(n["samples"], "evolve.samples");
  if (!(e.t_stop >= 0.0)) throw ConfigError("evolve.t_stop", "must be >= 0");
  require_min(e.samples, 1, "evolve.samples");
  return e;
}

inline DeltaEConfig parse_delta_e(const YAML::Node& n) {
  check_keys(n, "delta_e", {"d_values", "series_tol"});
  DeltaEConfig c;
  if (n["d_values"]) c.d_values = natural_list(n["d_values"], "delta_e.d_values");
  for (std::size_t i = 0; i < c.d_values.size(); ++i)
    require_positive(c.d_values[i], fmt::format("delta_e.d_values[{}]", i));
  if (n["series_tol"]) c.series_tol = natural(n["series_tol"], "delta_e.series_tol");
  require_positive(c.series_tol, "delta_e.series_tol");
  return c;
}

inline KernelConfig parse_kernel(const YAML::Node& n) {
  check_keys(n, "kernel", {"grid_points", "j_max", "export_stride", "t_stop", "samples"});
  KernelConfig k;
  if (n["grid_points"]) k.grid_points = integer(n["grid_points"], "kernel.grid_points");
  if (n["j_max"]) k.j_max = integer(n["j_max"], "kernel.j_max");
  if (n["export_stride"]) k.export_stride = integer(n["export_stride"], "kernel.export_stride");
  if (n["t_stop"] && scalar(n["t_stop"], "kernel.t_stop") != "auto") {
    k.t_stop = natural(n["t_stop"], "kernel.t_stop");
    if (!(*k.t_stop >= 0.0)) throw ConfigError("kernel.t_stop", "must be >= 0");
  }
  if (n["samples"]) k.samples = integer(n["samples"], "kernel.samples");
  require_min(k.grid_points, 13, "kernel.grid_points");
  require_min(k.j_max, 1, "kernel.j_max");
  require_min(k.export_stride, 1, "kernel.export_stride");
  require_min(k.samples, 1, "kernel.samples");
  return k;
}

inline SweepConfig parse_sweep(const YAML::Node& n) {
  check_keys(n, "sweep", {"axis", "start", "stop", "count", "observable"});
  SweepConfig s;
  for (const char* key : {"axis", "start"})
    if (!n[key]) throw ConfigError(join("sweep", key), "required key missing");
  s.axis = choice(n["axis"], "sweep.axis", {"d", "ell", "Delta", "g0"});
  s.start = natural(n["start"], "sweep.start");
  s.stop = n["stop"] ? natural(n["stop"], "sweep.stop") : s.start;
  if (n["count"]) s.count = integer(n["count"], "sweep.count");
  require_min(s.count, 1, "sweep.count");
  if (n["observable"])
    s.observable = choice(n["observable"], "sweep.observable",
                          {"delta_e_series", "delta_e_closed", "splitting_spectrum"});
  return s;
}

inline ExperimentConfig parse_experiment(const YAML::Node& n) {
  const std::string P = "experiment";
  check_keys(n, P, {"atom_mass", "rabi_coupling", "transition", "cavity_decay", "ell", "d",
                    "delta_sign", "scan"});
  ExperimentConfig e;
  auto q = [&](const char* key, Quantity& dst, Dimension dim, bool allow_zero = false) {
    const std::string path = join(P, key);
    if (n[key]) dst = parse_quantity(n[key], path);
    (void)to_si(dst, dim, path, 1.0);  // unit check
    if (allow_zero ? !(dst.value >= 0.0) : !(dst.value > 0.0))
      throw ConfigError(path, allow_zero ? "must be >= 0" : "must be > 0");
  };
  q("atom_mass", e.atom_mass, Dimension::mass);
  q("rabi_coupling", e.rabi_coupling, Dimension::frequency);
  q("transition", e.transition, Dimension::frequency);
  q("cavity_decay", e.cavity_decay, Dimension::frequency, true);
  q("ell", e.ell, Dimension::length);
  q("d", e.d, Dimension::length);
  if (n["delta_sign"])
    e.delta_sign = choice(n["delta_sign"], "experiment.delta_sign", {"positive", "negative"}) ==
                           "positive"
                       ? feasibility::DeltaSign::positive
                       : feasibility::DeltaSign::negative;
  if (const auto s = n["scan"]) {
    const std::string sp = "experiment.scan";
    check_keys(s, sp, {"param", "start", "stop", "count"});
    ScanConfig sc;
    if (!s["param"] || !s["start"])
      throw ConfigError(sp, "scan needs 'param' and 'start'");
    sc.param = choice(s["param"], sp + ".param",
                      {"d", "ell", "rabi_coupling", "transition", "cavity_decay"});
    sc.start = parse_quantity(s["start"], sp + ".start");
    sc.stop = s["stop"] ? parse_quantity(s["stop"], sp + ".stop") : sc.start;
    if (s["count"]) sc.count = integer(s["count"], sp + ".count");
    require_min(sc.count, 1, sp + ".count");
    const auto dim = scan_dimension(sc.param);
    (void)to_si(sc.start, dim, sp + ".start", 1.0);
    (void)to_si(sc.stop, dim, sp + ".stop", 1.0);
    if (sc.start.unit != sc.stop.unit)
      throw ConfigError(sp + ".stop", "unit must match scan.start");
    e.scan = sc;
  }
  return e;
}

inline OutputConfig parse_output(const YAML::Node& n) {
  check_keys(n, "output", {"dir", "stem"});
  OutputConfig o;
  if (n["dir"]) o.dir = scalar(n["dir"], "output.dir");
  if (n["stem"]) o.stem = scalar(n["stem"], "output.stem");
  if (o.dir.empty()) throw ConfigError("output.dir", "must not be empty");
  if (o.stem.find('/') != std::string::npos)
    throw ConfigError("output.stem", "must not contain '/'");
  return o;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<document>", std::string("malformed YAML: ") + e.what());
  }
  if (!root || root.IsNull()) throw ConfigError("<document>", "empty configuration");
  detail::check_keys(root, "", {"model", "truncation", "evolve", "delta_e", "kernel", "sweep",
                                "experiment", "output"});
  RunConfig c;
  if (root["model"]) c.model = detail::parse_model(root["model"]);
  if (root["truncation"]) c.truncation = detail::parse_truncation(root["truncation"]);
  if (root["evolve"]) c.evolve = detail::parse_evolve(root["evolve"]);
  if (root["delta_e"]) c.delta_e = detail::parse_delta_e(root["delta_e"]);
  if (root["kernel"]) c.kernel = detail::parse_kernel(root["kernel"]);
  if (root["sweep"]) c.sweep = detail::parse_sweep(root["sweep"]);
  if (root["experiment"]) c.experiment = detail::parse_experiment(root["experiment"]);
  if (root["output"]) c.output = detail::parse_output(root["output"]);
  if (c.model) {
    try {
      (void)c.model->params();
    } catch (const ParameterError& e) {
      throw ConfigError("model", e.what());
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Echo.

namespace detail {

inline std::string natural_text(double v) { return exact(v) + " natural"; }

inline std::string list_text(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + natural_text(v[i]);
  return s + "]";
}

inline std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

}  // namespace detail

/// Materialized configuration as YAML, defaults included.
inline std::string echo_config(const RunConfig& c) {
  using detail::natural_text;
  std::ostringstream os;
  if (c.model) {
    const auto& m = *c.model;
    os << "model:\n";
    os << "  ell: " << natural_text(m.ell) << "\n";
    os << "  d: " << natural_text(m.d) << "\n";
    os << "  mass: " << natural_text(m.mass) << "\n";
    os << "  Delta: " << natural_text(m.Delta) << "\n";
    os << "  g0: " << natural_text(m.g0) << "\n";
    os << "  omega_c: " << (m.omega_c ? natural_text(*m.omega_c) : "auto") << "\n";
    os << "  Omega_a: " << natural_text(m.Omega_a) << "\n";
    os << "  hbar: " << natural_text(m.hbar) << "\n";
    if (const auto* cp = std::get_if<ConstantProfile>(&m.cavity_profile)) {
      os << "  cavity_profile:\n    constant: " << natural_text(cp->value) << "\n";
    } else {
      const auto& s = std::get<SampledProfile>(m.cavity_profile);
      os << "  cavity_profile:\n";
      os << "    x: " << detail::list_text(s.x) << "\n";
      os << "    values: " << detail::list_text(s.values) << "\n";
    }
  }
  const auto& t = c.truncation;
  os << "truncation:\n";
  os << "  j_max: " << t.truncation.j_max << "\n";
  os << "  n_max: " << t.truncation.n_max << "\n";
  os << "  parity_reduced: " << (t.truncation.parity_reduced ? "true" : "false") << "\n";
  os << "  rwa: " << (t.rwa ? "true" : "false") << "\n";
  os << "evolve:\n";
  os << "  initial: " << detail::quoted(c.evolve.initial) << "\n";
  os << "  t_stop: " << natural_text(c.evolve.t_stop) << "\n";
  os << "  samples: " << c.evolve.samples << "\n";
  os << "delta_e:\n";
  os << "  d_values: " << detail::list_text(c.delta_e.d_values) << "\n";
  os << "  series_tol: " << natural_text(c.delta_e.series_tol) << "\n";
  os << "kernel:\n";
  os << "  grid_points: " << c.kernel.grid_points << "\n";
  os << "  j_max: " << c.kernel.j_max << "\n";
  os << "  export_stride: " << c.kernel.export_stride << "\n";
  os << "  t_stop: " << (c.kernel.t_stop ? natural_text(*c.kernel.t_stop) : "auto") << "\n";
  os << "  samples: " << c.kernel.samples << "\n";
  if (c.sweep) {
    const auto& s = *c.sweep;
    os << "sweep:\n";
    os << "  axis: " << s.axis << "\n";
    os << "  start: " << natural_text(s.start) << "\n";
    os << "  stop: " << natural_text(s.stop) << "\n";
    os << "  count: " << s.count << "\n";
    os << "  observable: " << s.observable << "\n";
  }
  if (c.experiment) {
    const auto& e = *c.experiment;
    os << "experiment:\n";
    os << "  atom_mass: " << e.atom_mass.text() << "\n";
    os << "  rabi_coupling: " << e.rabi_coupling.text() << "\n";
    os << "  transition: " << e.transition.text() << "\n";
    os << "  cavity_decay: " << e.cavity_decay.text() << "\n";
    os << "  ell: " << e.ell.text() << "\n";
    os << "  d: " << e.d.text() << "\n";
    os << "  delta_sign: " << feasibility::to_string(e.delta_sign) << "\n";
    if (e.scan) {
      os << "  scan:\n";
      os << "    param: " << e.scan->param << "\n";
      os << "    start: " << e.scan->start.text() << "\n";
      os << "    stop: " << e.scan->stop.text() << "\n";
      os << "    count: " << e.scan->count << "\n";
    }
  }
  os << "output:\n";
  os << "  dir: " << detail::quoted(c.output.dir) << "\n";
  os << "  stem: " << detail::quoted(c.output.stem) << "\n";
  return os.str();
}

/// "# "-prefixed provenance header: tool version, then the echoed config.
inline std::string provenance_header(const RunConfig& c) {
  std::string out = std::string("# ") + kToolVersion + "\n";
  std::istringstream is(echo_config(c));
  std::string line;
  while (std::getline(is, line)) out += "# " + line + "\n";
  return out;
}

/// Recovers the config text from an artifact written with provenance_header.
inline std::string extract_echo(const std::string& artifact) {
  std::istringstream is(artifact);
  std::string line, out;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.rfind("# ", 0) != 0) break;
    if (first) {
      first = false;
      continue;
    }
    out += line.substr(2) + "\n";
  }
  return out;
}

}  // namespace t3k::cli
