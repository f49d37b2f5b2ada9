#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "red/error.hpp"
#include "red/spec.hpp"

// Experiment configuration: strict JSON in, validated ExperimentConfig out.
// Every problem is collected with a JSON-pointer path before anything throws.

namespace red::harness {

using Json = nlohmann::ordered_json;

struct InitialStateConfig {
  std::string preset;  // gaussian_packet | plane_wave | two_packet; empty when `file` is set
  std::filesystem::path file;
  std::vector<double> center, sigma, boost;  // gaussian_packet, and packet a of two_packet
  std::vector<double> center_b, boost_b;     // two_packet
  double weight_a = 1.0, weight_b = 1.0;     // two_packet
  std::vector<double> k;                     // plane_wave
};

struct FieldSourceConfig {
  std::string type;    // potential | drift
  std::string preset;  // see kPotentialPresets / kDriftPresets; empty when `file` is set
  std::filesystem::path file;
  double k = 1.0;                 // harmonic presets
  std::vector<double> center;     // external_harmonic, per spatial axis
  int particle = 0;               // external_harmonic
  double value = 0.0;             // constant
  std::vector<double> slope;      // linear drift, per configuration axis
  bool relational = false;        // declared for file potentials; derived for presets
};

struct ShiftConfig {
  std::string mode = "fixed";  // fixed | best_match | zero_constrained
  std::vector<double> values;  // fixed
};

struct RunConfig {
  int steps = 0;
  double dt_pde = 0.0;
  int snapshot_every = 10;
  std::size_t ensemble_K = 0;
  std::uint64_t seed = 0;
  std::string evolution = "schrodinger";  // schrodinger | hamilton | fokker_planck
};

struct ExperimentConfig {
  SystemSpec system;
  InitialStateConfig initial_state;
  FieldSourceConfig field;
  ShiftConfig shift;
  RunConfig run;
  std::filesystem::path output_directory = "out";
};

inline const std::vector<std::string> kPotentialPresets{"zero", "constant", "external_harmonic", "relational_harmonic",
                                                        "periodic_relational_harmonic"};
inline const std::vector<std::string> kDriftPresets{"constant", "linear"};

namespace detail {

inline std::string pointer(const std::string& parent, const std::string& key) { return parent + "/" + key; }
inline std::string pointer(const std::string& parent, std::size_t index) { return parent + "/" + std::to_string(index); }

inline std::string list(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

class Reader {
 public:
  std::vector<ConfigIssue> issues;

  void fail(std::string path, std::string message) { issues.push_back({std::move(path), std::move(message)}); }

  // Checks that `j` is an object with no keys outside `allowed`.
  bool object(const Json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) {
      fail(path.empty() ? "/" : path, "expected an object");
      return false;
    }
    for (const auto& [key, _] : j.items())
      if (!allowed.count(key)) {
        std::vector<std::string> names(allowed.begin(), allowed.end());
        fail(pointer(path, key), "unknown key (allowed: " + list(names) + ")");
      }
    return true;
  }

  std::optional<double> number(const Json& j, const std::string& key, const std::string& path, bool required) {
    if (!j.contains(key)) {
      if (required) fail(pointer(path, key), "missing required number");
      return std::nullopt;
    }
    const auto& v = j.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      fail(pointer(path, key), "expected a finite number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<std::int64_t> integer(const Json& j, const std::string& key, const std::string& path, bool required) {
    if (!j.contains(key)) {
      if (required) fail(pointer(path, key), "missing required integer");
      return std::nullopt;
    }
    const auto& v = j.at(key);
    if (!v.is_number_integer()) {
      fail(pointer(path, key), "expected an integer");
      return std::nullopt;
    }
    return v.get<std::int64_t>();
  }

  std::optional<std::string> string(const Json& j, const std::string& key, const std::string& path, bool required) {
    if (!j.contains(key)) {
      if (required) fail(pointer(path, key), "missing required string");
      return std::nullopt;
    }
    if (!j.at(key).is_string()) {
      fail(pointer(path, key), "expected a string");
      return std::nullopt;
    }
    return j.at(key).get<std::string>();
  }

  std::optional<std::string> choice(const Json& j, const std::string& key, const std::string& path, bool required,
                                    const std::vector<std::string>& options) {
    auto s = string(j, key, path, required);
    if (s && std::find(options.begin(), options.end(), *s) == options.end()) {
      fail(pointer(path, key), "unknown value \"" + *s + "\" (expected one of: " + list(options) + ")");
      return std::nullopt;
    }
    return s;
  }

  // Array of finite numbers; `expected` < 0 skips the length check.
  std::optional<std::vector<double>> numbers(const Json& j, const std::string& key, const std::string& path, bool required,
                                             long expected) {
    if (!j.contains(key)) {
      if (required) fail(pointer(path, key), "missing required array");
      return std::nullopt;
    }
    const auto& v = j.at(key);
    const auto p = pointer(path, key);
    if (!v.is_array()) {
      fail(p, "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    bool ok = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
        fail(pointer(p, i), "expected a finite number");
        ok = false;
        continue;
      }
      out.push_back(v[i].get<double>());
    }
    if (expected >= 0 && v.size() != static_cast<std::size_t>(expected)) {
      fail(p, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
      ok = false;
    }
    if (!ok) return std::nullopt;
    return out;
  }
};

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace detail

/// Parses and validates a configuration document. Relative file paths are
/// resolved against `base_dir`. Throws ConfigError listing every issue.
inline ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".") {
  using detail::pointer;
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("/", std::string("not valid JSON: ") + e.what());
  }
  detail::Reader r;
  ExperimentConfig cfg;
  if (!r.object(root, "", {"system", "initial_state", "drift_or_potential", "shift_mode", "run", "outputs"}))
    throw ConfigError(r.issues);

  // system
  bool system_ok = false;
  if (!root.contains("system")) {
    r.fail("/system", "missing required section");
  } else if (const auto& js = root.at("system");
             r.object(js, "/system", {"n_particles", "spatial_dim", "masses", "hbar", "box_length", "grid_points", "dt",
                                      "grid_budget"})) {
    const std::size_t before = r.issues.size();
    auto& s = cfg.system;
    if (auto v = r.integer(js, "n_particles", "/system", false)) s.n_particles = static_cast<int>(*v);
    if (auto v = r.integer(js, "spatial_dim", "/system", false)) s.spatial_dim = static_cast<int>(*v);
    if (s.n_particles < 1) r.fail("/system/n_particles", "must be >= 1");
    if (s.spatial_dim < 1 || s.spatial_dim > 3) r.fail("/system/spatial_dim", "must be 1, 2 or 3");
    const bool dims_ok = r.issues.size() == before;
    const long N = dims_ok ? s.n_particles : -1, d = dims_ok ? s.spatial_dim : -1;
    s.masses.assign(static_cast<std::size_t>(std::max(1, s.n_particles)), 1.0);
    if (auto v = r.numbers(js, "masses", "/system", false, N)) {
      s.masses = *v;
      for (std::size_t n = 0; n < v->size(); ++n)
        if (!((*v)[n] > 0.0)) r.fail(pointer("/system/masses", n), "mass must be positive, got " + detail::fmt((*v)[n]));
    }
    if (auto v = r.number(js, "hbar", "/system", false)) {
      s.hbar = *v;
      if (!(s.hbar > 0.0)) r.fail("/system/hbar", "must be positive");
    }
    if (auto v = r.numbers(js, "box_length", "/system", true, d)) {
      s.box_length = *v;
      for (std::size_t a = 0; a < v->size(); ++a)
        if (!((*v)[a] > 0.0)) r.fail(pointer("/system/box_length", a), "must be positive");
    }
    if (auto v = r.numbers(js, "grid_points", "/system", true, dims_ok ? N * d : -1)) {
      s.grid_points.clear();
      for (std::size_t A = 0; A < v->size(); ++A) {
        const double g = (*v)[A];
        if (g != std::floor(g) || g < 2 || g > (1 << 24))
          r.fail(pointer("/system/grid_points", A), "must be an integer >= 2");
        s.grid_points.push_back(static_cast<int>(g));
      }
    }
    if (auto v = r.number(js, "dt", "/system", false)) {
      s.dt = *v;
      if (!(s.dt > 0.0)) r.fail("/system/dt", "must be positive");
    }
    if (auto v = r.integer(js, "grid_budget", "/system", false)) {
      if (*v < 1) r.fail("/system/grid_budget", "must be positive");
      else s.grid_budget = static_cast<std::size_t>(*v);
    }
    if (r.issues.size() == before) {
      try {
        s.validate();
        system_ok = true;
      } catch (const DomainError& e) {
        r.fail("/system", e.what());
      }
    }
  }
  const auto& spec = cfg.system;
  const long D = system_ok ? spec.config_dim() : -1;
  const long d = system_ok ? spec.spatial_dim : -1;

  // run (parsed early: other checks depend on the evolution mode)
  if (root.contains("run")) {
    const auto& jr = root.at("run");
    if (r.object(jr, "/run", {"steps", "dt_pde", "snapshot_every", "ensemble_K", "seed", "evolution"})) {
      auto& run = cfg.run;
      if (auto v = r.integer(jr, "steps", "/run", false)) {
        if (*v < 0) r.fail("/run/steps", "must be >= 0");
        else run.steps = static_cast<int>(*v);
      }
      run.dt_pde = spec.dt;
      if (auto v = r.number(jr, "dt_pde", "/run", false)) {
        if (!(*v > 0.0)) r.fail("/run/dt_pde", "must be positive");
        else run.dt_pde = *v;
      }
      if (auto v = r.integer(jr, "snapshot_every", "/run", false)) {
        if (*v < 1) r.fail("/run/snapshot_every", "must be >= 1");
        else run.snapshot_every = static_cast<int>(*v);
      }
      if (auto v = r.integer(jr, "ensemble_K", "/run", false)) {
        if (*v < 0) r.fail("/run/ensemble_K", "must be >= 0");
        else run.ensemble_K = static_cast<std::size_t>(*v);
      }
      if (jr.contains("seed")) {
        const auto& js = jr.at("seed");
        if (js.is_number_unsigned()) run.seed = js.get<std::uint64_t>();
        else if (js.is_number_integer() && js.get<std::int64_t>() >= 0) run.seed = static_cast<std::uint64_t>(js.get<std::int64_t>());
        else r.fail("/run/seed", "expected a non-negative integer");
      }
      if (auto v = r.choice(jr, "evolution", "/run", false, {"schrodinger", "hamilton", "fokker_planck"})) run.evolution = *v;
    }
  } else {
    cfg.run.dt_pde = spec.dt;
  }
  const auto& evolution = cfg.run.evolution;
  const bool wave = evolution == "schrodinger";
  if (evolution == "fokker_planck" && system_ok) {
    const double ratio = spec.dt / cfg.run.dt_pde;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1)
      r.fail("/run/dt_pde", "must divide system.dt into a whole number of substeps in fokker_planck mode");
  }
  if (cfg.run.ensemble_K > 0 && evolution != "fokker_planck")
    r.fail("/run/ensemble_K", "walker ensembles are only evolved in fokker_planck mode");

  auto resolve = [&](const std::string& file, const std::string& path) {
    std::filesystem::path p(file);
    if (p.is_relative()) p = base_dir / p;
    if (!std::filesystem::exists(p)) r.fail(path, "file not found: " + p.string());
    return p;
  };

  // Resolution limits: sigma >= 4 cells and |p / hbar| below half the Nyquist wavenumber.
  auto check_sigma = [&](const std::vector<double>& sigma, const std::string& path) {
    if (!system_ok) return;
    for (std::size_t A = 0; A < sigma.size(); ++A) {
      const double h = spec.spacing(static_cast<int>(A));
      if (!(sigma[A] >= 4.0 * h))
        r.fail(pointer(path, A), "sigma " + detail::fmt(sigma[A]) + " is below 4 grid cells (" + detail::fmt(4.0 * h) + ")");
    }
  };
  auto check_wavenumber = [&](const std::vector<double>& p, const std::string& path, double to_k, bool periodic) {
    if (!system_ok) return;
    for (std::size_t A = 0; A < p.size(); ++A) {
      const int axis = static_cast<int>(A);
      const double k = p[A] * to_k, h = spec.spacing(axis), L = spec.length_of_axis(axis);
      if (!(std::abs(k) < std::numbers::pi / (2.0 * h)))
        r.fail(pointer(path, A), "wavenumber " + detail::fmt(k) + " is not below half the Nyquist wavenumber " +
                                     detail::fmt(std::numbers::pi / (2.0 * h)));
      const double turns = k * L / (2.0 * std::numbers::pi);
      if (periodic && std::abs(turns - std::round(turns)) > 1e-9)
        r.fail(pointer(path, A), "wavefunction evolution needs k L in 2 pi Z; nearest admissible value is " +
                                     detail::fmt(std::round(turns) * 2.0 * std::numbers::pi / L / to_k));
    }
  };

  // initial_state
  if (!root.contains("initial_state")) {
    r.fail("/initial_state", "missing required section");
  } else if (const auto& ji = root.at("initial_state"); r.object(ji, "/initial_state", {"preset", "params", "file"})) {
    auto& is = cfg.initial_state;
    const bool has_preset = ji.contains("preset"), has_file = ji.contains("file");
    if (has_preset && has_file) r.fail("/initial_state", "give either \"preset\" or \"file\", not both");
    if (!has_preset && !has_file) r.fail("/initial_state", "one of \"preset\" or \"file\" is required");
    if (has_file) {
      if (auto f = r.string(ji, "file", "/initial_state", true)) is.file = resolve(*f, "/initial_state/file");
      if (ji.contains("params")) r.fail("/initial_state/params", "params apply to presets only");
      if (evolution == "hamilton")
        r.fail("/initial_state/file", "hamilton evolution needs a preset initial state (a wrapped phase cannot be differentiated)");
    }
    if (has_preset && !has_file) {
      auto preset = r.choice(ji, "preset", "/initial_state", true, {"gaussian_packet", "plane_wave", "two_packet"});
      const Json params = ji.contains("params") ? ji.at("params") : Json::object();
      const std::string pp = "/initial_state/params";
      const double to_k = 1.0 / spec.hbar;
      if (preset == std::optional<std::string>("gaussian_packet")) {
        is.preset = *preset;
        if (r.object(params, pp, {"center", "sigma", "boost"})) {
          if (auto v = r.numbers(params, "center", pp, true, D)) is.center = *v;
          if (auto v = r.numbers(params, "sigma", pp, true, D)) {
            is.sigma = *v;
            for (std::size_t A = 0; A < v->size(); ++A)
              if (!((*v)[A] > 0.0)) r.fail(pointer(pp + "/sigma", A), "must be positive");
            check_sigma(*v, pp + "/sigma");
          }
          is.boost.assign(static_cast<std::size_t>(std::max(0L, D)), 0.0);
          if (auto v = r.numbers(params, "boost", pp, false, D)) {
            is.boost = *v;
            check_wavenumber(*v, pp + "/boost", to_k, wave);
          }
        }
      } else if (preset == std::optional<std::string>("plane_wave")) {
        is.preset = *preset;
        if (r.object(params, pp, {"k"}))
          if (auto v = r.numbers(params, "k", pp, true, D)) {
            is.k = *v;
            check_wavenumber(*v, pp + "/k", 1.0, wave);
          }
      } else if (preset == std::optional<std::string>("two_packet")) {
        is.preset = *preset;
        if (evolution == "hamilton") r.fail("/initial_state/preset", "two_packet may have nodes; use schrodinger evolution");
        if (r.object(params, pp, {"center_a", "boost_a", "center_b", "boost_b", "sigma", "weight_a", "weight_b"})) {
          if (auto v = r.numbers(params, "center_a", pp, true, D)) is.center = *v;
          if (auto v = r.numbers(params, "center_b", pp, true, D)) is.center_b = *v;
          if (auto v = r.numbers(params, "sigma", pp, true, D)) {
            is.sigma = *v;
            for (std::size_t A = 0; A < v->size(); ++A)
              if (!((*v)[A] > 0.0)) r.fail(pointer(pp + "/sigma", A), "must be positive");
            check_sigma(*v, pp + "/sigma");
          }
          is.boost.assign(static_cast<std::size_t>(std::max(0L, D)), 0.0);
          is.boost_b = is.boost;
          if (auto v = r.numbers(params, "boost_a", pp, false, D)) {
            is.boost = *v;
            check_wavenumber(*v, pp + "/boost_a", to_k, true);
          }
          if (auto v = r.numbers(params, "boost_b", pp, false, D)) {
            is.boost_b = *v;
            check_wavenumber(*v, pp + "/boost_b", to_k, true);
          }
          if (auto v = r.number(params, "weight_a", pp, false)) is.weight_a = *v;
          if (auto v = r.number(params, "weight_b", pp, false)) is.weight_b = *v;
          if (is.weight_a == 0.0 && is.weight_b == 0.0) r.fail(pp, "weights cannot both be zero");
        }
      }
    }
  }

  // drift_or_potential
  if (!root.contains("drift_or_potential")) {
    r.fail("/drift_or_potential", "missing required section");
  } else if (const auto& jf = root.at("drift_or_potential");
             r.object(jf, "/drift_or_potential", {"type", "preset", "params", "file", "relational"})) {
    auto& f = cfg.field;
    const std::string fp = "/drift_or_potential";
    if (auto t = r.choice(jf, "type", fp, true, {"potential", "drift"})) {
      f.type = *t;
      if (f.type == "potential" && evolution == "fokker_planck")
        r.fail(fp + "/type", "fokker_planck evolution needs a drift, not a potential");
      if (f.type == "drift" && evolution != "fokker_planck")
        r.fail(fp + "/type", evolution + " evolution needs a potential, not a drift");
    }
    const bool has_preset = jf.contains("preset"), has_file = jf.contains("file");
    if (has_preset && has_file) r.fail(fp, "give either \"preset\" or \"file\", not both");
    if (!has_preset && !has_file) r.fail(fp, "one of \"preset\" or \"file\" is required");
    std::optional<bool> declared;
    if (jf.contains("relational")) {
      if (!jf.at("relational").is_boolean()) r.fail(fp + "/relational", "expected a boolean");
      else declared = jf.at("relational").get<bool>();
      if (f.type == "drift") r.fail(fp + "/relational", "applies to potentials only");
    }
    if (declared && has_file) f.relational = *declared;
    if (has_file && !has_preset) {
      if (auto s = r.string(jf, "file", fp, true)) f.file = resolve(*s, fp + "/file");
      if (jf.contains("params")) r.fail(fp + "/params", "params apply to presets only");
    }
    if (has_preset && !has_file && !f.type.empty()) {
      const auto& names = f.type == "potential" ? kPotentialPresets : kDriftPresets;
      const Json params = jf.contains("params") ? jf.at("params") : Json::object();
      const std::string pp = fp + "/params";
      if (auto p = r.choice(jf, "preset", fp, true, names)) {
        f.preset = *p;
        if (f.preset == "zero" || (f.type == "drift" && f.preset == "constant")) {
          r.object(params, pp, {});
        } else if (f.preset == "constant") {
          if (r.object(params, pp, {"value"}))
            if (auto v = r.number(params, "value", pp, true)) f.value = *v;
        } else if (f.preset == "external_harmonic") {
          if (r.object(params, pp, {"k", "center", "particle"})) {
            if (auto v = r.number(params, "k", pp, true)) f.k = *v;
            if (auto v = r.numbers(params, "center", pp, true, d)) f.center = *v;
            if (auto v = r.integer(params, "particle", pp, false)) {
              if (system_ok && (*v < 0 || *v >= spec.n_particles)) r.fail(pp + "/particle", "no such particle");
              else f.particle = static_cast<int>(*v);
            }
          }
        } else if (f.preset == "relational_harmonic" || f.preset == "periodic_relational_harmonic") {
          if (r.object(params, pp, {"k"}))
            if (auto v = r.number(params, "k", pp, true)) f.k = *v;
          if (system_ok && spec.n_particles < 2) r.fail(fp + "/preset", "relational potentials need at least 2 particles");
        } else if (f.preset == "linear") {
          if (r.object(params, pp, {"slope"}))
            if (auto v = r.numbers(params, "slope", pp, true, D)) f.slope = *v;
        }
        f.relational = f.preset == "zero" || f.preset == "constant" || f.preset == "relational_harmonic" ||
                       f.preset == "periodic_relational_harmonic";
        // presets know whether they are relational; a declaration must agree
        if (declared && *declared != f.relational)
          r.fail(fp + "/relational", "preset " + f.preset + (f.relational ? " is" : " is not") + " relational");
      }
    }
  }

  // shift_mode
  cfg.shift.values.assign(static_cast<std::size_t>(std::max(0L, d)), 0.0);
  if (root.contains("shift_mode")) {
    const auto& jm = root.at("shift_mode");
    if (r.object(jm, "/shift_mode", {"mode", "values"})) {
      if (auto m = r.choice(jm, "mode", "/shift_mode", true, {"fixed", "best_match", "zero_constrained"})) cfg.shift.mode = *m;
      if (cfg.shift.mode == "fixed") {
        if (auto v = r.numbers(jm, "values", "/shift_mode", false, d)) cfg.shift.values = *v;
      } else if (jm.contains("values")) {
        r.fail("/shift_mode/values", "values apply to fixed mode only");
      }
      if (cfg.shift.mode == "zero_constrained" && evolution == "fokker_planck")
        r.fail("/shift_mode/mode", "zero_constrained needs schrodinger or hamilton evolution");
    }
  }

  // outputs
  if (root.contains("outputs")) {
    const auto& jo = root.at("outputs");
    if (r.object(jo, "/outputs", {"directory"}))
      if (auto s = r.string(jo, "directory", "/outputs", false)) cfg.output_directory = *s;
  }

  if (!r.issues.empty()) throw ConfigError(r.issues);
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
}

/// Fully resolved configuration, every default spelled out.
inline Json to_json(const ExperimentConfig& c) {
  Json j;
  const auto& s = c.system;
  j["system"] = {{"n_particles", s.n_particles}, {"spatial_dim", s.spatial_dim}, {"masses", s.masses},
                 {"hbar", s.hbar},               {"box_length", s.box_length},   {"grid_points", s.grid_points},
                 {"dt", s.dt},                   {"grid_budget", s.grid_budget}};
  const auto& is = c.initial_state;
  if (!is.file.empty()) {
    j["initial_state"] = {{"file", is.file.generic_string()}};
  } else if (is.preset == "gaussian_packet") {
    j["initial_state"] = {{"preset", is.preset}, {"params", {{"center", is.center}, {"sigma", is.sigma}, {"boost", is.boost}}}};
  } else if (is.preset == "plane_wave") {
    j["initial_state"] = {{"preset", is.preset}, {"params", {{"k", is.k}}}};
  } else {
    j["initial_state"] = {{"preset", is.preset},
                          {"params",
                           {{"center_a", is.center},
                            {"boost_a", is.boost},
                            {"center_b", is.center_b},
                            {"boost_b", is.boost_b},
                            {"sigma", is.sigma},
                            {"weight_a", is.weight_a},
                            {"weight_b", is.weight_b}}}};
  }
  const auto& f = c.field;
  Json jf{{"type", f.type}};
  if (!f.file.empty()) {
    jf["file"] = f.file.generic_string();
  } else {
    jf["preset"] = f.preset;
    Json params = Json::object();
    if (f.preset == "constant" && f.type == "potential") params["value"] = f.value;
    if (f.preset == "external_harmonic") params = {{"k", f.k}, {"center", f.center}, {"particle", f.particle}};
    if (f.preset == "relational_harmonic" || f.preset == "periodic_relational_harmonic") params["k"] = f.k;
    if (f.preset == "linear") params["slope"] = f.slope;
    jf["params"] = params;
  }
  if (f.type == "potential") jf["relational"] = f.relational;
  j["drift_or_potential"] = jf;
  j["shift_mode"] = {{"mode", c.shift.mode}};
  if (c.shift.mode == "fixed") j["shift_mode"]["values"] = c.shift.values;
  j["run"] = {{"steps", c.run.steps},           {"dt_pde", c.run.dt_pde}, {"snapshot_every", c.run.snapshot_every},
              {"ensemble_K", c.run.ensemble_K}, {"seed", c.run.seed},     {"evolution", c.run.evolution}};
  j["outputs"] = {{"directory", c.output_directory.generic_string()}};
  return j;
}

}  // namespace red::harness
