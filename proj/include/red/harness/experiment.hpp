#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "red/harness/config.hpp"
#include "red/harness/io.hpp"
#include "red/red.hpp"

// Turns an ExperimentConfig into initial data, evolves it and writes
// observables, snapshots and a manifest into the output directory.

namespace red::harness {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitVerification = 4 };

inline const char* kToolVersion =
#ifdef RED_VERSION
    RED_VERSION;
#else
    "dev";
#endif

struct Setup {
  SpecPtr spec;
  std::optional<WaveField> psi;          // schrodinger
  std::optional<EpistemicState> state;   // hamilton
  std::optional<ScalarField> rho;        // fokker_planck
  std::optional<Potential> potential;    // schrodinger, hamilton
  std::optional<ScalarField> drift_phi;  // fokker_planck: periodic part of phi
  std::vector<double> drift_tilt;        // fokker_planck: linear part of phi
  std::optional<DriftPotential> drift;
  std::vector<ScalarField> drift_grad;
  std::optional<Ensemble> ensemble;
};

namespace detail {

inline std::vector<double> column(const CsvTable& t, const std::string& name, std::size_t expected, const std::string& where) {
  const long c = t.index_of(name);
  if (c < 0) throw ConfigError(where, "missing column \"" + name + "\"");
  const auto& col = t.columns[static_cast<std::size_t>(c)];
  if (col.size() != expected)
    throw ConfigError(where, red::detail::concat("column \"", name, "\" has ", col.size(), " rows, the grid has ", expected,
                                                   " cells"));
  return col;
}

inline WaveField load_wavefunction(const SpecPtr& spec, const std::filesystem::path& file, const std::string& where) {
  auto t = read_csv(file, where);
  WaveField psi{spec, std::vector<Complex>(spec->cell_count()), 0.0};
  if (t.index_of("re") >= 0) {
    auto re = column(t, "re", psi.size(), where), im = column(t, "im", psi.size(), where);
    for (std::size_t i = 0; i < psi.size(); ++i) psi.values[i] = {re[i], im[i]};
  } else {
    auto rho = column(t, "rho", psi.size(), where);
    for (std::size_t i = 0; i < psi.size(); ++i) {
      if (rho[i] < 0.0) throw ConfigError(where, red::detail::concat("rho is negative in row ", i + 2));
      psi.values[i] = std::sqrt(rho[i]);
    }
  }
  // files written by this tool are already normalized; leave their bits alone
  if (std::abs(norm(psi) - 1.0) < 1e-14) return psi;
  return normalized(std::move(psi));
}

inline std::vector<double> scaled(std::vector<double> v, double s) {
  for (double& x : v) x *= s;
  return v;
}

}  // namespace detail

/// Builds every ingredient of a run. Problems with the initial data are
/// configuration errors, reported with the JSON path they came from.
inline Setup build_setup(const ExperimentConfig& cfg) {
  Setup s;
  s.spec = make_spec(cfg.system);
  const auto& spec = s.spec;
  const auto& is = cfg.initial_state;
  const auto& evolution = cfg.run.evolution;
  const std::string is_where = is.file.empty() ? "/initial_state/params" : "/initial_state/file";
  try {
    if (evolution == "schrodinger" || (evolution == "fokker_planck" && (is.preset == "two_packet" || !is.file.empty()))) {
      WaveField psi = !is.file.empty() ? detail::load_wavefunction(spec, is.file, is_where)
                      : is.preset == "gaussian_packet"
                          ? presets::gaussian_packet(spec, is.center, is.sigma, is.boost)
                      : is.preset == "plane_wave"
                          ? presets::plane_wave(spec, is.k)
                          : presets::two_packet(spec, is.center, is.boost, is.center_b, is.boost_b, is.sigma, is.weight_a,
                                                is.weight_b);
      if (evolution == "schrodinger") s.psi = std::move(psi);
      else s.rho = density(psi);
    } else if (evolution == "hamilton") {
      if (is.preset == "gaussian_packet") {
        s.state = presets::gaussian_state(spec, is.center, is.sigma, is.boost);
      } else {
        s.state = EpistemicState::make(ScalarField(spec, 1.0 / spec->volume()), ScalarField(spec),
                                       detail::scaled(is.k, spec->hbar));
      }
    } else {
      s.rho = is.preset == "gaussian_packet" ? presets::gaussian_density(spec, is.center, is.sigma)
                                             : ScalarField(spec, 1.0 / spec->volume());
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(is_where, e.what());
  }

  const auto& f = cfg.field;
  const std::string f_where = f.file.empty() ? "/drift_or_potential/params" : "/drift_or_potential/file";
  try {
    if (f.type == "potential") {
      if (!f.file.empty()) {
        auto t = read_csv(f.file, f_where);
        s.potential = Potential{ScalarField(spec, detail::column(t, "u", spec->cell_count(), f_where)), f.relational};
      } else if (f.preset == "zero") {
        s.potential = Potential::zero(spec);
      } else if (f.preset == "constant") {
        s.potential = presets::constant_potential(spec, f.value);
      } else if (f.preset == "external_harmonic") {
        s.potential = presets::external_harmonic(spec, f.k, f.center, f.particle);
      } else if (f.preset == "relational_harmonic") {
        s.potential = presets::relational_harmonic(spec, f.k);
      } else {
        s.potential = presets::periodic_relational_harmonic(spec, f.k);
      }
      if (s.potential->relational) {
        auto check = relational_check(*s.potential, 64, cfg.run.seed);
        if (!check.passed)
          throw ConfigError(f.file.empty() ? "/drift_or_potential/preset" : "/drift_or_potential/relational",
                              red::detail::concat("potential is declared relational but changes by ", check.max_deviation,
                                                  " under a global translation"));
      }
    } else {
      if (!f.file.empty()) {
        auto t = read_csv(f.file, f_where);
        s.drift_phi = ScalarField(spec, detail::column(t, "phi", spec->cell_count(), f_where));
        s.drift_tilt.assign(static_cast<std::size_t>(spec->config_dim()), 0.0);
      } else {
        s.drift_phi = ScalarField(spec);
        s.drift_tilt = f.preset == "linear" ? f.slope : std::vector<double>(static_cast<std::size_t>(spec->config_dim()), 0.0);
      }
      s.drift = DriftPotential::on_grid(*s.drift_phi, s.drift_tilt);
      s.drift_grad = s.drift->gradient_on_grid(spec);
      if (cfg.run.ensemble_K > 0) s.ensemble = sample_density(*s.rho, cfg.run.ensemble_K, cfg.run.seed);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(f_where, e.what());
  }

  if (cfg.shift.mode == "zero_constrained") {
    if (s.psi) {
      try {
        s.psi = remove_total_momentum(*s.psi);
      } catch (const DomainError& e) {
        throw ConfigError("/shift_mode/mode", std::string("cannot prepare zero total momentum: ") + e.what() +
                                                    "; choose commensurate boosts");
      }
    } else if (s.state) {
      auto P = total_momentum(*s.state);
      const double M = spec->total_mass();
      auto tilt = s.state->phase_tilt;
      for (int A = 0; A < spec->config_dim(); ++A)
        tilt[static_cast<std::size_t>(A)] -= spec->mass_of_axis(A) * P[static_cast<std::size_t>(spec->spatial_axis_of(A))] / M;
      s.state = EpistemicState::make(s.state->rho, s.state->phase, std::move(tilt), s.state->time);
    }
  }
  return s;
}

/// P~_a = hbar integral rho sum_n d phi / dx_n^a for a drift-driven density.
inline std::vector<double> drift_momentum(const ScalarField& rho, std::span<const ScalarField> grad) {
  const auto& spec = rho.spec();
  std::vector<double> out(static_cast<std::size_t>(spec.spatial_dim));
  for (int a = 0; a < spec.spatial_dim; ++a) {
    std::vector<double> integrand(rho.size(), 0.0);
    for (int n = 0; n < spec.n_particles; ++n) {
      const auto& g = grad[static_cast<std::size_t>(n * spec.spatial_dim + a)];
      for (std::size_t i = 0; i < rho.size(); ++i) integrand[i] += spec.hbar * rho[i] * g[i];
    }
    out[static_cast<std::size_t>(a)] = quadrature(spec, integrand);
  }
  return out;
}

inline std::vector<double> current_momentum(const Setup& s) {
  if (s.psi) return expected_momentum(*s.psi);
  if (s.state) return total_momentum(*s.state);
  return drift_momentum(*s.rho, s.drift_grad);
}

inline ShiftVelocity current_shift(const ExperimentConfig& cfg, const Setup& s) {
  if (cfg.shift.mode == "fixed") return {cfg.shift.values};
  if (cfg.shift.mode == "zero_constrained") return ShiftVelocity::zero(*s.spec);
  auto P = current_momentum(s);
  for (double& p : P) p /= s.spec->total_mass();
  return {P};
}

inline std::vector<std::string> observable_header(const SystemSpec& spec) {
  std::vector<std::string> h{"t"};
  for (int a = 0; a < spec.spatial_dim; ++a) h.push_back("P_" + std::to_string(a));
  for (const char* c : {"energy", "norm", "entropy"}) h.push_back(c);
  for (int a = 0; a < spec.spatial_dim; ++a) h.push_back("xi_" + std::to_string(a));
  for (const char* c : {"g_total", "g_constant", "g_entropy", "g_h0"}) h.push_back(c);
  return h;
}

inline std::vector<double> observable_row(const Setup& s, const ShiftVelocity& xi, double t) {
  std::vector<double> row{t};
  auto P = current_momentum(s);
  row.insert(row.end(), P.begin(), P.end());
  MismatchReport g;
  double energy_value = 0.0;
  ScalarField rho = s.psi ? density(*s.psi) : s.state ? s.state->rho : *s.rho;
  if (s.psi) {
    energy_value = energy(*s.psi, *s.potential, xi);
    g = info_metric_g(*s.psi, xi);
  } else if (s.state) {
    energy_value = ensemble_hamiltonian_terms(*s.state, xi).total() + quadrature(multiply(rho, s.potential->values));
    g = info_metric_g(*s.state, xi);
  } else {
    g = info_metric_g_drift(rho, s.drift_grad, xi);
    energy_value = g.h0_term;
  }
  row.push_back(energy_value);
  row.push_back(quadrature(rho));
  row.push_back(entropy(rho));
  row.insert(row.end(), xi.components.begin(), xi.components.end());
  for (double v : {g.g_total, g.constant_term, g.entropy_term, g.h0_term}) row.push_back(v);
  return row;
}

inline void write_walkers(const std::filesystem::path& path, const Ensemble& e) {
  std::vector<std::string> header;
  for (std::size_t A = 0; A < e.dim(); ++A) header.push_back("x_" + std::to_string(A));
  CsvWriter w(path, header);
  for (std::size_t k = 0; k < e.size(); ++k) w.row(e.walker(k));
}

inline void write_snapshot(const std::filesystem::path& dir, const Setup& s, long index, long step, double t) {
  Json side{{"step", step}, {"time", t}, {"grid_points", s.spec->grid_points}};
  if (s.psi) {
    CsvWriter w(dir / snapshot_name("psi", index, ".csv"), {"re", "im"});
    for (const auto& c : s.psi->values) w.row({c.real(), c.imag()});
    side["norm"] = norm(*s.psi);
    write_json(dir / snapshot_name("psi", index, ".json"), side);
  } else if (s.state) {
    CsvWriter w(dir / snapshot_name("state", index, ".csv"), {"rho", "phase"});
    for (std::size_t i = 0; i < s.state->rho.size(); ++i) w.row({s.state->rho[i], s.state->phase[i]});
    side["phase_tilt"] = s.state->phase_tilt;
    write_json(dir / snapshot_name("state", index, ".json"), side);
  } else {
    CsvWriter w(dir / snapshot_name("rho", index, ".csv"), {"rho"});
    for (double v : s.rho->values()) w.row({v});
    if (s.ensemble) {
      write_walkers(dir / snapshot_name("walkers", index, ".csv"), *s.ensemble);
      side["walkers"] = s.ensemble->size();
    }
    write_json(dir / snapshot_name("rho", index, ".json"), side);
  }
}

inline Json manifest(const ExperimentConfig& cfg, const std::string& command) {
  return Json{{"tool", "red"}, {"version", kToolVersion}, {"command", command}, {"seed", cfg.run.seed},
              {"config", to_json(cfg)}};
}

inline void prepare_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

inline void write_error(const std::filesystem::path& dir, const std::string& kind, const std::string& message, long step,
                        double t) {
  write_json(dir / "error.json", Json{{"error", kind}, {"message", message}, {"step", step}, {"time", t}});
}

/// `run`: evolves the configured system. Returns an exit code; ConfigError
/// escapes to the caller (exit code 2).
inline int run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  auto s = build_setup(cfg);
  prepare_directory(dir);
  write_json(dir / "manifest.json", manifest(cfg, "run"));
  const auto& spec = *s.spec;
  const bool fp = cfg.run.evolution == "fokker_planck";
  const double step_dt = fp ? spec.dt : cfg.run.dt_pde;
  const int substeps = fp ? static_cast<int>(std::lround(spec.dt / cfg.run.dt_pde)) : 1;
  const double sub_dt = fp ? spec.dt / substeps : cfg.run.dt_pde;

  CsvWriter obs(dir / "observables.csv", observable_header(spec));
  long step = 0, snap = 0;
  double t = 0.0;
  try {
    auto xi = current_shift(cfg, s);
    auto record = [&] {
      obs.row(observable_row(s, xi, t));
      write_snapshot(dir, s, snap++, step, t);
    };
    record();
    std::optional<SchrodingerPropagator> prop;
    ShiftVelocity prop_shift;
    for (step = 1; step <= cfg.run.steps; ++step) {
      if (s.psi) {
        if (!prop || prop_shift.components != xi.components) {
          prop.emplace(*s.potential, xi, sub_dt);
          prop_shift = xi;
        }
        s.psi = prop->step(*s.psi);
      } else if (s.state) {
        s.state = hamilton_step(*s.state, *s.potential, xi, sub_dt);
      } else {
        for (int k = 0; k < substeps; ++k) s.rho = fokker_planck_drift_step(*s.rho, s.drift_grad, xi, sub_dt);
        if (s.ensemble) s.ensemble = evolve_ensemble(*s.ensemble, *s.drift, xi, 1);
      }
      t = static_cast<double>(step) * step_dt;
      xi = current_shift(cfg, s);
      if (step % cfg.run.snapshot_every == 0 || step == cfg.run.steps) record();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    write_error(dir, "numerical", e.what(), step, t);
    log << "aborted at step " << step << " (t = " << t << "): " << e.what() << "\n";
    return kExitNumerical;
  }
  log << "wrote " << snap << " snapshots to " << dir.string() << "\n";
  return kExitOk;
}

/// `sample`: walker ensemble only; writes walker snapshots and displacement moments.
inline int run_sample(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  if (cfg.run.evolution != "fokker_planck" || cfg.run.ensemble_K == 0)
    throw ConfigError("/run/ensemble_K", "sample needs fokker_planck evolution and ensemble_K >= 1");
  auto s = build_setup(cfg);
  prepare_directory(dir);
  write_json(dir / "manifest.json", manifest(cfg, "sample"));
  const auto& spec = *s.spec;
  const auto initial = *s.ensemble;
  std::vector<std::string> header{"step", "t"};
  for (int A = 0; A < spec.config_dim(); ++A) header.push_back("mean_" + std::to_string(A));
  for (int A = 0; A < spec.config_dim(); ++A) header.push_back("var_" + std::to_string(A));
  CsvWriter moments(dir / "moments.csv", header);
  long step = 0, snap = 0;
  try {
    auto record = [&] {
      auto m = empirical_moments(initial, *s.ensemble);
      std::vector<double> row{static_cast<double>(step), s.ensemble->time};
      row.insert(row.end(), m.mean.begin(), m.mean.end());
      row.insert(row.end(), m.variance.begin(), m.variance.end());
      moments.row(row);
      write_walkers(dir / snapshot_name("walkers", snap++, ".csv"), *s.ensemble);
    };
    record();
    for (step = 1; step <= cfg.run.steps; ++step) {
      auto xi = cfg.shift.mode == "fixed" ? ShiftVelocity{cfg.shift.values} : current_shift(cfg, s);
      s.ensemble = evolve_ensemble(*s.ensemble, *s.drift, xi, 1);
      if (step % cfg.run.snapshot_every == 0 || step == cfg.run.steps) record();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    write_error(dir, "numerical", e.what(), step, s.ensemble->time);
    log << "aborted at step " << step << ": " << e.what() << "\n";
    return kExitNumerical;
  }
  log << "wrote " << snap << " walker snapshots to " << dir.string() << "\n";
  return kExitOk;
}

/// Epistemic state at t = 0 when the configuration determines one with a
/// differentiable phase; wavefunction-only inputs (files, superpositions) do not.
inline std::optional<EpistemicState> initial_epistemic_state(const ExperimentConfig& cfg, const Setup& s) {
  if (s.state) return s.state;
  const auto& spec = s.spec;
  const auto& is = cfg.initial_state;
  if (s.rho) {
    auto phase = phase_from_drift(*s.drift_phi, *s.rho);
    phase *= spec->hbar;
    return EpistemicState::make(*s.rho, phase, detail::scaled(s.drift_tilt, spec->hbar));
  }
  if (!is.file.empty() || is.preset == "two_packet") return std::nullopt;
  if (is.preset == "gaussian_packet") {
    auto st = presets::gaussian_state(spec, is.center, is.sigma, is.boost);
    if (cfg.shift.mode == "zero_constrained") {
      auto P = total_momentum(st);
      auto tilt = st.phase_tilt;
      for (int A = 0; A < spec->config_dim(); ++A)
        tilt[static_cast<std::size_t>(A)] -=
            spec->mass_of_axis(A) * P[static_cast<std::size_t>(spec->spatial_axis_of(A))] / spec->total_mass();
      st = EpistemicState::make(st.rho, st.phase, std::move(tilt));
    }
    return st;
  }
  auto tilt = detail::scaled(is.k, spec->hbar);
  if (cfg.shift.mode == "zero_constrained") std::fill(tilt.begin(), tilt.end(), 0.0);
  return EpistemicState::make(ScalarField(spec, 1.0 / spec->volume()), ScalarField(spec), std::move(tilt));
}

/// `bestmatch`: closed-form and numerical best-matching shifts at t = 0 and
/// the mismatch decomposition at the closed-form shift.
inline int run_bestmatch(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  auto s = build_setup(cfg);
  prepare_directory(dir);
  write_json(dir / "manifest.json", manifest(cfg, "bestmatch"));
  Json out;
  try {
    auto closed = current_shift(ExperimentConfig{cfg.system, {}, {}, ShiftConfig{"best_match", {}}, cfg.run, {}}, s);
    out["closed_form"] = {{"shift", closed.components}};
    auto state = initial_epistemic_state(cfg, s);
    if (state) {
      auto num = best_match(*state, BestMatchMode::numerical);
      out["numerical"] = {{"shift", num.shift.components}, {"iterations", num.iterations}, {"gradient_norm", num.gradient_norm}};
    } else {
      out["numerical"] = nullptr;
      out["numerical_note"] = "initial state has no differentiable phase; closed form only";
    }
    auto g = observable_row(s, closed, 0.0);
    const auto n = g.size();
    out["mismatch"] = {{"g_total", g[n - 4]}, {"constant_term", g[n - 3]}, {"entropy_term", g[n - 2]},
                       {"h0_term", g[n - 1]}, {"shift", closed.components}};
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    write_error(dir, "numerical", e.what(), 0, 0.0);
    log << "bestmatch failed: " << e.what() << "\n";
    return kExitNumerical;
  }
  write_json(dir / "bestmatch.json", out);
  log << "closed-form shift:";
  for (double v : out["closed_form"]["shift"]) log << " " << format_number(v);
  log << "\n";
  return kExitOk;
}

}  // namespace red::harness
