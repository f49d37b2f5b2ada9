#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "red/harness/config.hpp"
#include "red/harness/io.hpp"
#include "red/red.hpp"

// Property-based verification suites. Each suite builds its own small
// system, measures one property and compares against a closed-form or
// independent oracle at a fixed tolerance.

namespace red::harness {

struct Check {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string note;
};

struct SuiteReport {
  std::string suite;
  int criterion = 0;
  std::string title;
  std::vector<Check> checks;
  double runtime_limit = 0.0;  // seconds; 0 = none
  double runtime = 0.0;        // filled in by run_suite, never written to disk

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return !checks.empty();
  }
};

namespace suites {

constexpr double kPi = std::numbers::pi;

inline Check below(std::string name, double measured, double tolerance, std::string note = {}) {
  return {std::move(name), measured, tolerance, std::isfinite(measured) && measured < tolerance, std::move(note)};
}

inline Check at_least(std::string name, double measured, double bound, std::string note = {}) {
  return {std::move(name), measured, bound, std::isfinite(measured) && measured >= bound, std::move(note)};
}

inline SpecPtr grid_spec(int n_particles, int spatial_dim, std::vector<double> masses, double L, int n, double dt = 0.01) {
  SystemSpec s;
  s.n_particles = n_particles;
  s.spatial_dim = spatial_dim;
  s.masses = std::move(masses);
  s.box_length.assign(static_cast<std::size_t>(spatial_dim), L);
  s.grid_points.assign(static_cast<std::size_t>(n_particles * spatial_dim), n);
  s.dt = dt;
  return make_spec(s);
}

// Criterion 1: one-step kernel moments.
inline SuiteReport moments(std::uint64_t seed) {
  SuiteReport r{"moments", 1, "kernel moments", {}, 10.0};
  auto spec = grid_spec(2, 1, {1.0, 2.0}, 10.0, 16, 0.01);
  const std::size_t K = 100000;
  const std::vector<double> slope{3.0, 1.0};
  const double xi = 0.4;
  auto e = Ensemble::at_point(spec, {{5.0, 5.0}}, K, seed);
  auto m = empirical_moments(e, evolve_ensemble(e, DriftPotential::linear(slope), {{xi}}, 1));
  for (std::size_t A = 0; A < 2; ++A) {
    const double mass = spec->masses[A], dt = spec->dt;
    const double mean = spec->hbar * dt / mass * slope[A] - xi * dt;
    const double var = spec->hbar * dt / mass;
    const auto a = std::to_string(A);
    r.checks.push_back(below("mean_" + a + " deviation / SE", std::abs(m.mean[A] - mean) / m.standard_error(A), 5.0));
    r.checks.push_back(below("variance_" + a + " relative error", std::abs(m.variance[A] - var) / var, 0.03));
  }
  const double se_cov = std::sqrt(m.variance[0] * m.variance[1] / static_cast<double>(K));
  r.checks.push_back(below("covariance_01 / SE", std::abs(m.cov(0, 1)) / se_cov, 5.0));
  return r;
}

// Criterion 2: walker histogram, Fokker-Planck density and heat kernel agree.
inline SuiteReport consistency(std::uint64_t seed) {
  SuiteReport r{"consistency", 2, "sampler vs Fokker-Planck vs heat kernel", {}, 60.0};
  const double L = 40.0, c = 20.0, sigma = 1.0, T = 1.0;
  const int cells = 512, bins = 64, per_bin = cells / bins;
  auto spec = grid_spec(1, 1, {1.0}, L, cells, 0.01);
  const int steps = static_cast<int>(std::lround(T / spec->dt));
  const double h = spec->spacing(0), width = per_bin * h;

  auto ens = sample_gaussian(spec, {{c}}, std::vector<double>{sigma}, 100000, seed);
  ens = evolve_ensemble(ens, DriftPotential::constant(1), {{0.0}}, steps);

  auto rho = presets::gaussian_density(spec, std::vector<double>{c}, std::vector<double>{sigma});
  const std::vector<ScalarField> zero_grad{ScalarField(spec)};
  const double dt_pde = 1e-3;
  for (int s = 0; s < static_cast<int>(std::lround(T / dt_pde)); ++s) rho = fokker_planck_drift_step(rho, zero_grad, {{0.0}}, dt_pde);

  // bins hold whole cells, edges half a cell below the nodes
  std::vector<double> walkers(bins, 0.0), fp(bins, 0.0), exact(bins, 0.0);
  for (double x : ens.positions) {
    const int b = static_cast<int>(std::floor(wrap_coordinate(x + 0.5 * h, L) / width)) % bins;
    walkers[static_cast<std::size_t>(b)] += 1.0 / static_cast<double>(ens.size());
  }
  for (int i = 0; i < cells; ++i) fp[static_cast<std::size_t>(i / per_bin)] += rho[static_cast<std::size_t>(i)] * h;
  const double s2 = std::sqrt(2.0 * (sigma * sigma + spec->hbar * T / spec->masses[0]));
  for (int b = 0; b < bins; ++b) {
    const double lo = b * width - 0.5 * h - c, hi = lo + width;
    exact[static_cast<std::size_t>(b)] = 0.5 * (std::erf(hi / s2) - std::erf(lo / s2));
  }
  auto l1 = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
  };
  r.checks.push_back(below("L1(walkers, fokker_planck)", l1(walkers, fp), 0.05));
  r.checks.push_back(below("L1(walkers, heat_kernel)", l1(walkers, exact), 0.05));
  r.checks.push_back(below("L1(fokker_planck, heat_kernel)", l1(fp, exact), 0.05));
  return r;
}

// Criterion 3: Monte-Carlo estimate of G from its defining integral vs the closed form.
inline SuiteReport decomposition(std::uint64_t seed) {
  SuiteReport r{"decomposition", 3, "mismatch decomposition oracle", {}, 60.0};
  const double L = 16.0, c = 8.0, sigma = 1.0, p = 0.5;
  auto spec = grid_spec(1, 3, {1.0}, L, 32, 0.05);
  const std::vector<double> center{c, c, c}, sig{sigma, sigma, sigma}, tilt{p, 0.0, 0.0};
  auto state = presets::gaussian_state(spec, center, sig, tilt);
  // phi = p.x / hbar + sum_a log A(x_a), A the periodized amplitude of the
  // preset, is exactly the drift of this state; the gradient is analytic
  auto log_amp_grad = [=](double x) {
    const double d = minimal_image(x - c, L);
    double num = 0.0, den = 0.0;
    for (int j = -2; j <= 2; ++j) {
      const double y = d - j * L, w = std::exp(-y * y / (4.0 * sigma * sigma));
      num += -y / (2.0 * sigma * sigma) * w;
      den += w;
    }
    return num / den;
  };
  auto drift = DriftPotential::closed_form(
      3,
      [=](std::span<const double> x) {
        double v = p * x[0];
        for (std::size_t a = 0; a < 3; ++a) v += std::log(presets::detail::periodic_gaussian_amplitude(x[a], c, sigma, L));
        return v;
      },
      [=](std::span<const double> x, std::span<double> g) {
        for (std::size_t a = 0; a < 3; ++a) g[a] = (a == 0 ? p : 0.0) + log_amp_grad(x[a]);
      });
  const ShiftVelocity xi{{0.0, 0.0, 0.0}};
  auto closed = info_metric_g(state, xi);
  auto mc = info_metric_g_mc(state, drift, xi, 100000, seed);
  r.checks.push_back(below("|G_mc - G| / SE", std::abs(mc.mean - closed.g_total) / mc.standard_error, 3.0,
                           "G = " + format_number(closed.g_total) + ", G_mc = " + format_number(mc.mean) +
                               " +- " + format_number(mc.standard_error)));
  r.checks.push_back({"constant_term (must equal 15 exactly)", closed.constant_term, 15.0, closed.constant_term == 15.0, {}});
  // 15 + p^2 / 2m + 3 hbar^2 / 8 m sigma^2, with dS/dt = 0 for a linear phase
  r.checks.push_back(below("|G - 15.5|", std::abs(closed.g_total - 15.5), 1e-6));
  return r;
}

inline EpistemicState pair_gaussian(const SpecPtr& spec, std::vector<double> tilt, double wave) {
  auto rho = presets::gaussian_density(spec, std::vector<double>{4.0, 6.0}, std::vector<double>{1.0, 1.2});
  const double L = spec->length_of_axis(0);
  auto phase = ScalarField::from_function(spec, [&](std::span<const double> x) {
    return wave * std::sin(2.0 * kPi * x[0] / L) * std::cos(2.0 * kPi * x[1] / L);
  });
  return EpistemicState::make(std::move(rho), std::move(phase), std::move(tilt));
}

// Criterion 4: closed-form and numerical best matching, stationarity.
inline SuiteReport bestmatch(std::uint64_t) {
  SuiteReport r{"bestmatch", 4, "entropic best matching", {}, 10.0};
  auto spec = grid_spec(2, 1, {1.0, 1.0}, 10.0, 64);
  auto state = pair_gaussian(spec, {0.7, 0.7}, 0.0);
  auto closed = best_match(state, BestMatchMode::closed_form).shift.components[0];
  auto numeric = best_match(state, BestMatchMode::numerical).shift.components[0];
  r.checks.push_back(below("|closed_form - 0.7|", std::abs(closed - 0.7), 1e-10));
  r.checks.push_back(below("|numerical - closed_form| / |closed_form|", std::abs(numeric - closed) / std::abs(closed), 1e-8));
  const double dh = 1e-3;
  const double gp = info_metric_g(state, {{closed + dh}}).g_total, gm = info_metric_g(state, {{closed - dh}}).g_total;
  r.checks.push_back(below("|dG/dxi| at optimum (central difference)", std::abs(gp - gm) / (2.0 * dh), 1e-8));
  return r;
}

// Criterion 5: a Galilean boost of the phase moves the optimum by c and keeps the minimum.
inline SuiteReport boost(std::uint64_t) {
  SuiteReport r{"boost", 5, "boost covariance of best matching", {}, 0.0};
  auto spec = grid_spec(2, 1, {1.0, 2.0}, 10.0, 64);
  const double c = 0.3;
  auto state = pair_gaussian(spec, {0.2, -0.1}, 0.4);
  auto boosted = pair_gaussian(spec, {0.2 + 1.0 * c, -0.1 + 2.0 * c}, 0.4);
  auto a = best_match_shift(state, BestMatchMode::closed_form);
  auto b = best_match_shift(boosted, BestMatchMode::closed_form);
  r.checks.push_back(below("|delta shift - 0.3|", std::abs(b.components[0] - a.components[0] - c), 1e-10));
  r.checks.push_back(
      below("|min G(boosted) - min G|", std::abs(info_metric_g(boosted, b).g_total - info_metric_g(state, a).g_total), 1e-10));
  return r;
}

// Criterion 6: hydrodynamic and wavefunction evolution agree, at second order.
inline SuiteReport madelung(std::uint64_t) {
  SuiteReport r{"madelung", 6, "Madelung equivalence", {}, 120.0};
  const double L = 10.0;
  auto spec = grid_spec(2, 1, {1.0, 1.0}, L, 128);
  auto u = presets::periodic_relational_harmonic(spec, 1.0);
  // sigma = 1.5 keeps min/max of rho near 1e-5: node-free in practice
  auto state0 = presets::gaussian_state(spec, std::vector<double>{4.0, 6.0}, std::vector<double>{1.5, 1.5},
                                        std::vector<double>{2.0 * kPi / L, 0.0});
  const ShiftVelocity xi{{0.0}};
  auto discrepancy = [&](int steps, double dt) {
    auto state = state0;
    auto psi = to_wavefunction(state0);
    SchrodingerPropagator prop(u, xi, dt);
    for (int s = 0; s < steps; ++s) {
      state = hamilton_step(state, u, xi, dt);
      psi = prop.step(psi);
    }
    auto rho = density(psi);
    double worst = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) worst = std::max(worst, std::abs(rho[i] - state.rho[i]));
    return worst;
  };
  const double coarse = discrepancy(100, 1e-3), fine = discrepancy(200, 5e-4);
  r.checks.push_back(below("max |rho_hamilton - rho_schrodinger| (dt 1e-3)", coarse, 1e-3));
  r.checks.push_back(at_least("discrepancy ratio dt / (dt/2)", coarse / fine, 3.0,
                              "fine discrepancy " + format_number(fine)));
  return r;
}

// Criterion 7: relational potentials conserve <P>; Ehrenfest with an external one.
inline SuiteReport conservation(std::uint64_t) {
  SuiteReport r{"conservation", 7, "relational conservation and Ehrenfest", {}, 60.0};
  const double L = 20.0, k = 1.0;
  auto spec = grid_spec(2, 1, {1.0, 1.0}, L, 128);
  const std::vector<double> sigma{1.0, 1.0};
  {
    auto u = presets::relational_harmonic(spec, k);
    auto psi = presets::gaussian_packet(spec, std::vector<double>{8.5, 11.0}, sigma,
                                        std::vector<double>{presets::commensurate_momentum(*spec, 0, 2), 0.0});
    const double P0 = expected_momentum(psi)[0];
    SchrodingerPropagator prop(u, {{0.0}}, 1e-3);
    double worst = 0.0;
    for (int s = 0; s < 1000; ++s) {
      psi = prop.step(psi);
      worst = std::max(worst, std::abs(expected_momentum(psi)[0] - P0));
    }
    r.checks.push_back(below("max_t |<P>(t) - <P>(0)|", worst, 1e-8));
  }
  {
    auto u = presets::external_harmonic(spec, k, std::vector<double>{10.0}, 0);
    auto psi = presets::gaussian_packet(spec, std::vector<double>{8.5, 11.0}, sigma, std::vector<double>{0.0, 0.0});
    SchrodingerPropagator prop(u, {{0.0}}, 1e-3);
    std::vector<WaveField> traj{psi};
    for (int s = 1; s <= 1000; ++s) {
      psi = prop.step(psi);
      if (s % 10 == 0) traj.push_back(psi);
    }
    double worst = 0.0, scale = 0.0;
    for (const auto& row : ehrenfest_diagnostic(traj, u)) {
      worst = std::max(worst, std::abs(row.momentum_rate[0] - row.force[0]));
      scale = std::max(scale, std::abs(row.force[0]));
    }
    r.checks.push_back(below("max |d<P>/dt - F| / max |F|", worst / scale, 1e-4));
  }
  return r;
}

// Criterion 8: <P> = 0 prepared by symmetric opposite boosts stays zero with xi = 0.
inline SuiteReport constraint(std::uint64_t) {
  SuiteReport r{"constraint", 8, "zero total momentum constraint", {}, 0.0};
  const double L = 20.0;
  auto spec = grid_spec(2, 1, {1.0, 1.0}, L, 128);
  const double p = presets::commensurate_momentum(*spec, 0, 3);
  const std::vector<double> centers{9.0, 11.0}, sigma{1.0, 1.0};
  auto psi = presets::two_packet(spec, centers, std::vector<double>{p, p}, centers, std::vector<double>{-p, -p}, sigma);
  auto u = presets::periodic_relational_harmonic(spec, 1.0);
  SchrodingerPropagator prop(u, ShiftVelocity::zero(*spec), 1e-3);
  double worst = std::abs(expected_momentum(psi)[0]);
  for (int s = 0; s < 1000; ++s) {
    psi = prop.step(psi);
    worst = std::max(worst, std::abs(expected_momentum(psi)[0]));
  }
  r.checks.push_back(below("max_t |<P>(t)|", worst, 1e-8));
  return r;
}

// Criterion 9: entropy_rate equals the central difference of S along a free trajectory.
inline SuiteReport entropy_rate_suite(std::uint64_t) {
  SuiteReport r{"entropy_rate", 9, "entropy-rate identity", {}, 0.0};
  auto spec = grid_spec(1, 1, {1.0}, 40.0, 512);
  auto psi = presets::gaussian_packet(spec, std::vector<double>{20.0}, std::vector<double>{1.0}, std::vector<double>{0.0});
  const double h = 0.01, T = 2.0;
  const int n = static_cast<int>(std::lround(T / h));
  SchrodingerPropagator prop(Potential::zero(spec), {{0.0}}, h);
  double s_back = entropy(density(psi));
  psi = prop.step(psi);
  double s_mid = entropy(density(psi)), rate_mid = entropy_rate(psi), worst = 0.0;
  for (int j = 2; j <= n; ++j) {
    psi = prop.step(psi);
    const double s_next = entropy(density(psi));
    const double fd = (s_next - s_back) / (2.0 * h);
    worst = std::max(worst, std::abs(rate_mid - fd) / std::abs(fd));
    s_back = s_mid;
    s_mid = s_next;
    rate_mid = entropy_rate(psi);
  }
  r.checks.push_back(below("max relative |dS/dt - central difference|", worst, 1e-4));
  return r;
}

inline double width_about(const ScalarField& rho, double center) {
  const double L = rho.spec().length_of_axis(0);
  auto f = ScalarField::from_function(rho.spec_ptr(), [&](std::span<const double> x) {
    const double d = minimal_image(x[0] - center, L);
    return d * d;
  });
  return std::sqrt(quadrature(multiply(f, rho)));
}

// Criterion 10: free spreading law and a stationary plane wave.
inline SuiteReport spreading(std::uint64_t) {
  SuiteReport r{"spreading", 10, "free-packet spreading", {}, 0.0};
  {
    auto spec = grid_spec(1, 1, {1.0}, 40.0, 512);
    auto psi = presets::gaussian_packet(spec, std::vector<double>{20.0}, std::vector<double>{1.0}, std::vector<double>{0.0});
    SchrodingerPropagator prop(Potential::zero(spec), {{0.0}}, 0.01);
    double worst = 0.0;
    for (int s = 0; s <= 200; ++s) {
      if (s > 0) psi = prop.step(psi);
      const double t = 0.01 * s;
      // sigma(t) = sigma0 sqrt(1 + (hbar t / 2 m sigma0^2)^2)
      worst = std::max(worst, std::abs(width_about(density(psi), 20.0) - std::sqrt(1.0 + t * t / 4.0)));
    }
    r.checks.push_back(below("max_t |width - sqrt(1 + t^2/4)|", worst, 1e-6));
  }
  {
    const double m = 2.0, L = 10.0;
    auto spec = grid_spec(1, 1, {m}, L, 32);
    const double k = 2.0 * kPi * 3.0 / L;
    auto psi0 = presets::plane_wave(spec, std::vector<double>{k});
    auto psi = psi0;
    SchrodingerPropagator prop(Potential::zero(spec), {{spec->hbar * k / m}}, 0.05);
    double worst = 0.0;
    auto rho0 = density(psi0);
    for (int s = 0; s < 100; ++s) {
      psi = prop.step(psi);
      auto rho = density(psi);
      for (std::size_t i = 0; i < rho.size(); ++i) worst = std::max(worst, std::abs(rho[i] - rho0[i]));
    }
    r.checks.push_back(below("plane wave max |rho(t) - rho(0)|", worst, 1e-12));
  }
  return r;
}

}  // namespace suites

struct SuiteEntry {
  std::string name;
  std::function<SuiteReport(std::uint64_t)> run;
};

inline const std::vector<SuiteEntry>& suite_registry() {
  static const std::vector<SuiteEntry> registry{
      {"moments", suites::moments},           {"consistency", suites::consistency},
      {"decomposition", suites::decomposition}, {"bestmatch", suites::bestmatch},
      {"boost", suites::boost},               {"madelung", suites::madelung},
      {"conservation", suites::conservation}, {"constraint", suites::constraint},
      {"entropy_rate", suites::entropy_rate_suite}, {"spreading", suites::spreading},
  };
  return registry;
}

inline std::vector<std::string> suite_names() {
  std::vector<std::string> names;
  for (const auto& e : suite_registry()) names.push_back(e.name);
  names.push_back("all");
  return names;
}

inline constexpr std::uint64_t kDefaultVerifySeed = 20240917;

/// Runs one suite, turning library errors into a failed check.
inline SuiteReport run_suite(const SuiteEntry& entry, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  SuiteReport r;
  try {
    r = entry.run(seed);
  } catch (const Error& e) {
    r.suite = entry.name;
    r.checks.push_back({"suite raised an error", std::nan(""), 0.0, false, e.what()});
  }
  r.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// Reports for `name` ("all" runs every suite). Unknown names throw ConfigError listing the suites.
inline std::vector<SuiteReport> run_suites(const std::string& name, std::uint64_t seed) {
  std::vector<SuiteReport> out;
  for (const auto& e : suite_registry())
    if (name == "all" || name == e.name) out.push_back(run_suite(e, seed));
  if (out.empty())
    throw ConfigError("/suite", "unknown suite \"" + name + "\"; available: " + detail::list(suite_names()));
  return out;
}

inline Json to_json(const SuiteReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    Json j{{"name", c.name}, {"measured", std::isfinite(c.measured) ? Json(c.measured) : Json(nullptr)},
           {"tolerance", c.tolerance}, {"passed", c.passed}};
    if (!c.note.empty()) j["note"] = c.note;
    checks.push_back(std::move(j));
  }
  return Json{{"suite", r.suite}, {"criterion", r.criterion}, {"title", r.title}, {"passed", r.passed()}, {"checks", checks}};
}

}  // namespace red::harness
