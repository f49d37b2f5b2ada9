#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "red/harness/config.hpp"
#include "red/harness/experiment.hpp"
#include "red/harness/suites.hpp"

using namespace red::harness;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
  auto* opt = cmd->add_option("--config", c.config, "experiment configuration (JSON)");
  if (needs_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "RNG seed, overrides run.seed");
  cmd->add_option("--out", c.out, "output directory, overrides outputs.directory");
}

ExperimentConfig load(const Common& c) {
  auto cfg = load_config(c.config);
  if (c.seed) cfg.run.seed = *c.seed;
  if (!c.out.empty()) cfg.output_directory = c.out;
  return cfg;
}

void print_config_error(const red::ConfigError& e) {
  std::cerr << "config error:\n";
  for (const auto& i : e.issues()) std::cerr << "  " << i.path << ": " << i.message << "\n";
}

int verify(const std::string& suite, const Common& c) {
  const auto seed = c.seed.value_or(kDefaultVerifySeed);
  auto reports = run_suites(suite, seed);
  Json all = Json::array();
  bool ok = true;
  for (const auto& r : reports) {
    std::cout << (r.passed() ? "PASS " : "FAIL ") << r.suite << "\n";
    for (const auto& ch : r.checks)
      std::cout << "  " << (ch.passed ? "ok   " : "FAIL ") << ch.name << ": " << format_number(ch.measured)
                << " (tolerance " << format_number(ch.tolerance) << ")" << (ch.note.empty() ? "" : "  " + ch.note) << "\n";
    ok = ok && r.passed();
    all.push_back(to_json(r));
  }
  Json report{{"seed", seed}, {"passed", ok}, {"suites", all}};
  if (!c.out.empty()) {
    prepare_directory(c.out);
    write_json(std::filesystem::path(c.out) / "verify.json", report);
  } else {
    std::cout << report.dump(2) << "\n";
  }
  return ok ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relational entropic dynamics: run, sample, best-match and verify"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Common run_opts, sample_opts, bm_opts, verify_opts;
  auto* run = app.add_subcommand("run", "evolve a configured system and write observables and snapshots");
  add_common(run, run_opts, true);
  auto* sample = app.add_subcommand("sample", "evolve the walker ensemble only");
  add_common(sample, sample_opts, true);
  auto* bm = app.add_subcommand("bestmatch", "best-matching shift and mismatch report for the initial state");
  add_common(bm, bm_opts, true);
  auto* ver = app.add_subcommand("verify", "run a verification suite");
  std::string suite;
  ver->add_option("suite", suite, "suite name or 'all'")->required();
  ver->add_option("--seed", verify_opts.seed, "seed for the Monte-Carlo suites");
  ver->add_option("--out", verify_opts.out, "write verify.json here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*ver) return verify(suite, verify_opts);
    if (*run) {
      auto cfg = load(run_opts);
      return run_experiment(cfg, cfg.output_directory, std::cout);
    }
    if (*sample) {
      auto cfg = load(sample_opts);
      return run_sample(cfg, cfg.output_directory, std::cout);
    }
    auto cfg = load(bm_opts);
    return run_bestmatch(cfg, cfg.output_directory, std::cout);
  } catch (const red::ConfigError& e) {
    print_config_error(e);
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
