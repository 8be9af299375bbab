// Command-line driver for the area-law, correlator and verify experiments.
//
//   xychain arealaw    --config configs/arealaw.ini [--out DIR] [--seed S] [--realizations K]
//   xychain correlator --config configs/correlator.ini
//   xychain verify     --config configs/verify.ini
//
// Exit status: 0 success, 1 contract or numerical violation, 2 bad configuration.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "xychain/errors.hpp"
#include "xychain/experiments.hpp"

namespace {

using namespace xychain;

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> realizations;
};

void add_common(CLI::App* cmd, Options& opts) {
  cmd->add_option("--config", opts.config, "INI experiment config")->required();
  cmd->add_option("--out", opts.out, "output directory (overrides config)");
  cmd->add_option("--seed", opts.seed, "master seed (overrides config)");
  cmd->add_option("--realizations", opts.realizations, "realization count (overrides config)");
}

experiments::ExperimentConfig load(const Options& opts, experiments::ExperimentKind kind) {
  auto config = experiments::load_config(opts.config);
  if (config.kind != kind) throw ConfigError("config kind does not match the subcommand");
  if (opts.out) config.output_dir = *opts.out;
  if (opts.seed) config.ensemble.master_seed = *opts.seed;
  if (opts.realizations) config.realizations = *opts.realizations;
  config.validate();
  return config;
}

int run_arealaw(const Options& opts) {
  const auto config = load(opts, experiments::ExperimentKind::AreaLaw);
  const auto result = experiments::run_arealaw(config);
  experiments::write_arealaw_outputs(config, result);
  for (const auto& row : result.summary) {
    std::cout << "n=" << row.n << " ell=" << row.ell << "  E[max entropy]=" << row.max_entropy_mean
              << " +- " << row.max_entropy_stderr << "  E[bound]=" << row.bound_mean
              << "  E[gs entropy]=" << row.gs_entropy_mean << '\n';
  }
  std::cout << "resamples: " << result.total_resamples << "\n"
            << "wrote " << config.output_dir.string() << '\n';
  if (result.bound_violations > 0) {
    std::cerr << "contract violation: " << result.bound_violations
              << " records exceed the rigorous bound\n";
    return 1;
  }
  return 0;
}

int run_correlator(const Options& opts) {
  const auto config = load(opts, experiments::ExperimentKind::Correlator);
  const auto runs = experiments::run_correlator(config);
  experiments::write_correlator_outputs(config, runs);
  for (const auto& run : runs) {
    std::cout << "n=" << run.n << " resamples=" << run.correlator.resamples << '\n';
    if (!run.fit_error.empty()) std::cout << "  fit skipped: " << run.fit_error << '\n';
    for (const auto& f : run.fits) {
      std::cout << "  " << localization::to_string(f.model) << ": C=" << f.C << " eta=" << f.eta
                << " xi=" << f.xi << " beta=" << f.beta << " residual=" << f.residual
                << " lower95=" << f.rate_lower95 << " verdict=" << (f.verdict ? "yes" : "no") << '\n';
    }
  }
  std::cout << "wrote " << config.output_dir.string() << '\n';
  return 0;
}

int run_verify(const Options& opts) {
  const auto config = load(opts, experiments::ExperimentKind::Verify);
  const auto report = experiments::run_verify(config);
  experiments::write_verify_outputs(config, report);
  for (const auto& c : report.checks) {
    std::cout << (c.pass() ? "ok   " : "FAIL ") << c.name << "  residual=" << c.residual
              << "  tolerance=" << c.tolerance << '\n';
  }
  if (!report.pass()) {
    std::cerr << "contract violation: check '" << report.first_failure() << "' failed\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disordered XY chain: area-law and localization experiments"};
  app.require_subcommand(1);
  Options arealaw, correlator, verify;
  auto* a = app.add_subcommand("arealaw", "maximal eigenstate entanglement vs subinterval length");
  auto* c = app.add_subcommand("correlator", "disorder-averaged eigenfunction correlator and decay fits");
  auto* v = app.add_subcommand("verify", "cross-check the free-fermion pipeline against exact diagonalization");
  add_common(a, arealaw);
  add_common(c, correlator);
  add_common(v, verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*a) return run_arealaw(arealaw);
    if (*c) return run_correlator(correlator);
    return run_verify(verify);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const ContractError& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
