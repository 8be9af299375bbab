#pragma once

// Monte Carlo drivers: area-law saturation, correlator decay and oracle
// verification runs, configured from an INI file and written to an output
// directory as CSV and JSON.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "xychain/freefermion.hpp"
#include "xychain/localization.hpp"
#include "xychain/model.hpp"

namespace xychain::experiments {

using model::derive_seed;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr std::size_t kMaxResamplesPerSlot = 100;

enum class ExperimentKind { AreaLaw, Correlator, Verify };

enum class SubintervalPolicy { Centered, LeftEdge, Explicit };

struct SubintervalSpec {
  SubintervalPolicy policy = SubintervalPolicy::Centered;
  std::vector<std::size_t> ells;
  std::size_t r = 1;  // Explicit only

  freefermion::SubInterval resolve(std::size_t ell, std::size_t n) const;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::AreaLaw;
  model::DisorderEnsemble ensemble;
  std::vector<std::size_t> n_values;
  SubintervalSpec subinterval;
  /// Sample.seed is ignored: each search draws its own seed from the
  /// realization seed.
  freefermion::StateStrategy states = freefermion::Sample{};
  std::size_t realizations = 1;
  std::size_t workers = 1;
  std::filesystem::path output_dir = "out";

  std::vector<localization::DecayModel> models = {
      localization::DecayModel::Exponential, localization::DecayModel::PowerLaw};
  std::size_t fit_min = 3;
  std::size_t fit_max = 0;

  /// Verify only: flip the sign of one row of W before the Bogoliubov check.
  bool corrupt_w = false;

  /// Raw text the config was parsed from; hashed into the manifest.
  std::string source;

  /// Throws ConfigError on any inconsistency.
  void validate() const;
};

/// INI sections [experiment], [ensemble], [subinterval], [states],
/// [correlator], [verify]; see configs/ for annotated examples.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parses "constant:v" or "uniform:lo,hi".
model::SiteDistribution parse_distribution(const std::string& text);

struct ExperimentRecord {
  std::size_t realization = 0;
  std::uint64_t params_digest = 0;
  std::size_t n = 0;
  std::size_t r = 0;
  std::size_t ell = 0;
  double max_entropy = 0.0;
  double bound = 0.0;
  double gs_entropy = 0.0;
  double min_gap = 0.0;
  std::size_t resamples = 0;

  bool resampled() const { return resamples > 0; }
};

struct SummaryRow {
  std::size_t n = 0;
  std::size_t ell = 0;
  std::size_t count = 0;
  double max_entropy_mean = 0.0;
  double max_entropy_stderr = 0.0;
  double bound_mean = 0.0;
  double bound_stderr = 0.0;
  double gs_entropy_mean = 0.0;
  double gs_entropy_stderr = 0.0;
};

struct AreaLawResult {
  std::vector<ExperimentRecord> records;  // sorted by (n, realization, ell)
  std::vector<SummaryRow> summary;
  std::size_t total_resamples = 0;
  /// Records with max_entropy > bound; empty on a healthy run.
  std::size_t bound_violations = 0;
};

/// Draws realization (index) of the ensemble at size n, resampling while
/// the one-particle spectrum is degenerate. Deterministic ensembles are
/// never resampled. Throws NumericalError after kMaxResamplesPerSlot.
struct Realization {
  model::ChainParams params;
  freefermion::BogoliubovDecomposition decomp;
  std::size_t resamples = 0;
  std::uint64_t seed = 0;
};
Realization draw_realization(const model::DisorderEnsemble& ensemble, std::size_t n,
                             std::size_t index);

/// FNV-1a over the bit patterns of all couplings.
std::uint64_t params_digest(const model::ChainParams& params);

AreaLawResult run_arealaw(const ExperimentConfig& config);

struct CorrelatorRun {
  std::size_t n = 0;
  localization::EnsembleCorrelator correlator;
  std::vector<localization::DecayFit> fits;
  std::string fit_error;  // set when the profile is too short to fit
};

std::vector<CorrelatorRun> run_correlator(const ExperimentConfig& config);

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass() const { return residual <= tolerance; }
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool pass() const;
  /// Name of the first failing check, empty when all pass.
  std::string first_failure() const;
};

VerifyReport run_verify(const ExperimentConfig& config);

void write_records_csv(std::ostream& os, const std::vector<ExperimentRecord>& records);

/// Writers below create config.output_dir. Only manifest.json carries a
/// timestamp; every other file is a pure function of the config.
void write_arealaw_outputs(const ExperimentConfig& config, const AreaLawResult& result);
void write_correlator_outputs(const ExperimentConfig& config,
                              const std::vector<CorrelatorRun>& runs);
void write_verify_outputs(const ExperimentConfig& config, const VerifyReport& report);

/// FNV-1a 64 of a byte string.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace xychain::experiments
