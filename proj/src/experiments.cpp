#include "xychain/experiments.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json.hpp"
#include "xychain/errors.hpp"
#include "xychain/linalg.hpp"
#include "xychain/oracle.hpp"
#include "xychain/parallel.hpp"

namespace xychain::experiments {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;
using json = nlohmann::json;
using freefermion::OccupationPattern;
using freefermion::SubInterval;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  }
}

std::uint64_t to_u64(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
    const unsigned long long v = std::stoull(s, &pos, 0);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + s + "'");
  }
}

std::vector<std::size_t> to_size_list(const std::string& s, const std::string& key) {
  std::vector<std::size_t> out;
  for (const auto& item : split(s, ',')) out.push_back(to_u64(item, key));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

bool to_bool(const std::string& s, const std::string& key) {
  const std::string v = lower(s);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

// Reads [section] key=value pairs and rejects anything not in `allowed`.
class Sections {
 public:
  explicit Sections(const pt::ptree& tree) {
    for (const auto& [section, body] : tree) {
      if (body.empty() && !body.data().empty()) {
        throw ConfigError("key '" + section + "' outside of any section");
      }
      for (const auto& [key, value] : body) values_[section + "." + key] = trim(value.data());
    }
  }

  void restrict_to(const std::set<std::string>& allowed) const {
    for (const auto& [key, value] : values_) {
      if (!allowed.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
  }

  std::optional<std::string> get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::string require(const std::string& key) const {
    auto v = get(key);
    if (!v) throw ConfigError("missing config key '" + key + "'");
    return *v;
  }

 private:
  std::map<std::string, std::string> values_;
};

localization::DecayModel parse_model(const std::string& s) {
  const std::string v = lower(s);
  if (v == "exponential") return localization::DecayModel::Exponential;
  if (v == "stretched") return localization::DecayModel::Stretched;
  if (v == "power_law" || v == "powerlaw") return localization::DecayModel::PowerLaw;
  throw ConfigError("correlator.models: unknown model '" + s + "'");
}

bool is_zero_constant(const model::SiteDistribution& d) {
  const auto* c = std::get_if<model::Constant>(&d);
  return c && c->value == 0.0;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

const char* kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::AreaLaw: return "arealaw";
    case ExperimentKind::Correlator: return "correlator";
    case ExperimentKind::Verify: return "verify";
  }
  return "unknown";
}

json distribution_json(const model::SiteDistribution& d) {
  if (const auto* c = std::get_if<model::Constant>(&d)) return {{"constant", c->value}};
  const auto& u = std::get<model::Uniform>(d);
  return {{"uniform", {u.lo, u.hi}}};
}

void write_manifest(const ExperimentConfig& config, const json& tolerances) {
  json m;
  m["kind"] = kind_name(config.kind);
  m["config_hash"] = hex64(fnv1a(config.source));
  m["master_seed"] = config.ensemble.master_seed;
  m["realizations"] = config.realizations;
  m["n"] = config.n_values;
  m["ensemble"] = {{"mu", distribution_json(config.ensemble.mu)},
                   {"gamma", distribution_json(config.ensemble.gamma)},
                   {"nu", distribution_json(config.ensemble.nu)},
                   {"bound", config.ensemble.bound}};
  m["version"] = kVersion;
  m["tolerances"] = tolerances;
  m["timestamp"] = utc_timestamp();
  std::ofstream os(config.output_dir / "manifest.json");
  os << m.dump(2) << '\n';
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  return os;
}

struct MeanErr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanErr mean_stderr(const std::vector<double>& v) {
  MeanErr out;
  if (v.empty()) return out;
  const auto k = static_cast<double>(v.size());
  for (double x : v) out.mean += x;
  out.mean /= k;
  if (v.size() > 1) {
    double var = 0.0;
    for (double x : v) var += (x - out.mean) * (x - out.mean);
    out.stderr_ = std::sqrt(var / (k - 1.0) / k);
  }
  return out;
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t params_digest(const model::ChainParams& params) {
  std::string bytes;
  auto put = [&](double v) {
    char raw[sizeof(double)];
    std::memcpy(raw, &v, sizeof v);
    bytes.append(raw, sizeof raw);
  };
  for (double v : params.mu) put(v);
  for (double v : params.gamma) put(v);
  for (double v : params.nu) put(v);
  return fnv1a(bytes);
}

SubInterval SubintervalSpec::resolve(std::size_t ell, std::size_t n) const {
  switch (policy) {
    case SubintervalPolicy::Centered: return freefermion::centered_subinterval(ell, n);
    case SubintervalPolicy::LeftEdge: return freefermion::make_subinterval(1, ell, n);
    case SubintervalPolicy::Explicit: return freefermion::make_subinterval(r, ell, n);
  }
  throw ContractError("unknown subinterval policy");
}

model::SiteDistribution parse_distribution(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ConfigError("distribution '" + text + "' must be constant:v or uniform:lo,hi");
  }
  const std::string kind = lower(trim(text.substr(0, colon)));
  const auto args = split(text.substr(colon + 1), ',');
  if (kind == "constant" && args.size() == 1) return model::Constant{to_double(args[0], text)};
  if (kind == "uniform" && args.size() == 2) {
    return model::Uniform{to_double(args[0], text), to_double(args[1], text)};
  }
  throw ConfigError("distribution '" + text + "' must be constant:v or uniform:lo,hi");
}

void ExperimentConfig::validate() const {
  ensemble.validate();
  if (realizations < 1) throw ConfigError("experiment.realizations must be >= 1");
  if (workers < 1) throw ConfigError("experiment.workers must be >= 1");
  if (n_values.empty()) throw ConfigError("experiment.n must list at least one size");
  for (std::size_t n : n_values) {
    if (n < 1) throw ConfigError("experiment.n values must be >= 1");
    if (kind == ExperimentKind::Verify && n > oracle::kOracleCap) {
      throw ConfigError("verify runs need n <= " + std::to_string(oracle::kOracleCap));
    }
  }
  if (kind == ExperimentKind::AreaLaw) {
    if (subinterval.ells.empty()) throw ConfigError("subinterval.ell must list at least one length");
    for (std::size_t n : n_values) {
      for (std::size_t ell : subinterval.ells) {
        const std::size_t r = subinterval.policy == SubintervalPolicy::Explicit ? subinterval.r : 1;
        if (ell < 1 || r < 1 || r + ell - 1 > n) {
          throw ConfigError("subinterval ell = " + std::to_string(ell) + " does not fit n = " +
                            std::to_string(n));
        }
      }
    }
    if (const auto* s = std::get_if<freefermion::Sample>(&states); s && s->count < 1) {
      throw ConfigError("states.count must be >= 1");
    }
  }
  if (kind == ExperimentKind::Correlator && models.empty()) {
    throw ConfigError("correlator.models must list at least one model");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  const Sections s(tree);
  s.restrict_to({"experiment.kind", "experiment.n", "experiment.realizations",
                 "experiment.master_seed", "experiment.output_dir", "experiment.workers",
                 "ensemble.preset", "ensemble.mu", "ensemble.gamma", "ensemble.nu",
                 "ensemble.bound", "subinterval.policy", "subinterval.ell", "subinterval.r",
                 "states.strategy", "states.limit", "states.count", "states.greedy",
                 "correlator.models", "correlator.fit_min", "correlator.fit_max",
                 "verify.corrupt_w"});

  ExperimentConfig c;
  c.source = text;
  const std::string kind = lower(s.require("experiment.kind"));
  if (kind == "arealaw") c.kind = ExperimentKind::AreaLaw;
  else if (kind == "correlator") c.kind = ExperimentKind::Correlator;
  else if (kind == "verify") c.kind = ExperimentKind::Verify;
  else throw ConfigError("experiment.kind must be arealaw, correlator or verify");

  c.n_values = to_size_list(s.require("experiment.n"), "experiment.n");
  if (auto v = s.get("experiment.realizations")) c.realizations = to_u64(*v, "experiment.realizations");
  if (auto v = s.get("experiment.output_dir")) c.output_dir = *v;
  if (auto v = s.get("experiment.workers")) c.workers = to_u64(*v, "experiment.workers");
  std::uint64_t seed = 0;
  if (auto v = s.get("experiment.master_seed")) seed = to_u64(*v, "experiment.master_seed");

  auto dist = [&](const std::string& key, model::SiteDistribution fallback) {
    auto v = s.get("ensemble." + key);
    return v ? parse_distribution(*v) : fallback;
  };
  const std::string preset = lower(s.get("ensemble.preset").value_or("custom"));
  auto mu = dist("mu", model::Constant{1.0});
  auto gamma = dist("gamma", model::Constant{0.0});
  auto nu = dist("nu", model::Constant{0.0});
  if (preset == "isotropic") {
    if (!is_zero_constant(gamma)) throw ConfigError("isotropic preset fixes gamma = 0");
    c.ensemble = model::DisorderEnsemble::isotropic(mu, nu, seed);
  } else if (preset == "anisotropic") {
    c.ensemble = model::DisorderEnsemble::anisotropic(mu, gamma, nu, seed);
  } else if (preset == "decoupled") {
    if (s.get("ensemble.mu") && !is_zero_constant(mu)) throw ConfigError("decoupled preset fixes mu = 0");
    c.ensemble = model::DisorderEnsemble::decoupled(nu, seed);
  } else if (preset == "custom") {
    c.ensemble = model::DisorderEnsemble{mu, gamma, nu, seed};
  } else {
    throw ConfigError("ensemble.preset must be isotropic, anisotropic, decoupled or custom");
  }
  if (auto v = s.get("ensemble.bound")) c.ensemble.bound = to_double(*v, "ensemble.bound");

  const std::string policy = lower(s.get("subinterval.policy").value_or("centered"));
  if (policy == "centered") c.subinterval.policy = SubintervalPolicy::Centered;
  else if (policy == "left_edge") c.subinterval.policy = SubintervalPolicy::LeftEdge;
  else if (policy == "explicit") c.subinterval.policy = SubintervalPolicy::Explicit;
  else throw ConfigError("subinterval.policy must be centered, left_edge or explicit");
  if (auto v = s.get("subinterval.ell")) c.subinterval.ells = to_size_list(*v, "subinterval.ell");
  if (auto v = s.get("subinterval.r")) c.subinterval.r = to_u64(*v, "subinterval.r");
  if (c.subinterval.policy == SubintervalPolicy::Explicit && !s.get("subinterval.r")) {
    throw ConfigError("explicit subinterval policy needs subinterval.r");
  }

  const std::string strategy = lower(s.get("states.strategy").value_or("sample"));
  if (strategy == "exhaustive") {
    freefermion::Exhaustive e;
    if (auto v = s.get("states.limit")) e.limit = to_u64(*v, "states.limit");
    c.states = e;
  } else if (strategy == "sample") {
    freefermion::Sample sm;
    if (auto v = s.get("states.count")) sm.count = to_u64(*v, "states.count");
    if (auto v = s.get("states.greedy")) sm.greedy = to_bool(*v, "states.greedy");
    c.states = sm;
  } else {
    throw ConfigError("states.strategy must be exhaustive or sample");
  }

  if (auto v = s.get("correlator.models")) {
    c.models.clear();
    for (const auto& m : split(*v, ',')) c.models.push_back(parse_model(m));
  }
  if (auto v = s.get("correlator.fit_min")) c.fit_min = to_u64(*v, "correlator.fit_min");
  if (auto v = s.get("correlator.fit_max")) c.fit_max = to_u64(*v, "correlator.fit_max");
  if (auto v = s.get("verify.corrupt_w")) c.corrupt_w = to_bool(*v, "verify.corrupt_w");

  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << is.rdbuf();
  return parse_config(text.str());
}

Realization draw_realization(const model::DisorderEnsemble& ensemble, std::size_t n,
                             std::size_t index) {
  for (std::size_t c = 0; c <= kMaxResamplesPerSlot; ++c) {
    Realization out;
    out.params = model::sample_params(ensemble, n, index, c);
    out.decomp = freefermion::bogoliubov_decompose(model::build_M(out.params));
    out.resamples = c;
    out.seed = derive_seed(ensemble.master_seed, index, c);
    if (ensemble.deterministic() || freefermion::check_simple_spectrum(out.decomp)) return out;
  }
  std::ostringstream os;
  os << "realization " << index << " at n = " << n << " stayed degenerate after "
     << kMaxResamplesPerSlot << " resamples";
  throw NumericalError(os.str(), static_cast<double>(kMaxResamplesPerSlot));
}

AreaLawResult run_arealaw(const ExperimentConfig& config) {
  config.validate();
  AreaLawResult result;
  for (std::size_t n : config.n_values) {
    std::vector<std::vector<ExperimentRecord>> slots(config.realizations);
    detail::parallel_for(config.realizations, config.workers, [&](std::size_t idx) {
      const Realization real = draw_realization(config.ensemble, n, idx);
      if (!freefermion::check_simple_spectrum(real.decomp)) {
        std::ostringstream os;
        os << "deterministic ensemble has a degenerate one-particle spectrum at n = " << n
           << "; eigenstates are not labelled by occupation patterns";
        throw NumericalError(os.str(), real.decomp.min_gap);
      }
      const Eigen::MatrixXd q = localization::correlator_sum_bound(real.decomp).Q;
      const std::uint64_t digest = params_digest(real.params);
      const auto ground = OccupationPattern::zeros(n);
      const auto gamma0 = freefermion::correlation_matrix(real.decomp, ground);
      for (std::size_t ell : config.subinterval.ells) {
        const SubInterval sub = config.subinterval.resolve(ell, n);
        freefermion::StateStrategy strategy = config.states;
        if (auto* sm = std::get_if<freefermion::Sample>(&strategy)) {
          sm->seed = derive_seed(real.seed, n, ell);
        }
        const auto search = freefermion::max_entropy_over_states(real.decomp, sub, strategy, q);
        ExperimentRecord rec;
        rec.realization = idx;
        rec.params_digest = digest;
        rec.n = n;
        rec.r = sub.r;
        rec.ell = ell;
        rec.max_entropy = search.max_found;
        rec.bound = search.rigorous_bound;
        rec.gs_entropy = freefermion::entanglement_entropy(freefermion::restrict_to(gamma0, sub));
        rec.min_gap = real.decomp.min_gap;
        rec.resamples = real.resamples;
        slots[idx].push_back(rec);
      }
    });
    for (auto& slot : slots) {
      for (auto& rec : slot) result.records.push_back(rec);
    }
    for (std::size_t ell : config.subinterval.ells) {
      std::vector<double> ent, bnd, gs;
      for (const auto& slot : slots) {
        for (const auto& rec : slot) {
          if (rec.ell != ell) continue;
          ent.push_back(rec.max_entropy);
          bnd.push_back(rec.bound);
          gs.push_back(rec.gs_entropy);
        }
      }
      SummaryRow row;
      row.n = n;
      row.ell = ell;
      row.count = ent.size();
      const auto e = mean_stderr(ent), b = mean_stderr(bnd), g = mean_stderr(gs);
      row.max_entropy_mean = e.mean;
      row.max_entropy_stderr = e.stderr_;
      row.bound_mean = b.mean;
      row.bound_stderr = b.stderr_;
      row.gs_entropy_mean = g.mean;
      row.gs_entropy_stderr = g.stderr_;
      result.summary.push_back(row);
    }
  }
  for (const auto& rec : result.records) {
    if (rec.max_entropy > rec.bound) ++result.bound_violations;
  }
  // One resample count per (n, realization) slot.
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& rec : result.records) {
    if (seen.insert({rec.n, rec.realization}).second) result.total_resamples += rec.resamples;
  }
  return result;
}

std::vector<CorrelatorRun> run_correlator(const ExperimentConfig& config) {
  config.validate();
  std::vector<CorrelatorRun> runs;
  for (std::size_t n : config.n_values) {
    CorrelatorRun run;
    run.n = n;
    run.correlator = localization::ensemble_correlator(config.ensemble, n, config.realizations,
                                                       config.workers);
    try {
      run.fits = localization::fit_decay(run.correlator.profile.q_mean, config.models,
                                         config.fit_min, config.fit_max);
    } catch (const ContractError& e) {
      run.fit_error = e.what();
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

bool VerifyReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass(); });
}

std::string VerifyReport::first_failure() const {
  for (const auto& c : checks) {
    if (!c.pass()) return c.name;
  }
  return {};
}

VerifyReport run_verify(const ExperimentConfig& config) {
  config.validate();
  constexpr std::size_t kPatternCap = 64;
  constexpr std::size_t kWickTuples = 20;
  constexpr std::size_t kLocalJwMaxN = 6;

  std::map<std::string, CheckResult> worst;
  const std::vector<std::pair<std::string, double>> order = {
      {"quadratic_form", oracle::kQuadraticFormTolerance},
      {"spectrum_match", oracle::kSpectrumMatchTolerance},
      {"jordan_wigner_car", oracle::kCarTolerance},
      {"bogoliubov", freefermion::kBogoliubovTolerance},
      {"b_ops_car", 1e-10},
      {"b_ops_hamiltonian", 1e-9},
      {"number_commutator", 1e-9},
      {"correlation", 1e-8},
      {"projection", freefermion::kProjectionTolerance},
      {"restricted_entropy", 1e-7},
      {"local_jordan_wigner", 1e-8},
      {"wick", oracle::kWickTolerance},
      {"wick_odd", 1e-12},
      {"trace_identity", 1e-10},
  };
  for (const auto& [name, tol] : order) worst[name] = {name, 0.0, tol};
  auto record = [&](const std::string& name, double r) {
    auto& c = worst.at(name);
    c.residual = std::max(c.residual, std::isfinite(r) ? r : 1e300);
  };

  for (std::size_t n : config.n_values) {
    for (std::size_t idx = 0; idx < config.realizations; ++idx) {
      const Realization real = draw_realization(config.ensemble, n, idx);
      const auto& p = real.params;
      const auto h = oracle::build_H(p);
      const double h_max = linalg::max_abs(h.matrix.cwiseAbs());
      const double rel = h_max > 0.0 ? h_max : 1.0;
      const auto m = model::build_M(p);

      record("quadratic_form", oracle::verify_quadratic_form(p) / rel);
      record("spectrum_match", oracle::match_spectra(p) / std::max(1.0, h_max));

      const auto c_ops = oracle::jordan_wigner(n);
      record("jordan_wigner_car", oracle::car_residual(c_ops));

      Eigen::MatrixXd w = real.decomp.W;
      if (config.corrupt_w) w.row(0) *= -1.0;
      const auto br = freefermion::bogoliubov_residuals(w, real.decomp.lambdas, m);
      record("bogoliubov", std::max({br.orthogonality, br.bogoliubov, br.diagonalization}));

      auto decomp = real.decomp;
      decomp.W = w;
      const auto b_ops = oracle::bogoliubov_b_ops(decomp, c_ops);
      record("b_ops_car", oracle::car_residual(b_ops));
      record("b_ops_hamiltonian",
             oracle::bogoliubov_hamiltonian_residual(h, b_ops, decomp.lambdas) / std::max(1.0, h_max));
      record("number_commutator", oracle::number_commutator_residual(h, b_ops) / std::max(1.0, h_max));

      model::SplitMix64 rng(derive_seed(real.seed, n, 0x5eed));
      std::vector<double> eta(n);
      for (auto& e : eta) e = 0.05 + 0.9 * rng.uniform01();
      record("trace_identity", oracle::trace_identity_residual(eta));

      if (!freefermion::check_simple_spectrum(real.decomp)) continue;  // deterministic, degenerate

      const auto spectrum = oracle::exact_spectrum(h);
      const std::size_t total = std::size_t{1} << n;
      const std::size_t stride = std::max<std::size_t>(1, total / kPatternCap);
      for (std::size_t a = 0; a < total; a += stride) {
        const auto alpha = OccupationPattern::from_index(n, a);
        std::size_t state = 0;
        try {
          state = oracle::state_index_for_energy(spectrum, freefermion::many_body_energy(real.decomp, alpha),
                                                 oracle::kDegeneracyTolerance * std::max(1.0, h_max));
        } catch (const ContractError&) {
          continue;  // many-body level degenerate: eigenvector not pinned
        }
        const Eigen::VectorXcd psi = spectrum.states.col(static_cast<Eigen::Index>(state));
        const auto g_free = freefermion::correlation_matrix(real.decomp, alpha);
        const auto g_exact = oracle::correlation_from_pure_state(psi, c_ops);
        record("correlation", linalg::max_abs(g_free.matrix - g_exact.matrix));
        record("projection", linalg::max_abs(g_free.matrix * g_free.matrix - g_free.matrix));

        for (std::size_t r = 1; r <= n; ++r) {
          for (std::size_t ell = 1; r + ell - 1 <= n; ++ell) {
            const auto sub = freefermion::make_subinterval(r, ell, n);
            const double s_free = freefermion::entanglement_entropy(freefermion::restrict_to(g_free, sub));
            const double s_exact = oracle::von_neumann_entropy(oracle::reduced_state(psi, n, sub));
            record("restricted_entropy", std::abs(s_free - s_exact));
            if (n <= kLocalJwMaxN) record("local_jordan_wigner", oracle::local_correlation_residual(psi, n, sub));
          }
        }

        std::vector<std::vector<std::size_t>> tuples;
        const std::size_t lengths[] = {2, 3, 4, 6};
        for (std::size_t t = 0; t < kWickTuples / 4; ++t) {
          for (std::size_t len : lengths) {
            std::vector<std::size_t> tuple(len);
            for (auto& op : tuple) op = rng.next() % (2 * n);
            tuples.push_back(std::move(tuple));
          }
        }
        const auto wick = oracle::wick_check(psi, c_ops, tuples);
        record("wick", wick.max_residual);
        record("wick_odd", wick.max_odd_expectation);
      }
    }
  }
  VerifyReport report;
  for (const auto& [name, tol] : order) report.checks.push_back(worst.at(name));
  return report;
}

void write_records_csv(std::ostream& os, const std::vector<ExperimentRecord>& records) {
  os << "realization,n,r,ell,max_entropy,bound,gs_entropy,min_gap,resampled\n";
  os << std::setprecision(17);
  for (const auto& rec : records) {
    os << rec.realization << ',' << rec.n << ',' << rec.r << ',' << rec.ell << ','
       << rec.max_entropy << ',' << rec.bound << ',' << rec.gs_entropy << ',' << rec.min_gap
       << ',' << (rec.resampled() ? 1 : 0) << '\n';
  }
}

void write_arealaw_outputs(const ExperimentConfig& config, const AreaLawResult& result) {
  fs::create_directories(config.output_dir);
  {
    auto os = open_output(config.output_dir / "records.csv");
    write_records_csv(os, result.records);
  }
  json summary = json::object();
  for (const auto& row : result.summary) {
    const std::string key = "n=" + std::to_string(row.n) + ",ell=" + std::to_string(row.ell);
    summary[key] = {{"n", row.n},
                    {"ell", row.ell},
                    {"count", row.count},
                    {"max_entropy_mean", row.max_entropy_mean},
                    {"max_entropy_stderr", row.max_entropy_stderr},
                    {"bound_mean", row.bound_mean},
                    {"bound_stderr", row.bound_stderr},
                    {"gs_entropy_mean", row.gs_entropy_mean},
                    {"gs_entropy_stderr", row.gs_entropy_stderr}};
  }
  json doc = {{"summary", summary},
              {"total_resamples", result.total_resamples},
              {"bound_violations", result.bound_violations}};
  auto os = open_output(config.output_dir / "summary.json");
  os << doc.dump(2) << '\n';
  write_manifest(config, {{"bogoliubov", freefermion::kBogoliubovTolerance},
                          {"entropy_window", freefermion::kEntropyWindow},
                          {"pairing", freefermion::kPairingTolerance},
                          {"projection", freefermion::kProjectionTolerance}});
}

void write_correlator_outputs(const ExperimentConfig& config, const std::vector<CorrelatorRun>& runs) {
  fs::create_directories(config.output_dir);
  json fits = json::object();
  for (const auto& run : runs) {
    {
      auto os = open_output(config.output_dir / ("profile_n" + std::to_string(run.n) + ".csv"));
      localization::write_profile_csv(os, run.correlator.profile);
    }
    json entry = {{"realizations", run.correlator.realizations},
                  {"resamples", run.correlator.resamples}};
    json list = json::array();
    for (const auto& f : run.fits) {
      list.push_back({{"model", localization::to_string(f.model)},
                      {"C", f.C},
                      {"eta", f.eta},
                      {"xi", f.xi},
                      {"beta", f.beta},
                      {"residual", f.residual},
                      {"rate_stderr", f.rate_stderr},
                      {"rate_lower95", f.rate_lower95},
                      {"d_min", f.d_min},
                      {"d_max", f.d_max},
                      {"points", f.points},
                      {"verdict", f.verdict}});
    }
    entry["fits"] = list;
    if (!run.fit_error.empty()) entry["fit_error"] = run.fit_error;
    fits["n=" + std::to_string(run.n)] = entry;
  }
  auto os = open_output(config.output_dir / "fits.json");
  os << fits.dump(2) << '\n';
  write_manifest(config, {{"fit_floor", localization::kFitFloor},
                          {"min_fit_points", localization::kMinFitPoints},
                          {"bogoliubov", freefermion::kBogoliubovTolerance}});
}

void write_verify_outputs(const ExperimentConfig& config, const VerifyReport& report) {
  fs::create_directories(config.output_dir);
  json checks = json::array();
  json tolerances = json::object();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name}, {"residual", c.residual}, {"tolerance", c.tolerance}, {"pass", c.pass()}});
    tolerances[c.name] = c.tolerance;
  }
  auto os = open_output(config.output_dir / "verify.json");
  os << json{{"pass", report.pass()}, {"checks", checks}}.dump(2) << '\n';
  write_manifest(config, tolerances);
}

}  // namespace xychain::experiments
