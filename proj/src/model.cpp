#include "xychain/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "xychain/errors.hpp"

namespace xychain::model {

namespace {

bool all_finite(const std::vector<double>& values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

void validate_distribution(const SiteDistribution& dist, const char* name) {
  if (const auto* c = std::get_if<Constant>(&dist)) {
    if (!std::isfinite(c->value)) {
      throw ConfigError(std::string(name) + ": constant value is not finite");
    }
    return;
  }
  const auto& u = std::get<Uniform>(dist);
  if (!std::isfinite(u.lo) || !std::isfinite(u.hi) || !(u.lo < u.hi)) {
    std::ostringstream os;
    os << name << ": uniform distribution requires lo < hi, got [" << u.lo
       << ", " << u.hi << ")";
    throw ConfigError(os.str());
  }
}

void fill(const SiteDistribution& dist, std::vector<double>& out,
          SplitMix64& rng) {
  if (const auto* c = std::get_if<Constant>(&dist)) {
    std::fill(out.begin(), out.end(), c->value);
    return;
  }
  const auto& u = std::get<Uniform>(dist);
  for (double& v : out) v = u.lo + (u.hi - u.lo) * rng.uniform01();
}

double support_sup(const SiteDistribution& dist) {
  if (const auto* c = std::get_if<Constant>(&dist)) return std::abs(c->value);
  const auto& u = std::get<Uniform>(dist);
  return std::max(std::abs(u.lo), std::abs(u.hi));
}

}  // namespace

double coupling_sup(const ChainParams& params) {
  double sup = 0.0;
  for (std::size_t j = 0; j < params.n; ++j) {
    double s = std::abs(params.nu[j]);
    if (j + 1 < params.n) s += std::abs(params.mu[j]) + std::abs(params.gamma[j]);
    sup = std::max(sup, s);
  }
  return sup;
}

void validate(const ChainParams& params, double bound) {
  if (params.n < 1) throw ContractError("ChainParams: need at least one site");
  if (params.nu.size() != params.n || params.mu.size() != params.n - 1 ||
      params.gamma.size() != params.n - 1) {
    throw ContractError("ChainParams: expected n-1 bonds and n fields");
  }
  if (!all_finite(params.mu) || !all_finite(params.gamma) ||
      !all_finite(params.nu)) {
    throw ContractError("ChainParams: non-finite coupling");
  }
  const double sup = coupling_sup(params);
  if (sup > bound) {
    std::ostringstream os;
    os << "ChainParams: sup_j |mu_j|+|gamma_j|+|nu_j| = " << sup
       << " exceeds bound " << bound;
    throw ContractError(os.str());
  }
}

ChainParams make_params(std::vector<double> mu, std::vector<double> gamma,
                        std::vector<double> nu, double bound) {
  ChainParams p{nu.size(), std::move(mu), std::move(gamma), std::move(nu)};
  validate(p, bound);
  return p;
}

DisorderEnsemble DisorderEnsemble::isotropic(SiteDistribution mu,
                                             SiteDistribution nu,
                                             std::uint64_t seed) {
  return DisorderEnsemble{mu, Constant{0.0}, nu, seed, kDefaultCouplingBound};
}

DisorderEnsemble DisorderEnsemble::anisotropic(SiteDistribution mu,
                                               SiteDistribution gamma,
                                               SiteDistribution nu,
                                               std::uint64_t seed) {
  return DisorderEnsemble{mu, gamma, nu, seed, kDefaultCouplingBound};
}

DisorderEnsemble DisorderEnsemble::decoupled(SiteDistribution nu,
                                             std::uint64_t seed) {
  return DisorderEnsemble{Constant{0.0}, Constant{0.0}, nu, seed,
                          kDefaultCouplingBound};
}

bool DisorderEnsemble::deterministic() const {
  return std::holds_alternative<Constant>(mu) &&
         std::holds_alternative<Constant>(gamma) &&
         std::holds_alternative<Constant>(nu);
}

void DisorderEnsemble::validate() const {
  validate_distribution(mu, "mu");
  validate_distribution(gamma, "gamma");
  validate_distribution(nu, "nu");
  if (!(bound > 0.0) || !std::isfinite(bound)) {
    throw ConfigError("coupling bound must be positive and finite");
  }
  const double sup = support_sup(mu) + support_sup(gamma) + support_sup(nu);
  if (sup > bound) {
    std::ostringstream os;
    os << "ensemble support reaches |mu|+|gamma|+|nu| = " << sup << ", over bound " << bound;
    throw ConfigError(os.str());
  }
}

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform01() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t realization,
                          std::uint64_t resample) {
  SplitMix64 a(master_seed);
  SplitMix64 b(a.next() ^ realization);
  SplitMix64 c(b.next() ^ resample);
  return c.next();
}

ChainParams sample_params(const DisorderEnsemble& ensemble, std::size_t n,
                          std::uint64_t realization, std::uint64_t resample) {
  ensemble.validate();
  if (n < 1) throw ContractError("sample_params: need at least one site");
  SplitMix64 rng(derive_seed(ensemble.master_seed, realization, resample));
  ChainParams p;
  p.n = n;
  p.mu.resize(n - 1);
  p.gamma.resize(n - 1);
  p.nu.resize(n);
  fill(ensemble.mu, p.mu, rng);
  fill(ensemble.gamma, p.gamma, rng);
  fill(ensemble.nu, p.nu, rng);
  try {
    validate(p, ensemble.bound);
  } catch (const ContractError& e) {
    throw ConfigError(std::string("ensemble violates coupling bound: ") + e.what());
  }
  return p;
}

EffectiveHamiltonian build_M(const ChainParams& params) {
  validate(params, std::numeric_limits<double>::infinity());
  const auto n = static_cast<Eigen::Index>(params.n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    m(2 * j, 2 * j) = -params.nu[j];
    m(2 * j + 1, 2 * j + 1) = params.nu[j];
  }
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const double mu = params.mu[j];
    const double g = params.gamma[j];
    const Eigen::Index r = 2 * j;
    const Eigen::Index c = 2 * j + 2;
    // mu S(gamma) and its transpose
    m(r, c) = mu;
    m(r, c + 1) = mu * g;
    m(r + 1, c) = -mu * g;
    m(r + 1, c + 1) = -mu;
    m(c, r) = mu;
    m(c + 1, r) = mu * g;
    m(c, r + 1) = -mu * g;
    m(c + 1, r + 1) = -mu;
  }
  return {std::move(m), params.n};
}

BlockForm build_blocks(const ChainParams& params) {
  validate(params, std::numeric_limits<double>::infinity());
  const auto n = static_cast<Eigen::Index>(params.n);
  BlockForm f{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) f.A(j, j) = -params.nu[j];
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    f.A(j, j + 1) = f.A(j + 1, j) = params.mu[j];
    f.B(j, j + 1) = params.gamma[j] * params.mu[j];
    f.B(j + 1, j) = -params.gamma[j] * params.mu[j];
  }
  return f;
}

std::vector<std::size_t> permutation_P(std::size_t n) {
  if (n < 1) throw ContractError("permutation_P: n must be positive");
  std::vector<std::size_t> image(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    image[2 * j] = j;
    image[2 * j + 1] = n + j;
  }
  return image;
}

Eigen::MatrixXd permutation_matrix(std::size_t n) {
  const auto image = permutation_P(n);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (std::size_t a = 0; a < image.size(); ++a) {
    p(static_cast<Eigen::Index>(image[a]), static_cast<Eigen::Index>(a)) = 1.0;
  }
  return p;
}

}  // namespace xychain::model
