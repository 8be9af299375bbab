#pragma once

// Chain parameters, disorder ensembles and the effective one-particle
// Hamiltonian of the open XY chain
//
//   H = - sum_j mu_j [(1+gamma_j) X_j X_{j+1} + (1-gamma_j) Y_j Y_{j+1}]
//       - sum_j nu_j Z_j .

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace xychain::model {

inline constexpr double kDefaultCouplingBound = 100.0;

/// Couplings of an n-site open chain. mu and gamma have n-1 entries, nu has n.
struct ChainParams {
  std::size_t n = 0;
  std::vector<double> mu;
  std::vector<double> gamma;
  std::vector<double> nu;
};

/// sup_j (|mu_j| + |gamma_j| + |nu_j|), with missing bonds counted as zero.
double coupling_sup(const ChainParams& params);

/// Throws ContractError unless the sequence lengths match, every value is
/// finite and coupling_sup(params) <= bound.
void validate(const ChainParams& params, double bound = kDefaultCouplingBound);

ChainParams make_params(std::vector<double> mu, std::vector<double> gamma,
                        std::vector<double> nu,
                        double bound = kDefaultCouplingBound);

struct Constant {
  double value = 0.0;
};

/// Uniform on [lo, hi).
struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

using SiteDistribution = std::variant<Constant, Uniform>;

struct DisorderEnsemble {
  SiteDistribution mu = Constant{1.0};
  SiteDistribution gamma = Constant{0.0};
  SiteDistribution nu = Constant{0.0};
  std::uint64_t master_seed = 0;
  double bound = kDefaultCouplingBound;

  /// gamma is pinned to zero: the Anderson-model case.
  static DisorderEnsemble isotropic(SiteDistribution mu, SiteDistribution nu,
                                    std::uint64_t seed);
  static DisorderEnsemble anisotropic(SiteDistribution mu,
                                      SiteDistribution gamma,
                                      SiteDistribution nu, std::uint64_t seed);
  /// mu pinned to zero: sites do not interact.
  static DisorderEnsemble decoupled(SiteDistribution nu, std::uint64_t seed);

  /// True when every component is Constant, so resampling cannot change
  /// a realization.
  bool deterministic() const;

  /// Throws ConfigError on Uniform with lo >= hi or non-finite values.
  void validate() const;
};

// SplitMix64 (Steele, Lea, Flood 2014). Increment 0x9E3779B97F4A7C15,
// finalizer multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB,
// shifts 30/27/31. Seeded with 1234567 the first output is
// 6457827717110365317.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next();

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform01();

 private:
  std::uint64_t state_;
};

/// Chained SplitMix64 steps over (master_seed, realization, resample).
/// For fixed (master_seed, realization) the map resample -> seed is a
/// bijection.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t realization,
                          std::uint64_t resample);

/// Pure function of (ensemble, n, realization, resample). Random components
/// are drawn from one SplitMix64 stream in the order mu, gamma, nu, each in
/// site order.
ChainParams sample_params(const DisorderEnsemble& ensemble, std::size_t n,
                          std::uint64_t realization,
                          std::uint64_t resample = 0);

/// The 2n x 2n symmetric block-Jacobi matrix M with diagonal blocks
/// -nu_j diag(1,-1) and upper blocks mu_j [[1, gamma_j], [-gamma_j, -1]].
struct EffectiveHamiltonian {
  Eigen::MatrixXd matrix;
  std::size_t n = 0;
};

EffectiveHamiltonian build_M(const ChainParams& params);

/// A: tridiagonal, diagonal -nu, off-diagonal mu.
/// B: antisymmetric, B(j,j+1) = gamma_j mu_j.
struct BlockForm {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
};

BlockForm build_blocks(const ChainParams& params);

/// Zero-based images of the permutation P: basis vector e_{2j} goes to e_j
/// and e_{2j+1} goes to e_{n+j}. Conjugation P M P^t sorts the interleaved
/// (c, c*) ordering into (c..., c*...).
std::vector<std::size_t> permutation_P(std::size_t n);

Eigen::MatrixXd permutation_matrix(std::size_t n);

}  // namespace xychain::model
