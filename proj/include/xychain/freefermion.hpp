#pragma once

// Bogoliubov diagonalization of M and the eigenstate correlation matrices
// built from it. Correlation matrices use the interleaved ordering
// (c_1, c_1*, ..., c_n, c_n*): entry (2j, 2k) is <c_j c_k*>, (2j, 2k+1) is
// <c_j c_k>, with zero-based site indices.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "xychain/model.hpp"

namespace xychain::freefermion {

inline constexpr double kBogoliubovTolerance = 1e-9;
inline constexpr double kProjectionTolerance = 1e-9;
inline constexpr double kEntropyWindow = 1e-8;
inline constexpr double kPairingTolerance = 1e-7;
inline constexpr std::size_t kDefaultExhaustiveLimit = 4096;

/// W M W^t = (+) diag(lambda_j, -lambda_j), W = P^t What P with
/// What = 1/2 [[V+U, V-U], [V-U, V+U]] built from the SVD U (A+B) V^t = Lambda.
struct BogoliubovDecomposition {
  std::size_t n = 0;
  Eigen::VectorXd lambdas;  // ascending, >= 0
  Eigen::MatrixXd W;
  Eigen::MatrixXd U;
  Eigen::MatrixXd V;
  /// min(lambda_1, min_j lambda_{j+1} - lambda_j)
  double min_gap = 0.0;
};

struct BogoliubovResiduals {
  double orthogonality = 0.0;     // |W W^t - I|_max
  double bogoliubov = 0.0;        // |W J W^t - J|_max
  double diagonalization = 0.0;   // |W M W^t - D|_max / max(1, |M|_max)

  bool ok() const {
    return orthogonality <= kBogoliubovTolerance &&
           bogoliubov <= kBogoliubovTolerance &&
           diagonalization <= kBogoliubovTolerance;
  }
};

/// J = sigma_X (+) ... (+) sigma_X, 2n x 2n.
Eigen::MatrixXd particle_hole_J(std::size_t n);

BogoliubovResiduals bogoliubov_residuals(const Eigen::MatrixXd& W,
                                         const Eigen::VectorXd& lambdas,
                                         const model::EffectiveHamiltonian& M);

/// Throws NumericalError carrying the worst residual if any invariant fails.
BogoliubovDecomposition bogoliubov_decompose(const model::EffectiveHamiltonian& M);

double default_gap_threshold(const BogoliubovDecomposition& decomp);

/// Passes iff min_gap exceeds the threshold (default 1e-12 max(1, lambda_n)).
/// A failure means the realization should be resampled.
bool check_simple_spectrum(const BogoliubovDecomposition& decomp,
                           std::optional<double> gap_threshold = std::nullopt);

/// Occupation of the Bogoliubov modes, bit j <-> lambda_{j+1}.
struct OccupationPattern {
  std::vector<std::uint8_t> bits;

  static OccupationPattern zeros(std::size_t n);
  /// Bit j is (index >> j) & 1.
  static OccupationPattern from_index(std::size_t n, std::uint64_t index);

  std::size_t size() const { return bits.size(); }
  OccupationPattern complement() const;
  bool operator==(const OccupationPattern&) const = default;
};

/// E_alpha = sum_{alpha_j=1} lambda_j - sum_{alpha_j=0} lambda_j.
double many_body_energy(const BogoliubovDecomposition& decomp,
                        const OccupationPattern& alpha);

struct CorrelationMatrix {
  Eigen::MatrixXd matrix;

  std::size_t sites() const { return static_cast<std::size_t>(matrix.rows() / 2); }
};

/// Connected block {r, ..., r+ell-1} of the chain, r one-based.
struct SubInterval {
  std::size_t r = 1;
  std::size_t ell = 1;

  std::size_t first() const { return r - 1; }     // zero-based
  std::size_t last() const { return r + ell - 2; } // zero-based, inclusive
  bool contains(std::size_t site) const { return site >= first() && site <= last(); }
};

/// Throws ContractError unless 1 <= r, 1 <= ell and r+ell-1 <= n.
SubInterval make_subinterval(std::size_t r, std::size_t ell, std::size_t n);

/// Interval of length ell centred in an n-site chain.
SubInterval centered_subinterval(std::size_t ell, std::size_t n);

/// W^t D_alpha W with D_alpha = (+)_k diag(1-alpha_k, alpha_k): the spectral
/// projection of M onto {lambda_j : alpha_j = 0} u {-lambda_j : alpha_j = 1}.
/// Refuses (ContractError) when the spectrum is not simple.
CorrelationMatrix correlation_matrix(const BogoliubovDecomposition& decomp,
                                     const OccupationPattern& alpha);

/// The 2 ell x 2 ell block of gamma belonging to the sites of sub.
CorrelationMatrix restrict_to(const CorrelationMatrix& gamma,
                              const SubInterval& sub);

/// -tr G log G from the ell pairs (xi, 1-xi) of eigenvalues of gamma1.
/// Eigenvalues inside [-1e-8, 1+1e-8] are clamped to [0,1]; anything outside
/// the window, or a pairing defect above 1e-7, throws NumericalError.
double entanglement_entropy(const CorrelationMatrix& gamma1);

/// 2 log 2 sum_{j in sub, k not in sub} |Gamma_jk|_2 for a full eigenstate
/// correlation matrix (must be a projection, else ContractError).
double arealaw_upper_bound(const CorrelationMatrix& gamma,
                           const SubInterval& sub);

/// max_j |(G1 (I - G1))_jj - sum_{k not in sub} Gamma_jk Gamma_jk^t|_max over
/// the 2x2 diagonal blocks of the restriction G1.
double boundary_identity_residual(const CorrelationMatrix& gamma,
                                  const SubInterval& sub);

/// Entropy of the restricted eigenstate correlation matrix without forming
/// the full 2n x 2n projection. Uses that the restriction has the form
/// 1/2 (I + [[X, Y], [-Y, -X]]) whose spectrum is 1/2 (1 +- sigma(X + Y)).
class RestrictedEntropy {
 public:
  RestrictedEntropy(const BogoliubovDecomposition& decomp, SubInterval sub);

  double operator()(const OccupationPattern& alpha) const;

 private:
  std::size_t n_;
  SubInterval sub_;
  Eigen::MatrixXd particle_rows_;  // rows of W restricted: c-components, per mode
  Eigen::MatrixXd summed_rows_;    // c + c* components
};

struct Exhaustive {
  std::size_t limit = kDefaultExhaustiveLimit;
};

/// count uniformly random patterns, then single-bit-flip hill climbing from
/// the best one when greedy is set.
struct Sample {
  std::size_t count = 256;
  std::uint64_t seed = 0;
  bool greedy = true;
};

using StateStrategy = std::variant<Exhaustive, Sample>;

struct StateSearchResult {
  double max_found = 0.0;
  double rigorous_bound = 0.0;
  OccupationPattern argmax;
  std::size_t evaluated = 0;
};

/// max_found over the patterns visited, and 2 log 2 sum_{j in sub, k not in
/// sub} Q_jk with Q the sum-bound eigenfunction correlator of M.
StateSearchResult max_entropy_over_states(const BogoliubovDecomposition& decomp,
                                          const SubInterval& sub,
                                          const StateStrategy& strategy);

/// Same, with a precomputed n x n correlator Q.
StateSearchResult max_entropy_over_states(const BogoliubovDecomposition& decomp,
                                          const SubInterval& sub,
                                          const StateStrategy& strategy,
                                          const Eigen::MatrixXd& correlator);

/// 2 log 2 sum_{j in sub, k not in sub} Q_jk.
double correlator_boundary_bound(const Eigen::MatrixXd& correlator,
                                 const SubInterval& sub);

/// Binary entropy -x log x - (1-x) log(1-x), natural log, 0 log 0 = 0.
double binary_entropy(double x);

}  // namespace xychain::freefermion
