#pragma once

// Eigenfunction correlators of M: 2x2-block norms of g(M) maximized (or
// bounded) over |g| <= 1, their disorder averages and spatial decay fits.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "xychain/freefermion.hpp"
#include "xychain/model.hpp"

namespace xychain::localization {

enum class CorrelatorKind { SumBound, SignSup, ProjectionSup };

struct CorrelatorMatrix {
  Eigen::MatrixXd Q;  // n x n, symmetric, non-negative
  CorrelatorKind kind = CorrelatorKind::SumBound;
};

/// Q_jk = sum_E |(P_E)_jk|_2 over the eigenspace projections P_E of M.
/// For simple spectrum this is the sum over the 2n rank-one projections,
/// sum_i |w_i(j)| |w_i(k)|. Dominates sup_{|g|<=1} |g(M)_jk|.
CorrelatorMatrix correlator_sum_bound(const freefermion::BogoliubovDecomposition& decomp);

inline constexpr std::size_t kDefaultSignLimit = 20;

/// max over s in {+-1}^{2n} of |sum_i s_i (P_i)_jk|_2 by Gray-code
/// enumeration of the 2^{2n-1} sign classes. Zero-based sites. Refuses
/// when 2n > n_limit.
double correlator_sign_sup(const freefermion::BogoliubovDecomposition& decomp,
                           std::size_t j, std::size_t k,
                           std::size_t n_limit = kDefaultSignLimit);

CorrelatorMatrix correlator_sign_sup_matrix(
    const freefermion::BogoliubovDecomposition& decomp,
    std::size_t n_limit = kDefaultSignLimit);

/// max over all 2^n patterns alpha of |chi_{Delta_alpha}(M)_jk|_2.
CorrelatorMatrix correlator_projection_sup(
    const freefermion::BogoliubovDecomposition& decomp,
    std::size_t pattern_limit = freefermion::kDefaultExhaustiveLimit);

/// n x n matrix of 2x2-block spectral norms of a 2n x 2n matrix.
Eigen::MatrixXd block_norms(const Eigen::MatrixXd& g);

/// q(d) for d = 0..n-1 with standard errors over realizations.
struct DistanceProfile {
  std::vector<double> q_mean;
  std::vector<double> q_stderr;
  std::vector<std::size_t> n_pairs;  // pairs pooled over realizations

  std::size_t size() const { return q_mean.size(); }
};

/// Per-distance mean of the entries Q(j, j+d) of one matrix.
std::vector<double> distance_means(const Eigen::MatrixXd& q);

struct EnsembleCorrelator {
  Eigen::MatrixXd mean;
  DistanceProfile profile;
  std::size_t realizations = 0;
  std::size_t resamples = 0;
};

inline constexpr std::size_t kMaxResamplesPerSlot = 100;

/// Averages the sum-bound correlator over realizations 0..count-1.
/// Realizations of a random ensemble with degenerate spectrum are resampled
/// (up to 100 times per slot, else NumericalError); a deterministic ensemble
/// is used as is.
EnsembleCorrelator ensemble_correlator(const model::DisorderEnsemble& ensemble,
                                       std::size_t n, std::size_t realizations,
                                       std::size_t workers = 1);

enum class DecayModel { Exponential, Stretched, PowerLaw };

const char* to_string(DecayModel model);

/// Log-space least squares fit of q(d) over d in [d_min, d_max].
///   Exponential: C exp(-eta d)
///   Stretched:   C exp(-eta d^xi)
///   PowerLaw:    C / (1 + d^beta)
struct DecayFit {
  DecayModel model = DecayModel::Exponential;
  double C = 0.0;
  double eta = 0.0;
  double xi = 1.0;
  double beta = 0.0;
  double residual = 0.0;      // rms of log-space residuals
  double rate_stderr = 0.0;   // of eta (exp/stretched) or beta (power law)
  double rate_lower95 = 0.0;  // two-sided 95% Student-t lower edge
  std::size_t d_min = 0;
  std::size_t d_max = 0;
  std::size_t points = 0;
  /// eta > 0 (exp/stretched) or beta > 2 (power law) at the lower edge.
  bool verdict = false;
};

inline constexpr double kFitFloor = 1e-16;
inline constexpr std::size_t kMinFitPoints = 6;

/// d_max = 0 selects q.size()/2. Refuses (ContractError) with fewer than six
/// distances in the window.
std::vector<DecayFit> fit_decay(const std::vector<double>& q,
                                const std::vector<DecayModel>& models,
                                std::size_t d_min = 3, std::size_t d_max = 0);

/// CSV with header d,q_mean,q_stderr,n_pairs.
void write_profile_csv(std::ostream& os, const DistanceProfile& profile);

}  // namespace xychain::localization
