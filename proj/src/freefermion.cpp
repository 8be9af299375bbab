#include "xychain/freefermion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "xychain/errors.hpp"
#include "xychain/linalg.hpp"
#include "xychain/localization.hpp"

namespace xychain::freefermion {

using linalg::max_abs;

namespace {

constexpr double kLog2 = std::numbers::ln2;
constexpr double kGreedyImprovement = 1e-12;
constexpr std::size_t kGreedyMaxSweeps = 64;

Eigen::MatrixXd diag_target(const Eigen::VectorXd& lambdas) {
  const Eigen::Index n = lambdas.size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    d(2 * j, 2 * j) = lambdas(j);
    d(2 * j + 1, 2 * j + 1) = -lambdas(j);
  }
  return d;
}

std::vector<Eigen::Index> block_indices(const SubInterval& sub) {
  std::vector<Eigen::Index> idx;
  idx.reserve(2 * sub.ell);
  for (std::size_t j = sub.first(); j <= sub.last(); ++j) {
    idx.push_back(static_cast<Eigen::Index>(2 * j));
    idx.push_back(static_cast<Eigen::Index>(2 * j + 1));
  }
  return idx;
}

void require_projection(const CorrelationMatrix& gamma, const char* who) {
  const Eigen::MatrixXd& g = gamma.matrix;
  const double idem = max_abs(g * g - g);
  if (idem > kProjectionTolerance) {
    std::ostringstream os;
    os << who << ": correlation matrix is not a projection (|G^2-G| = " << idem
       << ")";
    throw ContractError(os.str());
  }
}

double block_norm(const Eigen::MatrixXd& g, std::size_t j, std::size_t k) {
  const auto r = static_cast<Eigen::Index>(2 * j);
  const auto c = static_cast<Eigen::Index>(2 * k);
  return linalg::spectral_norm_2x2(g(r, c), g(r, c + 1), g(r + 1, c),
                                   g(r + 1, c + 1));
}

// Entropy from Z = X + Y of a restricted correlation matrix: the spectrum
// of the restriction is (1 +- sigma)/2 with sigma the singular values of Z.
double entropy_from_z(const Eigen::MatrixXd& z) {
  const Eigen::MatrixXd zz = z * z.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(zz, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const double sigma2 = std::clamp(solver.eigenvalues()(i), 0.0, 1.0);
    s += binary_entropy(0.5 * (1.0 - std::sqrt(sigma2)));
  }
  return s;
}

OccupationPattern random_pattern(std::size_t n, model::SplitMix64& rng) {
  OccupationPattern a = OccupationPattern::zeros(n);
  for (auto& b : a.bits) b = static_cast<std::uint8_t>(rng.next() >> 63);
  return a;
}

}  // namespace

double binary_entropy(double x) {
  double s = 0.0;
  if (x > 0.0 && x < 1.0) s -= x * std::log(x) + (1.0 - x) * std::log1p(-x);
  return s;
}

Eigen::MatrixXd particle_hole_J(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(2 * n);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index k = 0; k < m; k += 2) {
    j(k, k + 1) = 1.0;
    j(k + 1, k) = 1.0;
  }
  return j;
}

BogoliubovResiduals bogoliubov_residuals(const Eigen::MatrixXd& W,
                                         const Eigen::VectorXd& lambdas,
                                         const model::EffectiveHamiltonian& M) {
  const std::size_t n = M.n;
  const auto m = static_cast<Eigen::Index>(2 * n);
  const Eigen::MatrixXd J = particle_hole_J(n);
  BogoliubovResiduals r;
  r.orthogonality = max_abs(W * W.transpose() - Eigen::MatrixXd::Identity(m, m));
  r.bogoliubov = max_abs(W * J * W.transpose() - J);
  r.diagonalization = max_abs(W * M.matrix * W.transpose() - diag_target(lambdas)) /
                      std::max(1.0, max_abs(M.matrix));
  return r;
}

BogoliubovDecomposition bogoliubov_decompose(const model::EffectiveHamiltonian& M) {
  const auto n = static_cast<Eigen::Index>(M.n);
  if (n < 1 || M.matrix.rows() != 2 * n || M.matrix.cols() != 2 * n) {
    throw ContractError("bogoliubov_decompose: malformed effective Hamiltonian");
  }
  // P M P^t = [[A, B], [-B, -A]]: A and B read off the interleaved layout.
  Eigen::MatrixXd s(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      s(j, k) = M.matrix(2 * j, 2 * k) + M.matrix(2 * j, 2 * k + 1);
    }
  }
  linalg::RealSVD svd = linalg::real_svd(s);

  Eigen::MatrixXd what(2 * n, 2 * n);
  what.topLeftCorner(n, n) = 0.5 * (svd.V + svd.U);
  what.topRightCorner(n, n) = 0.5 * (svd.V - svd.U);
  what.bottomLeftCorner(n, n) = 0.5 * (svd.V - svd.U);
  what.bottomRightCorner(n, n) = 0.5 * (svd.V + svd.U);

  const auto image = model::permutation_P(M.n);
  Eigen::MatrixXd w(2 * n, 2 * n);
  for (Eigen::Index a = 0; a < 2 * n; ++a) {
    for (Eigen::Index b = 0; b < 2 * n; ++b) {
      w(a, b) = what(static_cast<Eigen::Index>(image[a]),
                     static_cast<Eigen::Index>(image[b]));
    }
  }

  BogoliubovDecomposition d;
  d.n = M.n;
  d.lambdas = svd.sigma;
  d.W = std::move(w);
  d.U = std::move(svd.U);
  d.V = std::move(svd.V);
  d.min_gap = d.lambdas(0);
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    d.min_gap = std::min(d.min_gap, d.lambdas(j + 1) - d.lambdas(j));
  }

  const BogoliubovResiduals r = bogoliubov_residuals(d.W, d.lambdas, M);
  if (!r.ok()) {
    throw NumericalError("bogoliubov_decompose: invariant residual exceeded",
                         std::max({r.orthogonality, r.bogoliubov, r.diagonalization}));
  }
  return d;
}

double default_gap_threshold(const BogoliubovDecomposition& decomp) {
  return 1e-12 * std::max(1.0, decomp.lambdas(decomp.lambdas.size() - 1));
}

bool check_simple_spectrum(const BogoliubovDecomposition& decomp,
                           std::optional<double> gap_threshold) {
  return decomp.min_gap > gap_threshold.value_or(default_gap_threshold(decomp));
}

OccupationPattern OccupationPattern::zeros(std::size_t n) {
  return OccupationPattern{std::vector<std::uint8_t>(n, 0)};
}

OccupationPattern OccupationPattern::from_index(std::size_t n, std::uint64_t index) {
  OccupationPattern a = zeros(n);
  for (std::size_t j = 0; j < n && j < 64; ++j) {
    a.bits[j] = static_cast<std::uint8_t>((index >> j) & 1U);
  }
  return a;
}

OccupationPattern OccupationPattern::complement() const {
  OccupationPattern a = *this;
  for (auto& b : a.bits) b ^= 1U;
  return a;
}

double many_body_energy(const BogoliubovDecomposition& decomp,
                        const OccupationPattern& alpha) {
  if (alpha.size() != decomp.n) {
    throw ContractError("many_body_energy: pattern length differs from n");
  }
  double e = 0.0;
  for (std::size_t j = 0; j < decomp.n; ++j) {
    const double l = decomp.lambdas(static_cast<Eigen::Index>(j));
    e += alpha.bits[j] ? l : -l;
  }
  return e;
}

SubInterval make_subinterval(std::size_t r, std::size_t ell, std::size_t n) {
  if (r < 1 || ell < 1 || r + ell - 1 > n) {
    std::ostringstream os;
    os << "subinterval {r=" << r << ", ell=" << ell << "} outside chain of "
       << n << " sites";
    throw ContractError(os.str());
  }
  return SubInterval{r, ell};
}

SubInterval centered_subinterval(std::size_t ell, std::size_t n) {
  if (ell < 1 || ell > n) throw ContractError("centered_subinterval: bad length");
  return make_subinterval((n - ell) / 2 + 1, ell, n);
}

CorrelationMatrix correlation_matrix(const BogoliubovDecomposition& decomp,
                                     const OccupationPattern& alpha) {
  if (alpha.size() != decomp.n) {
    throw ContractError("correlation_matrix: pattern length differs from n");
  }
  if (!check_simple_spectrum(decomp)) {
    throw ContractError(
        "correlation_matrix: degenerate one-particle spectrum, the spectral "
        "projection is not determined by the pattern");
  }
  const auto n = static_cast<Eigen::Index>(decomp.n);
  // W^t D W with D selecting one row of each pair.
  Eigen::MatrixXd rows(n, 2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    rows.row(k) = decomp.W.row(2 * k + (alpha.bits[k] ? 1 : 0));
  }
  CorrelationMatrix g{rows.transpose() * rows};
  g.matrix = 0.5 * (g.matrix + g.matrix.transpose());
  return g;
}

CorrelationMatrix restrict_to(const CorrelationMatrix& gamma,
                              const SubInterval& sub) {
  make_subinterval(sub.r, sub.ell, gamma.sites());
  const auto idx = block_indices(sub);
  return CorrelationMatrix{gamma.matrix(idx, idx)};
}

double entanglement_entropy(const CorrelationMatrix& gamma1) {
  const Eigen::VectorXd ev = linalg::sym_eigenvalues(gamma1.matrix);
  const Eigen::Index m = ev.size();
  if (ev(0) < -kEntropyWindow || ev(m - 1) > 1.0 + kEntropyWindow) {
    throw NumericalError(
        "entanglement_entropy: eigenvalue outside [0,1] beyond roundoff",
        std::max(-ev(0), ev(m - 1) - 1.0));
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < m / 2; ++i) {
    const double lo = std::clamp(ev(i), 0.0, 1.0);
    const double hi = std::clamp(ev(m - 1 - i), 0.0, 1.0);
    const double defect = std::abs(lo + hi - 1.0);
    if (defect > kPairingTolerance) {
      throw NumericalError("entanglement_entropy: eigenvalues do not pair as (xi, 1-xi)",
                           defect);
    }
    s += binary_entropy(0.5 * (lo + 1.0 - hi));
  }
  return s;
}

double arealaw_upper_bound(const CorrelationMatrix& gamma,
                           const SubInterval& sub) {
  make_subinterval(sub.r, sub.ell, gamma.sites());
  require_projection(gamma, "arealaw_upper_bound");
  double sum = 0.0;
  for (std::size_t j = sub.first(); j <= sub.last(); ++j) {
    for (std::size_t k = 0; k < gamma.sites(); ++k) {
      if (!sub.contains(k)) sum += block_norm(gamma.matrix, j, k);
    }
  }
  return 2.0 * kLog2 * sum;
}

double boundary_identity_residual(const CorrelationMatrix& gamma,
                                  const SubInterval& sub) {
  const CorrelationMatrix g1 = restrict_to(gamma, sub);
  const auto m = g1.matrix.rows();
  const Eigen::MatrixXd lhs =
      g1.matrix * (Eigen::MatrixXd::Identity(m, m) - g1.matrix);
  double worst = 0.0;
  for (std::size_t j = sub.first(); j <= sub.last(); ++j) {
    Eigen::Matrix2d rhs = Eigen::Matrix2d::Zero();
    const auto rj = static_cast<Eigen::Index>(2 * j);
    for (std::size_t k = 0; k < gamma.sites(); ++k) {
      if (sub.contains(k)) continue;
      const Eigen::Matrix2d b =
          gamma.matrix.block<2, 2>(rj, static_cast<Eigen::Index>(2 * k));
      rhs += b * b.transpose();
    }
    const auto lj = static_cast<Eigen::Index>(2 * (j - sub.first()));
    worst = std::max(worst, max_abs(lhs.block<2, 2>(lj, lj) - rhs));
  }
  return worst;
}

RestrictedEntropy::RestrictedEntropy(const BogoliubovDecomposition& decomp,
                                     SubInterval sub)
    : n_(decomp.n), sub_(make_subinterval(sub.r, sub.ell, decomp.n)) {
  const auto rows = static_cast<Eigen::Index>(2 * n_);
  const auto ell = static_cast<Eigen::Index>(sub_.ell);
  particle_rows_.resize(rows, ell);
  summed_rows_.resize(rows, ell);
  for (Eigen::Index j = 0; j < ell; ++j) {
    const auto c = static_cast<Eigen::Index>(2 * (sub_.first() + j));
    particle_rows_.col(j) = decomp.W.col(c);
    summed_rows_.col(j) = decomp.W.col(c) + decomp.W.col(c + 1);
  }
}

double RestrictedEntropy::operator()(const OccupationPattern& alpha) const {
  const auto n = static_cast<Eigen::Index>(n_);
  const auto ell = static_cast<Eigen::Index>(sub_.ell);
  Eigen::MatrixXd p(n, ell);
  Eigen::MatrixXd s(n, ell);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index r = 2 * k + (alpha.bits[k] ? 1 : 0);
    p.row(k) = particle_rows_.row(r);
    s.row(k) = summed_rows_.row(r);
  }
  Eigen::MatrixXd z = 2.0 * p.transpose() * s;
  z.diagonal().array() -= 1.0;
  return entropy_from_z(z);
}

double correlator_boundary_bound(const Eigen::MatrixXd& correlator,
                                 const SubInterval& sub) {
  const auto n = static_cast<std::size_t>(correlator.rows());
  make_subinterval(sub.r, sub.ell, n);
  double sum = 0.0;
  for (std::size_t j = sub.first(); j <= sub.last(); ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (!sub.contains(k)) {
        sum += correlator(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
      }
    }
  }
  return 2.0 * kLog2 * sum;
}

StateSearchResult max_entropy_over_states(const BogoliubovDecomposition& decomp,
                                          const SubInterval& sub,
                                          const StateStrategy& strategy) {
  return max_entropy_over_states(decomp, sub, strategy,
                                 localization::correlator_sum_bound(decomp).Q);
}

StateSearchResult max_entropy_over_states(const BogoliubovDecomposition& decomp,
                                          const SubInterval& sub,
                                          const StateStrategy& strategy,
                                          const Eigen::MatrixXd& correlator) {
  if (!check_simple_spectrum(decomp)) {
    throw ContractError("max_entropy_over_states: degenerate one-particle spectrum");
  }
  const std::size_t n = decomp.n;
  const RestrictedEntropy entropy(decomp, sub);
  StateSearchResult result;
  result.max_found = -1.0;

  auto consider = [&](const OccupationPattern& a, double s) {
    ++result.evaluated;
    if (s > result.max_found) {
      result.max_found = s;
      result.argmax = a;
    }
  };

  if (const auto* ex = std::get_if<Exhaustive>(&strategy)) {
    if (n >= 63 || (std::uint64_t{1} << n) > ex->limit) {
      std::ostringstream os;
      os << "max_entropy_over_states: 2^" << n << " patterns exceed the exhaustive "
         << "limit " << ex->limit << "; use a Sample strategy";
      throw ContractError(os.str());
    }
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t i = 0; i < total; ++i) {
      const auto a = OccupationPattern::from_index(n, i);
      consider(a, entropy(a));
    }
  } else {
    const auto& sm = std::get<Sample>(strategy);
    if (sm.count < 1) throw ContractError("max_entropy_over_states: empty sample");
    model::SplitMix64 rng(sm.seed);
    for (std::size_t i = 0; i < sm.count; ++i) {
      const auto a = random_pattern(n, rng);
      consider(a, entropy(a));
    }
    if (sm.greedy) {
      OccupationPattern current = result.argmax;
      double best = result.max_found;
      for (std::size_t sweep = 0; sweep < kGreedyMaxSweeps; ++sweep) {
        bool improved = false;
        for (std::size_t k = 0; k < n; ++k) {
          current.bits[k] ^= 1U;
          const double s = entropy(current);
          ++result.evaluated;
          if (s > best + kGreedyImprovement) {
            best = s;
            improved = true;
          } else {
            current.bits[k] ^= 1U;
          }
        }
        if (!improved) break;
      }
      if (best > result.max_found) {
        result.max_found = best;
        result.argmax = current;
      }
    }
  }

  // Report the maximizer through the full projection route.
  result.max_found = entanglement_entropy(
      restrict_to(correlation_matrix(decomp, result.argmax), sub));
  result.rigorous_bound = correlator_boundary_bound(correlator, sub);
  return result;
}

}  // namespace xychain::freefermion
