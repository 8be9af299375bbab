#include "xychain/localization.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "xychain/errors.hpp"
#include "xychain/linalg.hpp"
#include "xychain/parallel.hpp"

namespace xychain::localization {

using freefermion::BogoliubovDecomposition;

namespace {

constexpr std::size_t kGrayResync = 256;

// Eigenvalue of M carried by row i of W.
double mode_energy(const BogoliubovDecomposition& d, Eigen::Index i) {
  const double l = d.lambdas(i / 2);
  return i % 2 == 0 ? l : -l;
}

double t_quantile_975(std::size_t dof) {
  boost::math::students_t dist(static_cast<double>(std::max<std::size_t>(dof, 1)));
  return boost::math::quantile(dist, 0.975);
}

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double rss = 0.0;
  double slope_se = 0.0;
};

LinearFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    f.rss += r * r;
  }
  const double s2 = x.size() > 2 ? f.rss / (n - 2.0) : 0.0;
  f.slope_se = sxx > 0.0 ? std::sqrt(s2 / sxx) : std::numeric_limits<double>::infinity();
  return f;
}

// Minimizes f on [lo, hi]: grid scan, then golden section around the best
// grid point.
template <class F>
double minimize_1d(F&& f, double lo, double hi, int grid = 400) {
  double best_x = lo;
  double best_f = f(lo);
  const double h = (hi - lo) / grid;
  for (int i = 1; i <= grid; ++i) {
    const double x = lo + h * i;
    const double v = f(x);
    if (v < best_f) {
      best_f = v;
      best_x = x;
    }
  }
  double a = std::max(lo, best_x - h);
  double b = std::min(hi, best_x + h);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return f(x) < best_f ? x : best_x;
}

DecayFit fit_exponential(const std::vector<double>& d, const std::vector<double>& y,
                         std::size_t dof) {
  const LinearFit lf = ols(d, y);
  DecayFit fit;
  fit.model = DecayModel::Exponential;
  fit.C = std::exp(lf.intercept);
  fit.eta = -lf.slope;
  fit.residual = std::sqrt(lf.rss / static_cast<double>(d.size()));
  fit.rate_stderr = lf.slope_se;
  fit.rate_lower95 = fit.eta - t_quantile_975(dof) * lf.slope_se;
  fit.verdict = fit.rate_lower95 > 0.0;
  return fit;
}

DecayFit fit_stretched(const std::vector<double>& d, const std::vector<double>& y,
                       std::size_t dof) {
  auto powered = [&](double xi) {
    std::vector<double> x(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) x[i] = std::pow(d[i], xi);
    return x;
  };
  const double xi = minimize_1d([&](double e) { return ols(powered(e), y).rss; }, 0.05, 3.0);
  const LinearFit lf = ols(powered(xi), y);
  DecayFit fit;
  fit.model = DecayModel::Stretched;
  fit.C = std::exp(lf.intercept);
  fit.eta = -lf.slope;
  fit.xi = xi;
  fit.residual = std::sqrt(lf.rss / static_cast<double>(d.size()));
  // Conditional on the fitted exponent.
  fit.rate_stderr = lf.slope_se;
  fit.rate_lower95 = fit.eta - t_quantile_975(dof) * lf.slope_se;
  fit.verdict = fit.rate_lower95 > 0.0;
  return fit;
}

DecayFit fit_power_law(const std::vector<double>& d, const std::vector<double>& y,
                       std::size_t dof) {
  const auto m = static_cast<double>(d.size());
  auto log1p_pow = [](double x, double beta) {
    return std::log1p(std::pow(x, beta));
  };
  auto intercept = [&](double beta) {
    double a = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) a += y[i] + log1p_pow(d[i], beta);
    return a / m;
  };
  auto rss = [&](double beta) {
    const double a = intercept(beta);
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double r = y[i] - a + log1p_pow(d[i], beta);
      s += r * r;
    }
    return s;
  };
  const double beta = minimize_1d(rss, 0.0, 60.0, 1200);
  const double a = intercept(beta);
  const double r2 = rss(beta);

  // Gauss-Newton covariance for (log C, beta).
  Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double p = std::pow(d[i], beta);
    const double dbeta = -p * std::log(d[i]) / (1.0 + p);
    jtj(0, 0) += 1.0;
    jtj(0, 1) += dbeta;
    jtj(1, 1) += dbeta * dbeta;
  }
  jtj(1, 0) = jtj(0, 1);
  const double s2 = dof > 0 ? r2 / static_cast<double>(dof) : 0.0;
  const double det = jtj.determinant();
  const double var_beta = det > 0.0 ? s2 * jtj(0, 0) / det
                                    : std::numeric_limits<double>::infinity();

  DecayFit fit;
  fit.model = DecayModel::PowerLaw;
  fit.C = std::exp(a);
  fit.beta = beta;
  fit.residual = std::sqrt(r2 / m);
  fit.rate_stderr = std::sqrt(var_beta);
  fit.rate_lower95 = beta - t_quantile_975(dof) * fit.rate_stderr;
  fit.verdict = fit.rate_lower95 > 2.0;
  return fit;
}

}  // namespace

Eigen::MatrixXd block_norms(const Eigen::MatrixXd& g) {
  const Eigen::Index n = g.rows() / 2;
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      out(j, k) = linalg::spectral_norm_2x2(g(2 * j, 2 * k), g(2 * j, 2 * k + 1),
                                            g(2 * j + 1, 2 * k), g(2 * j + 1, 2 * k + 1));
    }
  }
  return out;
}

CorrelatorMatrix correlator_sum_bound(const BogoliubovDecomposition& decomp) {
  const auto n = static_cast<Eigen::Index>(decomp.n);
  const Eigen::Index modes = 2 * n;
  const double tol = freefermion::default_gap_threshold(decomp);

  // Modes sorted by eigenvalue, grouped into numerically degenerate clusters.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(modes));
  for (Eigen::Index i = 0; i < modes; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return mode_energy(decomp, a) < mode_energy(decomp, b);
  });

  // Site norms |w_i(j)| for singleton clusters; Q = N^t N over them.
  Eigen::MatrixXd site_norms = Eigen::MatrixXd::Zero(modes, n);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t stop = start + 1;
    while (stop < order.size() &&
           mode_energy(decomp, order[stop]) - mode_energy(decomp, order[stop - 1]) <= tol) {
      ++stop;
    }
    if (stop - start == 1) {
      const Eigen::Index i = order[start];
      for (Eigen::Index j = 0; j < n; ++j) {
        site_norms(i, j) = std::hypot(decomp.W(i, 2 * j), decomp.W(i, 2 * j + 1));
      }
    } else {
      Eigen::MatrixXd rows(static_cast<Eigen::Index>(stop - start), modes);
      for (std::size_t c = start; c < stop; ++c) {
        rows.row(static_cast<Eigen::Index>(c - start)) = decomp.W.row(order[c]);
      }
      q += block_norms(rows.transpose() * rows);
    }
    start = stop;
  }
  q += site_norms.transpose() * site_norms;
  q = 0.5 * (q + q.transpose());
  return {std::move(q), CorrelatorKind::SumBound};
}

double correlator_sign_sup(const BogoliubovDecomposition& decomp, std::size_t j,
                           std::size_t k, std::size_t n_limit) {
  const std::size_t modes = 2 * decomp.n;
  if (modes > n_limit || modes > 40) {
    std::ostringstream os;
    os << "correlator_sign_sup: 2n = " << modes << " exceeds limit " << n_limit;
    throw ContractError(os.str());
  }
  if (j >= decomp.n || k >= decomp.n) {
    throw ContractError("correlator_sign_sup: site index out of range");
  }
  const auto rj = static_cast<Eigen::Index>(2 * j);
  const auto rk = static_cast<Eigen::Index>(2 * k);
  std::vector<Eigen::Matrix2d> terms(modes);
  for (std::size_t i = 0; i < modes; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const Eigen::Vector2d a(decomp.W(r, rj), decomp.W(r, rj + 1));
    const Eigen::Vector2d b(decomp.W(r, rk), decomp.W(r, rk + 1));
    terms[i] = a * b.transpose();
  }
  std::vector<int> sign(modes, 1);
  auto resum = [&] {
    Eigen::Matrix2d t = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < modes; ++i) t += sign[i] * terms[i];
    return t;
  };
  auto norm = [](const Eigen::Matrix2d& t) {
    return linalg::spectral_norm_2x2(t(0, 0), t(0, 1), t(1, 0), t(1, 1));
  };
  Eigen::Matrix2d total = resum();
  double best = norm(total);
  // Global sign does not change the norm: keep sign[0] = +1.
  const std::uint64_t classes = std::uint64_t{1} << (modes - 1);
  for (std::uint64_t g = 1; g < classes; ++g) {
    const std::size_t bit = 1 + static_cast<std::size_t>(std::countr_zero(g));
    total -= 2.0 * sign[bit] * terms[bit];
    sign[bit] = -sign[bit];
    if (g % kGrayResync == 0) total = resum();
    best = std::max(best, norm(total));
  }
  return best;
}

CorrelatorMatrix correlator_sign_sup_matrix(const BogoliubovDecomposition& decomp,
                                            std::size_t n_limit) {
  const auto n = static_cast<Eigen::Index>(decomp.n);
  Eigen::MatrixXd q(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = j; k < n; ++k) {
      q(j, k) = q(k, j) = correlator_sign_sup(decomp, static_cast<std::size_t>(j),
                                              static_cast<std::size_t>(k), n_limit);
    }
  }
  return {std::move(q), CorrelatorKind::SignSup};
}

CorrelatorMatrix correlator_projection_sup(const BogoliubovDecomposition& decomp,
                                           std::size_t pattern_limit) {
  const std::size_t n = decomp.n;
  if (n >= 63 || (std::uint64_t{1} << n) > pattern_limit) {
    throw ContractError("correlator_projection_sup: too many patterns to enumerate");
  }
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(size, size);
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << n); ++i) {
    const auto g = freefermion::correlation_matrix(
        decomp, freefermion::OccupationPattern::from_index(n, i));
    q = q.cwiseMax(block_norms(g.matrix));
  }
  return {std::move(q), CorrelatorKind::ProjectionSup};
}

std::vector<double> distance_means(const Eigen::MatrixXd& q) {
  const Eigen::Index n = q.rows();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index d = 0; d < n; ++d) {
    double s = 0.0;
    for (Eigen::Index j = 0; j + d < n; ++j) s += q(j, j + d);
    out[static_cast<std::size_t>(d)] = s / static_cast<double>(n - d);
  }
  return out;
}

EnsembleCorrelator ensemble_correlator(const model::DisorderEnsemble& ensemble,
                                       std::size_t n, std::size_t realizations,
                                       std::size_t workers) {
  if (realizations < 1) throw ContractError("ensemble_correlator: need realizations >= 1");
  ensemble.validate();

  struct Slot {
    Eigen::MatrixXd q;
    std::size_t resamples = 0;
  };
  std::vector<Slot> slots(realizations);
  detail::parallel_for(realizations, workers, [&](std::size_t r) {
    for (std::size_t c = 0; c <= kMaxResamplesPerSlot; ++c) {
      const auto params = model::sample_params(ensemble, n, r, c);
      const auto decomp = freefermion::bogoliubov_decompose(model::build_M(params));
      if (ensemble.deterministic() || freefermion::check_simple_spectrum(decomp)) {
        slots[r].q = correlator_sum_bound(decomp).Q;
        slots[r].resamples = c;
        return;
      }
    }
    throw NumericalError("ensemble_correlator: realization stayed degenerate after "
                         "resampling; pathological ensemble",
                         static_cast<double>(r));
  });

  EnsembleCorrelator out;
  out.realizations = realizations;
  const auto size = static_cast<Eigen::Index>(n);
  out.mean = Eigen::MatrixXd::Zero(size, size);
  std::vector<std::vector<double>> per(realizations);
  for (std::size_t r = 0; r < realizations; ++r) {
    out.mean += slots[r].q;
    out.resamples += slots[r].resamples;
    per[r] = distance_means(slots[r].q);
  }
  out.mean /= static_cast<double>(realizations);

  const auto rr = static_cast<double>(realizations);
  out.profile.q_mean.assign(n, 0.0);
  out.profile.q_stderr.assign(n, 0.0);
  out.profile.n_pairs.assign(n, 0);
  for (std::size_t d = 0; d < n; ++d) {
    double mean = 0.0;
    for (std::size_t r = 0; r < realizations; ++r) mean += per[r][d];
    mean /= rr;
    double var = 0.0;
    for (std::size_t r = 0; r < realizations; ++r) var += (per[r][d] - mean) * (per[r][d] - mean);
    out.profile.q_mean[d] = mean;
    out.profile.q_stderr[d] = realizations > 1 ? std::sqrt(var / (rr - 1.0) / rr) : 0.0;
    out.profile.n_pairs[d] = (n - d) * realizations;
  }
  return out;
}

const char* to_string(DecayModel model) {
  switch (model) {
    case DecayModel::Exponential: return "exponential";
    case DecayModel::Stretched: return "stretched";
    case DecayModel::PowerLaw: return "power_law";
  }
  return "unknown";
}

std::vector<DecayFit> fit_decay(const std::vector<double>& q,
                                const std::vector<DecayModel>& models,
                                std::size_t d_min, std::size_t d_max) {
  if (d_max == 0) d_max = q.size() / 2;
  d_max = std::min(d_max, q.size() == 0 ? 0 : q.size() - 1);
  std::vector<double> d, y;
  for (std::size_t k = std::max<std::size_t>(d_min, 1); k <= d_max && k < q.size(); ++k) {
    d.push_back(static_cast<double>(k));
    y.push_back(std::log(std::max(q[k], kFitFloor)));
  }
  if (d.size() < kMinFitPoints) {
    std::ostringstream os;
    os << "fit_decay: " << d.size() << " usable distances in [" << d_min << ", "
       << d_max << "], need " << kMinFitPoints;
    throw ContractError(os.str());
  }
  const std::size_t dof = d.size() - 2;
  std::vector<DecayFit> fits;
  for (DecayModel m : models) {
    DecayFit f;
    switch (m) {
      case DecayModel::Exponential: f = fit_exponential(d, y, dof); break;
      case DecayModel::Stretched: f = fit_stretched(d, y, dof); break;
      case DecayModel::PowerLaw: f = fit_power_law(d, y, dof); break;
    }
    f.d_min = static_cast<std::size_t>(d.front());
    f.d_max = static_cast<std::size_t>(d.back());
    f.points = d.size();
    fits.push_back(f);
  }
  return fits;
}

void write_profile_csv(std::ostream& os, const DistanceProfile& profile) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << "d,q_mean,q_stderr,n_pairs\n" << std::setprecision(17);
  for (std::size_t d = 0; d < profile.size(); ++d) {
    os << d << ',' << profile.q_mean[d] << ',' << profile.q_stderr[d] << ','
       << profile.n_pairs[d] << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace xychain::localization
