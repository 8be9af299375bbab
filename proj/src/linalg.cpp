#include "xychain/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "xychain/errors.hpp"

namespace xychain::linalg {

namespace {

constexpr double kSignCutoff = 1e-13;

void check_symmetric(const Eigen::Ref<const Eigen::MatrixXd>& m,
                     const char* who) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw ContractError(std::string(who) + ": expected a non-empty square matrix");
  }
  const double asym = max_abs(m - m.transpose());
  if (asym > kSymmetryTolerance * std::max(1.0, max_abs(m))) {
    throw ContractError(std::string(who) + ": input is not symmetric");
  }
}

// Index of the first entry whose magnitude is above the cutoff relative to
// the vector's largest entry.
Eigen::Index first_significant(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > kSignCutoff * scale) return i;
  }
  return 0;
}

}  // namespace

double max_abs(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

SymEig sym_eig(const Eigen::Ref<const Eigen::MatrixXd>& matrix) {
  check_symmetric(matrix, "sym_eig");
  const Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("sym_eig: eigensolver did not converge", 0.0);
  }
  SymEig out{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index c = 0; c < out.vectors.cols(); ++c) {
    const Eigen::Index i = first_significant(out.vectors.col(c));
    if (out.vectors(i, c) < 0.0) out.vectors.col(c) *= -1.0;
  }

  const Eigen::Index m = matrix.rows();
  const double scale = std::max(1.0, max_abs(matrix));
  const double recon = max_abs(out.vectors * out.values.asDiagonal() *
                                   out.vectors.transpose() -
                               matrix);
  if (recon > kReconstructionTolerance * scale) {
    throw NumericalError("sym_eig: reconstruction residual too large", recon);
  }
  const double orth = max_abs(out.vectors.transpose() * out.vectors -
                              Eigen::MatrixXd::Identity(m, m));
  if (orth > kReconstructionTolerance) {
    throw NumericalError("sym_eig: eigenvectors not orthonormal", orth);
  }
  return out;
}

Eigen::VectorXd sym_eigenvalues(
    const Eigen::Ref<const Eigen::MatrixXd>& matrix) {
  check_symmetric(matrix, "sym_eigenvalues");
  const Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym,
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("sym_eigenvalues: eigensolver did not converge", 0.0);
  }
  return solver.eigenvalues();
}

RealSVD real_svd(const Eigen::Ref<const Eigen::MatrixXd>& s) {
  if (s.rows() != s.cols() || s.rows() < 1) {
    throw ContractError("real_svd: expected a non-empty square matrix");
  }
  if (!s.allFinite()) throw ContractError("real_svd: non-finite input");

  // Eigen: s = Ue diag(desc) Ve^t. We want U s V^t = diag(asc).
  Eigen::BDCSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Index n = s.rows();
  RealSVD out{Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = n - 1 - i;
    out.sigma(i) = svd.singularValues()(src);
    out.U.row(i) = svd.matrixU().col(src).transpose();
    out.V.row(i) = svd.matrixV().col(src).transpose();
    const Eigen::Index k = first_significant(out.U.row(i).transpose());
    if (out.U(i, k) < 0.0) {
      out.U.row(i) *= -1.0;
      out.V.row(i) *= -1.0;
    }
  }

  const double scale = std::max(1.0, max_abs(s));
  const double recon =
      max_abs(out.U * s * out.V.transpose() - Eigen::MatrixXd(out.sigma.asDiagonal()));
  if (recon > kReconstructionTolerance * scale) {
    throw NumericalError("real_svd: reconstruction residual too large", recon);
  }
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const double orth = std::max(max_abs(out.U * out.U.transpose() - id),
                               max_abs(out.V * out.V.transpose() - id));
  if (orth > kReconstructionTolerance) {
    throw NumericalError("real_svd: factors not orthogonal", orth);
  }
  return out;
}

double pfaffian(const Eigen::Ref<const Eigen::MatrixXd>& a) {
  if (a.rows() != a.cols()) throw ContractError("pfaffian: matrix not square");
  if (max_abs(a + a.transpose()) > kSymmetryTolerance * std::max(1.0, max_abs(a))) {
    throw ContractError("pfaffian: matrix not antisymmetric");
  }
  const Eigen::Index n = a.rows();
  if (n == 0) return 1.0;
  if (n % 2 == 1) return 0.0;

  Eigen::MatrixXd m = a;
  double result = 1.0;
  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    // Pivot: largest entry in column k below the diagonal.
    Eigen::Index pivot = k + 1;
    for (Eigen::Index i = k + 2; i < n; ++i) {
      if (std::abs(m(i, k)) > std::abs(m(pivot, k))) pivot = i;
    }
    if (pivot != k + 1) {
      m.row(k + 1).swap(m.row(pivot));
      m.col(k + 1).swap(m.col(pivot));
      result = -result;
    }
    const double head = m(k, k + 1);
    if (head == 0.0) return 0.0;
    result *= head;
    if (k + 2 < n) {
      // Eliminate column k below row k+1 using row k+1; the trailing
      // update stays antisymmetric: M <- M + u tau^t - tau u^t.
      const Eigen::Index rest = n - k - 2;
      const Eigen::VectorXd tau = m.col(k).tail(rest) / head;
      const Eigen::VectorXd u = m.col(k + 1).tail(rest);
      m.bottomRightCorner(rest, rest) += u * tau.transpose() - tau * u.transpose();
    }
  }
  return result;
}

Eigen::MatrixXd matrix_function(const SymEig& eig,
                                const std::function<double(double)>& g) {
  Eigen::VectorXd gv(eig.values.size());
  for (Eigen::Index i = 0; i < gv.size(); ++i) gv(i) = g(eig.values(i));
  return eig.vectors * gv.asDiagonal() * eig.vectors.transpose();
}

double spectral_norm_2x2(double a, double b, double c, double d) {
  // Sum of the two hypotenuses avoids the cancellation in the
  // discriminant form when the singular values nearly coincide.
  return 0.5 * (std::hypot(a + d, c - b) + std::hypot(a - d, b + c));
}

}  // namespace xychain::linalg
