#pragma once

// Dense real kernels with residual guarantees. Eigendecomposition and SVD
// are delegated to Eigen and then checked; the Pfaffian is computed here.

#include <functional>

#include <Eigen/Dense>

namespace xychain::linalg {

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kReconstructionTolerance = 1e-10;

double max_abs(const Eigen::Ref<const Eigen::MatrixXd>& m);

/// Eigenpairs of a real symmetric matrix. Values ascend; each eigenvector
/// column has its first non-negligible component positive.
struct SymEig {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Throws ContractError on non-symmetric input and NumericalError when the
/// reconstruction or orthogonality residual exceeds 1e-10 (relative).
SymEig sym_eig(const Eigen::Ref<const Eigen::MatrixXd>& matrix);

/// Eigenvalues only, ascending. Same symmetry contract as sym_eig.
Eigen::VectorXd sym_eigenvalues(const Eigen::Ref<const Eigen::MatrixXd>& matrix);

/// U S V^t = diag(sigma) with sigma ascending and non-negative, i.e.
/// S = U^t diag(sigma) V. Each row of U has its first non-negligible entry
/// positive (the matching row of V is flipped along).
struct RealSVD {
  Eigen::MatrixXd U;
  Eigen::MatrixXd V;
  Eigen::VectorXd sigma;
};

RealSVD real_svd(const Eigen::Ref<const Eigen::MatrixXd>& s);

/// Pfaffian of a real antisymmetric matrix by Parlett-Reid
/// tridiagonalization with partial pivoting. Odd dimension gives 0,
/// the empty matrix gives 1.
double pfaffian(const Eigen::Ref<const Eigen::MatrixXd>& a);

/// Q diag(g(values)) Q^t.
Eigen::MatrixXd matrix_function(const SymEig& eig,
                                const std::function<double(double)>& g);

/// Largest singular value of a 2x2 block, closed form.
double spectral_norm_2x2(double a, double b, double c, double d);

}  // namespace xychain::linalg
