#include "xychain/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include "xychain/errors.hpp"
#include "xychain/linalg.hpp"

namespace xychain::oracle {

using freefermion::CorrelationMatrix;
using freefermion::SubInterval;

namespace {

using Sparse = Eigen::SparseMatrix<Complex>;

std::size_t dim(std::size_t n) { return std::size_t{1} << n; }

// Bit of zero-based site j inside a basis index.
std::size_t site_bit(std::size_t n, std::size_t j) { return n - 1 - j; }

double max_abs(const Eigen::MatrixXcd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

Sparse to_sparse(const DenseOperator& op) { return op.matrix.sparseView(); }

std::vector<Sparse> sparse_interleaved(const std::vector<DenseOperator>& c_ops) {
  std::vector<Sparse> out;
  out.reserve(2 * c_ops.size());
  for (const auto& c : c_ops) {
    Sparse s = to_sparse(c);
    out.push_back(s);
    out.push_back(Sparse(s.adjoint()));
  }
  return out;
}

// Tr(S rho) for sparse S.
Complex trace_product(const Sparse& s, const Eigen::MatrixXcd& rho) {
  Complex t = 0.0;
  for (int k = 0; k < s.outerSize(); ++k) {
    for (Sparse::InnerIterator it(s, k); it; ++it) t += it.value() * rho(it.col(), it.row());
  }
  return t;
}

Eigen::MatrixXd real_or_throw(const Eigen::MatrixXcd& g, const char* where) {
  const double imag = g.imag().size() == 0 ? 0.0 : g.imag().cwiseAbs().maxCoeff();
  if (imag > kDensityTolerance) throw NumericalError(std::string(where) + ": complex correlation matrix", imag);
  return g.real();
}

void check_density_matrix(const Eigen::MatrixXcd& rho) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) throw ContractError("density matrix must be square");
  const double trace_err = std::abs(rho.trace() - Complex(1.0));
  const double herm_err = max_abs(rho - rho.adjoint());
  if (trace_err > kDensityTolerance || herm_err > kDensityTolerance) {
    std::ostringstream os;
    os << "invalid density matrix: trace error " << trace_err << ", hermiticity error " << herm_err;
    throw ContractError(os.str());
  }
  const Eigen::MatrixXcd h = 0.5 * (rho + rho.adjoint());
  const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(h, Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .minCoeff();
  if (min_eig < -kDensityTolerance) {
    std::ostringstream os;
    os << "invalid density matrix: eigenvalue " << min_eig;
    throw ContractError(os.str());
  }
}

void check_simple_level(const ExactSpectrum& spectrum, double h_scale, std::size_t index) {
  const auto size = static_cast<std::size_t>(spectrum.energies.size());
  if (index >= size) throw ContractError("state index out of range");
  const double tol = kDegeneracyTolerance * std::max(1.0, h_scale);
  const auto i = static_cast<Eigen::Index>(index);
  double gap = std::numeric_limits<double>::infinity();
  if (index > 0) gap = std::min(gap, spectrum.energies(i) - spectrum.energies(i - 1));
  if (index + 1 < size) gap = std::min(gap, spectrum.energies(i + 1) - spectrum.energies(i));
  if (gap <= tol) {
    std::ostringstream os;
    os << "eigenstate " << index << " is degenerate (gap " << gap << "); eigenvector ill-defined";
    throw ContractError(os.str());
  }
}

}  // namespace

void check_cap(std::size_t n, std::size_t cap) {
  if (n > cap) {
    std::ostringstream os;
    os << "oracle: n = " << n << " exceeds the cap " << cap;
    throw ContractError(os.str());
  }
}

Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}

Eigen::Matrix2cd pauli_y() {
  const Complex i(0.0, 1.0);
  Eigen::Matrix2cd m;
  m << 0, -i, i, 0;
  return m;
}

Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

Eigen::Matrix2cd lowering() {
  Eigen::Matrix2cd m;
  m << 0, 0, 1, 0;
  return m;
}

DenseOperator tensor_product(const std::vector<Eigen::Matrix2cd>& ops) {
  check_cap(ops.size());
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(1, 1);
  for (const auto& op : ops) {
    Eigen::MatrixXcd next(2 * acc.rows(), 2 * acc.cols());
    for (Eigen::Index i = 0; i < acc.rows(); ++i) {
      for (Eigen::Index k = 0; k < acc.cols(); ++k) next.block<2, 2>(2 * i, 2 * k) = acc(i, k) * op;
    }
    acc = std::move(next);
  }
  return {std::move(acc), ops.size()};
}

DenseOperator site_operator(std::size_t n, std::size_t j, const Eigen::Matrix2cd& op) {
  if (j >= n) throw ContractError("site_operator: site out of range");
  std::vector<Eigen::Matrix2cd> ops(n, Eigen::Matrix2cd::Identity());
  ops[j] = op;
  return tensor_product(ops);
}

DenseOperator build_H(const model::ChainParams& params) {
  model::validate(params);
  const std::size_t n = params.n;
  check_cap(n);
  const std::size_t d = dim(n);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t s = 0; s < d; ++s) {
    const auto col = static_cast<Eigen::Index>(s);
    for (std::size_t j = 0; j < n; ++j) {
      const bool up = ((s >> site_bit(n, j)) & 1u) == 0;  // sigma_Z = +1
      h(col, col) -= params.nu[j] * (up ? 1.0 : -1.0);
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const std::size_t b1 = site_bit(n, j);
      const std::size_t b2 = site_bit(n, j + 1);
      const auto row = static_cast<Eigen::Index>(s ^ (std::size_t{1} << b1) ^ (std::size_t{1} << b2));
      const bool equal = ((s >> b1) & 1u) == ((s >> b2) & 1u);
      // XX flips both spins with amplitude 1; YY with -1 on equal spins.
      const double yy = equal ? -1.0 : 1.0;
      h(row, col) -= params.mu[j] * ((1.0 + params.gamma[j]) + (1.0 - params.gamma[j]) * yy);
    }
  }
  return {std::move(h), n};
}

std::vector<DenseOperator> jordan_wigner(std::size_t n) {
  check_cap(n);
  const std::size_t d = dim(n);
  std::vector<DenseOperator> out;
  for (std::size_t j = 0; j < n; ++j) {
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const std::size_t bit = site_bit(n, j);
    for (std::size_t s = 0; s < d; ++s) {
      if ((s >> bit) & 1u) continue;  // a annihilates local state 1
      // Sites before j are the more significant bits; each 1 there gives -1.
      const int ones = std::popcount(s >> (bit + 1));
      c(static_cast<Eigen::Index>(s | (std::size_t{1} << bit)), static_cast<Eigen::Index>(s)) = (ones % 2) ? -1.0 : 1.0;
    }
    out.push_back({std::move(c), n});
  }
  return out;
}

double car_residual(const std::vector<DenseOperator>& ops) {
  double worst = 0.0;
  for (std::size_t j = 0; j < ops.size(); ++j) {
    const auto& x = ops[j].matrix;
    const auto id = Eigen::MatrixXcd::Identity(x.rows(), x.cols());
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const auto& y = ops[k].matrix;
      Eigen::MatrixXcd mixed = x * y.adjoint() + y.adjoint() * x;
      if (j == k) mixed -= id;
      worst = std::max(worst, max_abs(mixed));
      worst = std::max(worst, max_abs(x * y + y * x));
    }
  }
  return worst;
}

std::vector<DenseOperator> interleaved(const std::vector<DenseOperator>& c_ops) {
  std::vector<DenseOperator> out;
  for (const auto& c : c_ops) {
    out.push_back(c);
    out.push_back({c.matrix.adjoint(), c.n});
  }
  return out;
}

double verify_quadratic_form(const model::ChainParams& params) {
  const DenseOperator h = build_H(params);
  const auto m = model::build_M(params);
  const auto ops = sparse_interleaved(jordan_wigner(params.n));
  Eigen::MatrixXcd form = Eigen::MatrixXcd::Zero(h.matrix.rows(), h.matrix.cols());
  for (Eigen::Index a = 0; a < m.matrix.rows(); ++a) {
    for (Eigen::Index b = 0; b < m.matrix.cols(); ++b) {
      const double v = m.matrix(a, b);
      if (v == 0.0) continue;
      const Sparse term = ops[static_cast<std::size_t>(a)].adjoint() * ops[static_cast<std::size_t>(b)];
      form += v * Eigen::MatrixXcd(term);
    }
  }
  return max_abs(h.matrix - form);
}

ExactSpectrum exact_spectrum(const DenseOperator& H) {
  ExactSpectrum out;
  const double imag = max_abs(Eigen::MatrixXcd(H.matrix.imag().cast<Complex>()));
  if (imag == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.matrix.real());
    out.energies = es.eigenvalues();
    out.states = es.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.matrix);
    out.energies = es.eigenvalues();
    out.states = es.eigenvectors();
  }
  for (Eigen::Index k = 0; k < out.states.cols(); ++k) {
    Eigen::Index at = 0;
    out.states.col(k).cwiseAbs().maxCoeff(&at);
    const Complex z = out.states(at, k);
    out.states.col(k) *= std::conj(z) / std::abs(z);
  }
  const double scale = std::max(1.0, max_abs(H.matrix));
  const double res = max_abs(H.matrix * out.states - out.states * out.energies.cast<Complex>().asDiagonal());
  if (res > kSpectrumResidual * scale) throw NumericalError("exact_spectrum: eigen residual", res);
  return out;
}

double min_level_spacing(const ExactSpectrum& spectrum) {
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 1; i < spectrum.energies.size(); ++i) {
    gap = std::min(gap, spectrum.energies(i) - spectrum.energies(i - 1));
  }
  return gap;
}

std::size_t state_index_for_energy(const ExactSpectrum& spectrum, double energy, double tol) {
  std::size_t best = 0;
  std::size_t hits = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < spectrum.energies.size(); ++i) {
    const double err = std::abs(spectrum.energies(i) - energy);
    if (err <= tol) ++hits;
    if (err < best_err) {
      best_err = err;
      best = static_cast<std::size_t>(i);
    }
  }
  if (hits != 1) {
    std::ostringstream os;
    os << "state_index_for_energy: " << hits << " levels within " << tol << " of " << energy;
    throw ContractError(os.str());
  }
  return best;
}

Eigen::MatrixXcd partial_trace(const Eigen::MatrixXcd& rho, std::size_t n, const SubInterval& sub) {
  check_cap(n);
  (void)freefermion::make_subinterval(sub.r, sub.ell, n);
  if (rho.rows() != static_cast<Eigen::Index>(dim(n))) throw ContractError("partial_trace: dimension mismatch");
  const std::size_t dl = dim(sub.first());
  const std::size_t dm = dim(sub.ell);
  const std::size_t dr = dim(n - sub.last() - 1);
  auto index = [&](std::size_t l, std::size_t m, std::size_t r) {
    return static_cast<Eigen::Index>((l * dm + m) * dr + r);
  };
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dm), static_cast<Eigen::Index>(dm));
  for (std::size_t m1 = 0; m1 < dm; ++m1) {
    for (std::size_t m2 = 0; m2 < dm; ++m2) {
      Complex s = 0.0;
      for (std::size_t l = 0; l < dl; ++l) {
        for (std::size_t r = 0; r < dr; ++r) s += rho(index(l, m1, r), index(l, m2, r));
      }
      out(static_cast<Eigen::Index>(m1), static_cast<Eigen::Index>(m2)) = s;
    }
  }
  return out;
}

Eigen::MatrixXcd reduced_state(const Eigen::VectorXcd& psi, std::size_t n, const SubInterval& sub) {
  check_cap(n);
  (void)freefermion::make_subinterval(sub.r, sub.ell, n);
  if (psi.size() != static_cast<Eigen::Index>(dim(n))) throw ContractError("reduced_state: dimension mismatch");
  const std::size_t dl = dim(sub.first());
  const auto dm = static_cast<Eigen::Index>(dim(sub.ell));
  const std::size_t dr = dim(n - sub.last() - 1);
  // Columns of x run over (left, right) environment configurations.
  Eigen::MatrixXcd x(dm, static_cast<Eigen::Index>(dl * dr));
  for (std::size_t l = 0; l < dl; ++l) {
    for (Eigen::Index m = 0; m < dm; ++m) {
      for (std::size_t r = 0; r < dr; ++r) {
        x(m, static_cast<Eigen::Index>(l * dr + r)) = psi(static_cast<Eigen::Index>((l * static_cast<std::size_t>(dm) + static_cast<std::size_t>(m)) * dr + r));
      }
    }
  }
  return x * x.adjoint();
}

double von_neumann_entropy(const Eigen::MatrixXcd& rho) {
  check_density_matrix(rho);
  const Eigen::MatrixXcd h = 0.5 * (rho + rho.adjoint());
  const Eigen::VectorXd p = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(h, Eigen::EigenvaluesOnly).eigenvalues();
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) s -= p(i) * std::log(p(i));
  }
  return s;
}

double exact_entanglement(const ExactSpectrum& spectrum, double h_scale, std::size_t n,
                          std::size_t state_index, const SubInterval& sub) {
  check_simple_level(spectrum, h_scale, state_index);
  const Eigen::VectorXcd psi = spectrum.states.col(static_cast<Eigen::Index>(state_index));
  return von_neumann_entropy(reduced_state(psi, n, sub));
}

double exact_entanglement(const model::ChainParams& params, std::size_t state_index, const SubInterval& sub) {
  const DenseOperator h = build_H(params);
  const ExactSpectrum spectrum = exact_spectrum(h);
  return exact_entanglement(spectrum, max_abs(h.matrix), params.n, state_index, sub);
}

double match_spectra(const model::ChainParams& params) {
  const auto decomp = freefermion::bogoliubov_decompose(model::build_M(params));
  const auto exact = exact_spectrum(build_H(params));
  const std::size_t count = dim(params.n);
  std::vector<double> free(count);
  for (std::size_t i = 0; i < count; ++i) {
    free[i] = freefermion::many_body_energy(decomp, freefermion::OccupationPattern::from_index(params.n, i));
  }
  std::sort(free.begin(), free.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    worst = std::max(worst, std::abs(free[i] - exact.energies(static_cast<Eigen::Index>(i))));
  }
  return worst;
}

CorrelationMatrix correlation_from_state(const Eigen::MatrixXcd& rho, const std::vector<DenseOperator>& c_ops) {
  check_density_matrix(rho);
  const auto ops = sparse_interleaved(c_ops);
  const auto size = static_cast<Eigen::Index>(ops.size());
  Eigen::MatrixXcd g(size, size);
  for (Eigen::Index a = 0; a < size; ++a) {
    for (Eigen::Index b = 0; b < size; ++b) {
      const Sparse prod = ops[static_cast<std::size_t>(a)] * Sparse(ops[static_cast<std::size_t>(b)].adjoint());
      g(a, b) = trace_product(prod, rho);
    }
  }
  return {real_or_throw(g, "correlation_from_state")};
}

CorrelationMatrix correlation_from_pure_state(const Eigen::VectorXcd& psi, const std::vector<DenseOperator>& c_ops) {
  const double norm_err = std::abs(psi.squaredNorm() - 1.0);
  if (norm_err > kDensityTolerance) throw ContractError("correlation_from_pure_state: state not normalized");
  const auto ops = sparse_interleaved(c_ops);
  Eigen::MatrixXcd v(psi.size(), static_cast<Eigen::Index>(ops.size()));
  for (std::size_t a = 0; a < ops.size(); ++a) v.col(static_cast<Eigen::Index>(a)) = ops[a].adjoint() * psi;
  return {real_or_throw(v.adjoint() * v, "correlation_from_pure_state")};
}

WickResult wick_check(const Eigen::VectorXcd& psi, const std::vector<DenseOperator>& c_ops,
                      const std::vector<std::vector<std::size_t>>& tuples) {
  const auto ops = sparse_interleaved(c_ops);
  const std::size_t count = ops.size();
  // pair(x, y) = <C_x C_y>
  Eigen::MatrixXcd pair(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(count));
  for (std::size_t y = 0; y < count; ++y) {
    const Eigen::VectorXcd cy = ops[y] * psi;
    for (std::size_t x = 0; x < count; ++x) {
      pair(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = psi.dot(ops[x] * cy);
    }
  }
  WickResult out;
  for (const auto& tuple : tuples) {
    Eigen::VectorXcd v = psi;
    for (std::size_t t : tuple) {
      if (t >= count) throw ContractError("wick_check: operator index out of range");
      v = ops[t] * v;
    }
    const Complex lhs = psi.dot(v);
    const std::size_t m = tuple.size();
    if (m % 2 == 1) {
      out.max_odd_expectation = std::max(out.max_odd_expectation, std::abs(lhs));
      out.max_residual = std::max(out.max_residual, std::abs(lhs));
      continue;
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    double imag = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      for (std::size_t r = s + 1; r < m; ++r) {
        const Complex e = pair(static_cast<Eigen::Index>(tuple[r]), static_cast<Eigen::Index>(tuple[s]));
        imag = std::max(imag, std::abs(e.imag()));
        a(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(r)) = e.real();
        a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) = -e.real();
      }
    }
    const double rhs = linalg::pfaffian(a);
    out.max_residual = std::max(out.max_residual, std::abs(lhs - rhs) + imag);
  }
  return out;
}

WickResult wick_check(const model::ChainParams& params, std::size_t state_index,
                      const std::vector<std::vector<std::size_t>>& tuples) {
  const DenseOperator h = build_H(params);
  const ExactSpectrum spectrum = exact_spectrum(h);
  check_simple_level(spectrum, max_abs(h.matrix), state_index);
  return wick_check(spectrum.states.col(static_cast<Eigen::Index>(state_index)), jordan_wigner(params.n), tuples);
}

std::vector<DenseOperator> bogoliubov_b_ops(const freefermion::BogoliubovDecomposition& decomp,
                                            const std::vector<DenseOperator>& c_ops) {
  if (c_ops.size() != decomp.n) throw ContractError("bogoliubov_b_ops: size mismatch");
  const auto ops = interleaved(c_ops);
  std::vector<DenseOperator> out;
  for (std::size_t i = 0; i < decomp.n; ++i) {
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(ops[0].matrix.rows(), ops[0].matrix.cols());
    for (std::size_t a = 0; a < ops.size(); ++a) {
      const double w = decomp.W(static_cast<Eigen::Index>(2 * i), static_cast<Eigen::Index>(a));
      if (w != 0.0) b += w * ops[a].matrix;
    }
    out.push_back({std::move(b), decomp.n});
  }
  return out;
}

double bogoliubov_hamiltonian_residual(const DenseOperator& H, const std::vector<DenseOperator>& b_ops,
                                       const Eigen::VectorXd& lambdas) {
  Eigen::MatrixXcd r = H.matrix + lambdas.sum() * Eigen::MatrixXcd::Identity(H.matrix.rows(), H.matrix.cols());
  for (std::size_t j = 0; j < b_ops.size(); ++j) {
    r -= 2.0 * lambdas(static_cast<Eigen::Index>(j)) * (b_ops[j].matrix.adjoint() * b_ops[j].matrix);
  }
  return max_abs(r);
}

double number_commutator_residual(const DenseOperator& H, const std::vector<DenseOperator>& b_ops) {
  double worst = 0.0;
  for (const auto& b : b_ops) {
    const Eigen::MatrixXcd num = b.matrix.adjoint() * b.matrix;
    worst = std::max(worst, max_abs(H.matrix * num - num * H.matrix));
  }
  return worst;
}

DenseOperator diagonal_product_state(const std::vector<double>& eta) {
  std::vector<Eigen::Matrix2cd> ops;
  for (double e : eta) {
    if (!(e >= 0.0 && e <= 1.0)) throw ContractError("diagonal_product_state: eta outside [0, 1]");
    Eigen::Matrix2cd d = Eigen::Matrix2cd::Zero();
    d(0, 0) = e;
    d(1, 1) = 1.0 - e;
    ops.push_back(d);
  }
  return tensor_product(ops);
}

double trace_identity_residual(const std::vector<double>& eta) {
  const DenseOperator rho = diagonal_product_state(eta);
  const double lhs = -von_neumann_entropy(rho.matrix);
  const auto gamma = correlation_from_state(rho.matrix, jordan_wigner(eta.size()));
  const Eigen::VectorXd g = linalg::sym_eigenvalues(gamma.matrix);
  double rhs = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (g(i) > 0.0) rhs += g(i) * std::log(g(i));
  }
  return std::abs(lhs - rhs);
}

double local_correlation_residual(const Eigen::VectorXcd& psi, std::size_t n, const SubInterval& sub) {
  const auto full = correlation_from_pure_state(psi, jordan_wigner(n));
  const auto restricted = freefermion::restrict_to(full, sub);
  const auto local = correlation_from_state(reduced_state(psi, n, sub), jordan_wigner(sub.ell));
  return linalg::max_abs(restricted.matrix - local.matrix);
}

}  // namespace xychain::oracle
