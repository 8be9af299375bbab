#pragma once

// Brute-force 2^n validation layer. Everything here is built from Pauli
// matrices on the full tensor product space.
//
// Basis layout: site 1 is the most significant bit of a basis index, and
// local state 0 = (1, 0) has sigma_Z = +1. Zero-based site j therefore sits
// at bit (n - 1 - j). The vacuum of the c-operators is (0, 1)^{(x) n}, i.e.
// the basis index with every bit set.

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "xychain/freefermion.hpp"
#include "xychain/model.hpp"

namespace xychain::oracle {

inline constexpr std::size_t kOracleCap = 12;
inline constexpr double kCarTolerance = 1e-12;
inline constexpr double kQuadraticFormTolerance = 1e-10;  // times |H|_max
inline constexpr double kSpectrumResidual = 1e-9;         // times |H|_max
inline constexpr double kSpectrumMatchTolerance = 1e-8;   // times max(1, |H|_max)
inline constexpr double kDegeneracyTolerance = 1e-8;      // times max(1, |H|_max)
inline constexpr double kDensityTolerance = 1e-10;
inline constexpr double kWickTolerance = 1e-8;

using Complex = std::complex<double>;

struct DenseOperator {
  Eigen::MatrixXcd matrix;
  std::size_t n = 0;
};

/// Throws ContractError when n exceeds the cap.
void check_cap(std::size_t n, std::size_t cap = kOracleCap);

/// (x)_j ops[j], ops[0] acting on site 1.
DenseOperator tensor_product(const std::vector<Eigen::Matrix2cd>& ops);

/// op on zero-based site j, identity elsewhere.
DenseOperator site_operator(std::size_t n, std::size_t j, const Eigen::Matrix2cd& op);

Eigen::Matrix2cd pauli_x();
Eigen::Matrix2cd pauli_y();
Eigen::Matrix2cd pauli_z();
/// a = [[0, 0], [1, 0]] = (sigma_X - i sigma_Y) / 2.
Eigen::Matrix2cd lowering();

DenseOperator build_H(const model::ChainParams& params);

/// c_j = sigma_Z_1 ... sigma_Z_{j-1} a_j for j = 1..n (returned zero-based).
std::vector<DenseOperator> jordan_wigner(std::size_t n);

/// max over pairs of |{x_j, x_k*} - delta_jk I|_max and |{x_j, x_k}|_max.
double car_residual(const std::vector<DenseOperator>& ops);

/// Interleaved C = (c_1, c_1*, ..., c_n, c_n*).
std::vector<DenseOperator> interleaved(const std::vector<DenseOperator>& c_ops);

/// |build_H - sum_ab (C_a)* M_ab C_b|_max.
double verify_quadratic_form(const model::ChainParams& params);

struct ExactSpectrum {
  Eigen::VectorXd energies;  // ascending
  Eigen::MatrixXcd states;   // columns, largest component real positive
};

/// Throws NumericalError if |H S - S E|_max > 1e-9 |H|_max.
ExactSpectrum exact_spectrum(const DenseOperator& H);

double min_level_spacing(const ExactSpectrum& spectrum);

/// Index of the exact eigenvalue closest to energy. Refuses (ContractError)
/// when no level lies within tol or a second level does.
std::size_t state_index_for_energy(const ExactSpectrum& spectrum, double energy,
                                   double tol);

/// Reduced state on sub of a density matrix on n sites. The complement is
/// traced out as (left segment) (x) sub (x) (right segment).
Eigen::MatrixXcd partial_trace(const Eigen::MatrixXcd& rho, std::size_t n,
                               const freefermion::SubInterval& sub);

/// Reduced state of |psi><psi| without forming the full density matrix.
Eigen::MatrixXcd reduced_state(const Eigen::VectorXcd& psi, std::size_t n,
                               const freefermion::SubInterval& sub);

/// -Tr rho log rho. Throws ContractError unless trace is 1 and the spectrum
/// is >= -1e-10.
double von_neumann_entropy(const Eigen::MatrixXcd& rho);

/// Entropy of the reduced eigenstate state_index (ascending energy order).
/// Refuses when that level is degenerate within 1e-8 max(1, |H|_max).
double exact_entanglement(const model::ChainParams& params, std::size_t state_index,
                          const freefermion::SubInterval& sub);

double exact_entanglement(const ExactSpectrum& spectrum, double h_scale, std::size_t n,
                          std::size_t state_index, const freefermion::SubInterval& sub);

/// max |sorted E_alpha - sorted exact energies|.
double match_spectra(const model::ChainParams& params);

/// Gamma(a, b) = Tr(C_a C_b* rho) for the interleaved C built from c_ops.
/// rho must have unit trace, be Hermitian and PSD to 1e-10 (ContractError).
/// The result must be real to 1e-10 (NumericalError otherwise).
freefermion::CorrelationMatrix correlation_from_state(
    const Eigen::MatrixXcd& rho, const std::vector<DenseOperator>& c_ops);

freefermion::CorrelationMatrix correlation_from_pure_state(
    const Eigen::VectorXcd& psi, const std::vector<DenseOperator>& c_ops);

struct WickResult {
  double max_residual = 0.0;
  double max_odd_expectation = 0.0;
};

/// Operator index t in a tuple selects C_t: even t is c_{t/2}, odd t is
/// c_{t/2}*. A tuple (t_1, ..., t_m) stands for D_m ... D_1 (D_1 applied
/// first); its expectation in eigenstate state_index is compared with the
/// Pfaffian of the pair expectations A_{s,r} = <D_r D_s>, s < r.
WickResult wick_check(const model::ChainParams& params, std::size_t state_index,
                      const std::vector<std::vector<std::size_t>>& tuples);

WickResult wick_check(const Eigen::VectorXcd& psi, const std::vector<DenseOperator>& c_ops,
                      const std::vector<std::vector<std::size_t>>& tuples);

/// b_i = sum_a W(2i, a) C_a.
std::vector<DenseOperator> bogoliubov_b_ops(const freefermion::BogoliubovDecomposition& decomp,
                                            const std::vector<DenseOperator>& c_ops);

/// |H - 2 sum_j lambda_j b_j* b_j + (sum_j lambda_j) I|_max.
double bogoliubov_hamiltonian_residual(const DenseOperator& H,
                                       const std::vector<DenseOperator>& b_ops,
                                       const Eigen::VectorXd& lambdas);

/// max_j |[H, b_j* b_j]|_max.
double number_commutator_residual(const DenseOperator& H,
                                  const std::vector<DenseOperator>& b_ops);

/// (x)_j diag(eta_j, 1 - eta_j).
DenseOperator diagonal_product_state(const std::vector<double>& eta);

/// |Tr rho log rho - tr Gamma log Gamma| with Gamma computed from rho.
double trace_identity_residual(const std::vector<double>& eta);

/// Local Jordan-Wigner check: the restriction of the eigenstate correlation
/// matrix to sub equals the correlation matrix of the reduced state with
/// respect to jordan_wigner(ell). Returns the max deviation.
double local_correlation_residual(const Eigen::VectorXcd& psi, std::size_t n,
                                  const freefermion::SubInterval& sub);

}  // namespace xychain::oracle
