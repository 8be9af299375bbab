#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "xychain/errors.hpp"
#include "xychain/freefermion.hpp"
#include "xychain/linalg.hpp"
#include "xychain/oracle.hpp"

using namespace xychain;
using namespace xychain::oracle;
using freefermion::OccupationPattern;
using freefermion::make_subinterval;
using model::DisorderEnsemble;
using model::Uniform;

namespace {

model::ChainParams isotropic(std::size_t n, std::uint64_t seed) {
  return model::sample_params(DisorderEnsemble::isotropic(Uniform{0.5, 1.5}, Uniform{0.0, 5.0}, seed), n, 0);
}

model::ChainParams anisotropic(std::size_t n, std::uint64_t seed, double gamma) {
  auto ens = DisorderEnsemble::anisotropic(Uniform{0.5, 1.5}, model::Constant{gamma}, Uniform{0.0, 5.0}, seed);
  return model::sample_params(ens, n, 0);
}

double hmax(const DenseOperator& h) { return h.matrix.cwiseAbs().maxCoeff(); }

// Kronecker product of Pauli strings from Eigen, independent of build_H.
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

}  // namespace

TEST_CASE("build_H single site") {
  const auto h = build_H(model::make_params({}, {}, {2.0}));
  Eigen::Matrix2cd expected = Eigen::Matrix2cd::Zero();
  expected(0, 0) = -2.0;
  expected(1, 1) = 2.0;
  CHECK((h.matrix - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_H two-site XY spectrum") {
  const auto h = build_H(model::make_params({1.0}, {0.0}, {0.0, 0.0}));
  const auto s = exact_spectrum(h);
  const double expected[] = {-2.0, 0.0, 0.0, 2.0};
  for (int i = 0; i < 4; ++i) CHECK(s.energies(i) == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("build_H is real symmetric and matches Pauli strings") {
  const auto p = anisotropic(4, 3, 0.4);
  const auto h = build_H(p);
  CHECK(h.matrix.imag().cwiseAbs().maxCoeff() == 0.0);
  CHECK((h.matrix - h.matrix.adjoint()).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(16, 16);
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  auto string = [&](std::size_t j, const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
    for (std::size_t s = 0; s < 4; ++s) m = kron(m, s == j ? a : (s == j + 1 ? b : id));
    return m;
  };
  for (std::size_t j = 0; j + 1 < 4; ++j) {
    expected -= p.mu[j] * ((1 + p.gamma[j]) * string(j, pauli_x(), pauli_x()) +
                           (1 - p.gamma[j]) * string(j, pauli_y(), pauli_y()));
  }
  for (std::size_t j = 0; j < 4; ++j) expected -= p.nu[j] * site_operator(4, j, pauli_z()).matrix;
  CHECK((h.matrix - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("oracle refuses sizes over the cap") {
  CHECK_THROWS_AS(jordan_wigner(13), ContractError);
  CHECK_THROWS_AS(build_H(isotropic(13, 0)), ContractError);
}

TEST_CASE("Jordan-Wigner operators") {
  const auto one = jordan_wigner(1);
  CHECK((one[0].matrix - lowering()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((lowering() - 0.5 * (pauli_x() - std::complex<double>(0, 1) * pauli_y())).cwiseAbs().maxCoeff() == 0.0);

  const auto c = jordan_wigner(4);
  CHECK(car_residual(c) <= 1e-12);
  Eigen::VectorXcd vacuum = Eigen::VectorXcd::Zero(16);
  vacuum(15) = 1.0;
  for (const auto& cj : c) CHECK((cj.matrix * vacuum).norm() == 0.0);
}

TEST_CASE("quadratic form H = C* M C") {
  CHECK(verify_quadratic_form(model::make_params({0.0}, {0.0}, {1.0, 2.0})) <= 1e-12);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto p = isotropic(4, seed);
    CHECK(verify_quadratic_form(p) <= 1e-10 * hmax(build_H(p)));
    const auto q = anisotropic(4, seed, 0.7);
    CHECK(verify_quadratic_form(q) <= 1e-10 * hmax(build_H(q)));
  }
}

TEST_CASE("exact spectrum residual and phase convention") {
  const auto h = build_H(anisotropic(5, 9, 0.3));
  const auto s = exact_spectrum(h);
  const auto e = s.energies.cast<std::complex<double>>().asDiagonal();
  CHECK((h.matrix * s.states - s.states * e).cwiseAbs().maxCoeff() <= 1e-9 * hmax(h));
  for (Eigen::Index k = 0; k < s.states.cols(); ++k) {
    Eigen::Index at = 0;
    s.states.col(k).cwiseAbs().maxCoeff(&at);
    CHECK(s.states(at, k).real() > 0.0);
    CHECK(std::abs(s.states(at, k).imag()) <= 1e-15);
  }
}

TEST_CASE("match_spectra") {
  CHECK(match_spectra(model::make_params({0.0}, {0.0}, {1.0, 2.0})) <= 1e-12);
  const auto s = exact_spectrum(build_H(model::make_params({0.0}, {0.0}, {1.0, 2.0})));
  const double expected[] = {-3, -1, 1, 3};
  for (int i = 0; i < 4; ++i) CHECK(s.energies(i) == doctest::Approx(expected[i]));
  for (std::uint64_t seed = 0; seed < 2; ++seed) {
    const auto p = isotropic(8, seed);
    CHECK(match_spectra(p) <= 1e-8 * std::max(1.0, hmax(build_H(p))));
    const auto q = anisotropic(8, seed, 0.5);
    CHECK(match_spectra(q) <= 1e-8 * std::max(1.0, hmax(build_H(q))));
  }
}

TEST_CASE("partial trace preserves trace and positivity") {
  const auto h = build_H(isotropic(6, 2));
  const auto s = exact_spectrum(h);
  const Eigen::VectorXcd psi = s.states.col(7);
  const Eigen::MatrixXcd rho = psi * psi.adjoint();
  for (std::size_t r = 1; r <= 6; ++r) {
    for (std::size_t ell = 1; r + ell - 1 <= 6; ++ell) {
      const auto sub = make_subinterval(r, ell, 6);
      const auto rho1 = partial_trace(rho, 6, sub);
      CHECK(std::abs(rho1.trace() - 1.0) <= 1e-10);
      CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(rho1).eigenvalues().minCoeff() >= -1e-10);
      CHECK((rho1 - reduced_state(psi, 6, sub)).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("partial trace of a product state") {
  // (x)_j diag(eta_j, 1 - eta_j) reduces to the factors on sub.
  const std::vector<double> eta = {0.1, 0.2, 0.3, 0.4};
  const auto rho = diagonal_product_state(eta);
  const auto rho1 = partial_trace(rho.matrix, 4, make_subinterval(2, 2, 4));
  const auto expected = diagonal_product_state({0.2, 0.3});
  CHECK((rho1 - expected.matrix).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("exact entanglement basics") {
  const auto p = isotropic(5, 4);
  for (std::size_t i = 0; i < 32; i += 7) {
    CHECK(exact_entanglement(p, i, make_subinterval(1, 5, 5)) == doctest::Approx(0.0).epsilon(1e-10));
  }
  const auto dec = model::make_params({0, 0, 0}, {0, 0, 0}, {0.3, 1.1, 2.5, 4.7});
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(exact_entanglement(dec, i, make_subinterval(2, 2, 4)) == doctest::Approx(0.0).epsilon(1e-10));
  }
  CHECK_THROWS_AS(exact_entanglement(model::make_params({1.0}, {0.0}, {0.0, 0.0}), 1, make_subinterval(1, 1, 2)),
                  ContractError);
}

TEST_CASE("exact entanglement equals the free-fermion value at n=6") {
  const auto p = isotropic(6, 12);
  const auto d = freefermion::bogoliubov_decompose(model::build_M(p));
  const auto sub = make_subinterval(2, 2, 6);
  const double ff = freefermion::entanglement_entropy(
      freefermion::restrict_to(freefermion::correlation_matrix(d, OccupationPattern::zeros(6)), sub));
  CHECK(std::abs(exact_entanglement(p, 0, sub) - ff) <= 1e-7);
}

TEST_CASE("correlation from simple states") {
  const auto c = jordan_wigner(3);
  Eigen::VectorXcd vacuum = Eigen::VectorXcd::Zero(8);
  vacuum(7) = 1.0;
  const auto g = correlation_from_state(vacuum * vacuum.adjoint(), c).matrix;
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(6, 6);
  for (int j = 0; j < 3; ++j) expected(2 * j, 2 * j) = 1.0;
  CHECK(linalg::max_abs(g - expected) == 0.0);

  const Eigen::MatrixXcd mixed = Eigen::MatrixXcd::Identity(8, 8) / 8.0;
  CHECK(linalg::max_abs(correlation_from_state(mixed, c).matrix - 0.5 * Eigen::MatrixXd::Identity(6, 6)) <= 1e-15);

  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(8, 8) / 4.0;
  CHECK_THROWS_AS(correlation_from_state(bad, c), ContractError);
  Eigen::MatrixXcd negative = Eigen::MatrixXcd::Zero(8, 8);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  CHECK_THROWS_AS(correlation_from_state(negative, c), ContractError);
}

TEST_CASE("eigenstate correlation matches W^t D W at n=4") {
  const auto p = anisotropic(4, 5, 0.5);
  const auto d = freefermion::bogoliubov_decompose(model::build_M(p));
  const auto alpha = OccupationPattern{{1, 0, 0, 1}};
  const auto s = exact_spectrum(build_H(p));
  const auto idx = state_index_for_energy(s, freefermion::many_body_energy(d, alpha), 1e-8);
  const Eigen::VectorXcd psi = s.states.col(static_cast<Eigen::Index>(idx));
  const auto g = correlation_from_state(psi * psi.adjoint(), jordan_wigner(4)).matrix;
  CHECK(linalg::max_abs(g - freefermion::correlation_matrix(d, alpha).matrix) <= 1e-8);
}

TEST_CASE("Wick's rule on eigenstates") {
  const auto p = anisotropic(4, 6, 0.6);
  const std::vector<std::vector<std::size_t>> tuples = {
      {0, 3, 4, 7},            // c_1, c_2*, c_3, c_4*
      {1, 2},                  // m = 2
      {0, 1, 2},               // odd
      {5},                     // odd
      {0, 2, 4, 6, 1, 3},      // m = 6
      {7, 6, 5, 4, 3, 2, 1, 0}};
  for (std::size_t state : {0u, 3u, 9u}) {
    const auto w = wick_check(p, state, tuples);
    CHECK(w.max_residual <= 1e-8);
    CHECK(w.max_odd_expectation <= 1e-12);
  }
  const auto s = exact_spectrum(build_H(p));
  const auto pair_only = wick_check(s.states.col(2), jordan_wigner(4), {{1, 2}, {0, 7}});
  CHECK(pair_only.max_residual <= 1e-15);
}

TEST_CASE("Bogoliubov b operators") {
  const auto p = anisotropic(4, 7, 0.4);
  const auto d = freefermion::bogoliubov_decompose(model::build_M(p));
  const auto h = build_H(p);
  const auto b = bogoliubov_b_ops(d, jordan_wigner(4));
  CHECK(car_residual(b) <= 1e-10);
  CHECK(bogoliubov_hamiltonian_residual(h, b, d.lambdas) <= 1e-9 * hmax(h));
  CHECK(number_commutator_residual(h, b) <= 1e-9 * hmax(h));
}

TEST_CASE("decoupled b operators are c or c* by the sign of nu") {
  const auto d = freefermion::bogoliubov_decompose(model::build_M(model::make_params({0.0}, {0.0}, {1.5, -2.5})));
  const auto c = jordan_wigner(2);
  const auto b = bogoliubov_b_ops(d, c);
  // lambda_1 = 1.5 from site 1 (nu > 0), lambda_2 = 2.5 from site 2 (nu < 0).
  CHECK((b[0].matrix.cwiseAbs() - Eigen::MatrixXcd(c[0].matrix.adjoint()).cwiseAbs()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((b[1].matrix.cwiseAbs() - c[1].matrix.cwiseAbs()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("diagonal product state trace identity") {
  model::SplitMix64 g(77);
  for (int t = 0; t < 5; ++t) {
    std::vector<double> eta(6);
    for (auto& e : eta) e = g.uniform01() * 0.98 + 0.01;
    CHECK(trace_identity_residual(eta) <= 1e-10);
    const auto gamma = correlation_from_state(diagonal_product_state(eta).matrix, jordan_wigner(6)).matrix;
    for (int j = 0; j < 6; ++j) {
      CHECK(gamma(2 * j, 2 * j) == doctest::Approx(1.0 - eta[static_cast<std::size_t>(j)]));
      CHECK(gamma(2 * j + 1, 2 * j + 1) == doctest::Approx(eta[static_cast<std::size_t>(j)]));
    }
  }
}

TEST_CASE("local Jordan-Wigner correlation of the reduced state") {
  const auto p = anisotropic(6, 8, 0.5);
  const auto s = exact_spectrum(build_H(p));
  for (std::size_t state : {0u, 11u, 40u}) {
    const Eigen::VectorXcd psi = s.states.col(static_cast<Eigen::Index>(state));
    for (std::size_t r = 1; r <= 6; ++r) {
      for (std::size_t ell = 1; r + ell - 1 <= 6; ++ell) {
        CHECK(local_correlation_residual(psi, 6, make_subinterval(r, ell, 6)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("state index lookup refuses ambiguous energies") {
  const auto s = exact_spectrum(build_H(model::make_params({1.0}, {0.0}, {0.0, 0.0})));
  CHECK(state_index_for_energy(s, -2.0, 1e-8) == 0);
  CHECK_THROWS_AS(state_index_for_energy(s, 0.0, 1e-8), ContractError);
  CHECK_THROWS_AS(state_index_for_energy(s, 1.0, 1e-8), ContractError);
}
