#include <catch2/catch_amalgamated.hpp>

#include "qclab/qstate.hpp"

using namespace qclab;

namespace {

// Independent check value: trace norm via singular values instead of the
// Hermitian eigendecomposition the library uses.
double trace_distance_svd_oracle(const Mat& rho, const Mat& sigma) {
  Eigen::JacobiSVD<Mat> svd(rho - sigma);
  return 0.5 * svd.singularValues().sum();
}

std::vector<int> qubits(std::initializer_list<int> l) { return std::vector<int>(l); }

}  // namespace

TEST_CASE("basis states and normalization invariants") {
  PureState z = PureState::zero(3);
  REQUIRE(z.amplitudes()(0) == cplx(1.0, 0.0));
  REQUIRE(z.num_qubits() == 3);

  Vec bad = Vec::Zero(4);
  bad(0) = 2.0;
  REQUIRE_THROWS_AS(PureState(2, bad), std::invalid_argument);

  Mat not_herm = Mat::Zero(2, 2);
  not_herm(0, 1) = 1.0;
  not_herm(0, 0) = 1.0;
  REQUIRE_THROWS_AS(DensityMatrix(1, not_herm), std::invalid_argument);
}

TEST_CASE("qubit 0 is the most significant bit") {
  // X on qubit 0 of two qubits maps |00> to |10> = index 2.
  Mat x(2, 2);
  x << 0, 1, 1, 0;
  PureState psi = PureState::zero(2);
  std::vector<int> t{0};
  PureState out = apply_unitary(x, t, psi);
  REQUIRE(std::abs(out.amplitudes()(2) - cplx(1.0, 0.0)) < 1e-15);
}

TEST_CASE("tensor of random pure states stays pure") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    PureState a(2, random_statevector(4, rng));
    PureState b(1, random_statevector(2, rng));
    DensityMatrix joint = to_density(tensor(a, b));
    REQUIRE(joint.purity() == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("unitary application basics") {
  Mat x(2, 2), h(2, 2);
  x << 0, 1, 1, 0;
  const double s = 1.0 / std::sqrt(2.0);
  h << s, s, s, -s;

  PureState psi = PureState::zero(1);
  std::vector<int> t{0};
  PureState flipped = apply_unitary(x, t, psi);
  REQUIRE(std::abs(flipped.amplitudes()(1) - cplx(1.0, 0.0)) < 1e-15);

  PureState twice = apply_unitary(h, t, apply_unitary(h, t, psi));
  REQUIRE((twice.amplitudes() - psi.amplitudes()).norm() < 1e-12);

  Mat not_unitary = Mat::Identity(2, 2) * 2.0;
  REQUIRE_THROWS_AS(apply_unitary(not_unitary, t, psi), std::invalid_argument);

  std::vector<int> bad{5};
  REQUIRE_THROWS_AS(apply_unitary(x, bad, psi), std::invalid_argument);

  Rng rng(7);
  DensityMatrix rho(2, random_density_matrix(4, rng));
  Mat u = random_unitary(4, rng);
  std::vector<int> both{0, 1};
  DensityMatrix evolved = apply_unitary(u, both, rho);
  REQUIRE(evolved.matrix().trace().real() == Catch::Approx(1.0).margin(1e-12));
  // Direct conjugation agrees with the kernel path.
  Mat direct = u * rho.matrix() * u.adjoint();
  REQUIRE((evolved.matrix() - direct).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("partial trace recovers tensor factors") {
  Rng rng(23);
  DensityMatrix a(1, random_density_matrix(2, rng));
  DensityMatrix b(2, random_density_matrix(4, rng));
  DensityMatrix joint = tensor(a, b);
  DensityMatrix ra = partial_trace(joint, qubits({0}));
  DensityMatrix rb = partial_trace(joint, qubits({1, 2}));
  REQUIRE((ra.matrix() - a.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE((rb.matrix() - b.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("half of an entangled pair is maximally mixed") {
  Vec bell = Vec::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  PureState pair(2, bell);
  DensityMatrix half = partial_trace(pair, qubits({0}));
  REQUIRE((half.matrix() - 0.5 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("trace distance endpoints") {
  DensityMatrix zero = DensityMatrix::basis(1, 0);
  DensityMatrix one = DensityMatrix::basis(1, 1);
  REQUIRE(trace_distance(zero, zero) == 0.0);
  REQUIRE(trace_distance(zero, one) == 1.0);
  REQUIRE(helstrom_success(zero, one) == 1.0);
}

TEST_CASE("equal mixture of orthogonal states sits at distance one half") {
  DensityMatrix zero = DensityMatrix::basis(1, 0);
  DensityMatrix one = DensityMatrix::basis(1, 1);
  Mat mix = 0.5 * zero.matrix() + 0.5 * one.matrix();
  DensityMatrix mixture(1, mix);
  REQUIRE(trace_distance(mixture, zero) == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(helstrom_success(mixture, zero) == Catch::Approx(0.75).margin(1e-12));
}

TEST_CASE("trace distance matches the singular-value oracle") {
  Rng rng(341);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(2));
    const auto d = static_cast<Eigen::Index>(dim_of(n));
    DensityMatrix rho(n, random_density_matrix(d, rng));
    DensityMatrix sigma(n, random_density_matrix(d, rng));
    const double expect = trace_distance_svd_oracle(rho.matrix(), sigma.matrix());
    REQUIRE(trace_distance(rho, sigma) == Catch::Approx(expect).margin(1e-12));
  }
}

TEST_CASE("qubit caps raise budget errors") {
  Limits saved = limits();
  limits().max_pure_qubits = 3;
  REQUIRE_THROWS_AS(PureState::zero(4), budget_error);
  limits() = saved;
}
