#include <catch2/catch_amalgamated.hpp>

#include "qclab/channel.hpp"
#include "qclab/pauli.hpp"

using namespace qclab;

namespace {

// Direct Kraus-sum evaluation, kept separate from the library's embedding path.
Mat kraus_sum_oracle(const std::vector<Mat>& kraus, const Mat& rho) {
  Mat out = Mat::Zero(rho.rows(), rho.cols());
  for (const Mat& k : kraus) out += k * rho * k.adjoint();
  return out;
}

}  // namespace

TEST_CASE("channel construction enforces trace preservation") {
  Mat half = 0.5 * Mat::Identity(2, 2);
  REQUIRE_THROWS_AS(QuantumChannel(1, 1, {half}), std::invalid_argument);
  REQUIRE_NOTHROW(identity_channel(2));
}

TEST_CASE("measurement channel dephases the plus state") {
  QuantumChannel meas = measurement_channel(0, 1);
  const double s = 1.0 / std::sqrt(2.0);
  Vec plus(2);
  plus << s, s;
  DensityMatrix rho = to_density(PureState(1, plus));
  std::vector<int> t{0};
  DensityMatrix out = apply_channel(meas, t, rho);
  REQUIRE((out.matrix() - 0.5 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  // Agreement with the raw Kraus sum.
  Mat direct = kraus_sum_oracle(meas.kraus(), rho.matrix());
  REQUIRE((out.matrix() - direct).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("channel embedding acts only on its targets") {
  Rng rng(5);
  DensityMatrix rho(2, random_density_matrix(4, rng));
  QuantumChannel meas = measurement_channel(0, 1);
  std::vector<int> t{1};
  DensityMatrix out = apply_channel(meas, t, rho);
  DensityMatrix other = partial_trace(out, std::vector<int>{0});
  DensityMatrix other_before = partial_trace(rho, std::vector<int>{0});
  REQUIRE((other.matrix() - other_before.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("choi of the identity is the entangled-pair projector") {
  Mat j = choi(identity_channel(1));
  Mat expect = Mat::Zero(4, 4);
  expect(0, 0) = expect(0, 3) = expect(3, 0) = expect(3, 3) = 0.5;
  REQUIRE((j - expect).cwiseAbs().maxCoeff() < 1e-14);
  REQUIRE(std::abs(j.trace().real() - 1.0) < 1e-14);
}

TEST_CASE("choi of the fully depolarizing channel is maximally mixed") {
  Mat j = choi(depolarizing_channel(1.0));
  REQUIRE((j - 0.25 * Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("unitary channels have rank-one choi matrices") {
  Rng rng(9);
  Mat u = random_unitary(2, rng);
  Mat j = choi(unitary_channel(u, 1));
  Eigen::VectorXd evs = hermitian_eigenvalues(j);
  REQUIRE(evs(evs.size() - 1) == Catch::Approx(1.0).margin(1e-10));
  for (Eigen::Index i = 0; i + 1 < evs.size(); ++i) REQUIRE(std::abs(evs(i)) < 1e-10);
}

TEST_CASE("cptp certification accepts channels and rejects broken kraus sets") {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    QuantumChannel phi = random_channel(1, 1, rng);
    REQUIRE(is_cptp(phi));
  }
  // Trace-decreasing map: drop one Kraus operator and renormalize unevenly.
  Mat k0 = Mat::Zero(2, 2);
  k0(0, 0) = 1.0;
  Mat j = choi(QuantumChannel(1, 1, {k0, Mat::Zero(2, 2).eval()}, 10.0));
  REQUIRE_FALSE(is_cptp_choi(j, 1, 1));
}

TEST_CASE("channel reconstruction from choi round-trips the action") {
  Rng rng(17);
  QuantumChannel phi = random_channel(1, 1, rng);
  QuantumChannel back = channel_from_choi(choi(phi), 1, 1);
  DensityMatrix rho(1, random_density_matrix(2, rng));
  Mat a = phi.apply_full(rho.matrix());
  Mat b = back.apply_full(rho.matrix());
  REQUIRE((a - b).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("trace distance contracts under channels") {
  Rng rng(29);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(2));
    const auto d = static_cast<Eigen::Index>(dim_of(n));
    DensityMatrix rho(n, random_density_matrix(d, rng));
    DensityMatrix sigma(n, random_density_matrix(d, rng));
    QuantumChannel phi = random_channel(n, 1, rng);
    DensityMatrix pr(n, 0.5 * (phi.apply_full(rho.matrix()) +
                               phi.apply_full(rho.matrix()).adjoint()));
    DensityMatrix ps(n, 0.5 * (phi.apply_full(sigma.matrix()) +
                               phi.apply_full(sigma.matrix()).adjoint()));
    REQUIRE(trace_distance(pr, ps) <= trace_distance(rho, sigma) + 1e-12);
  }
}

TEST_CASE("single qubit identity expands over the z eigenstates") {
  PauliProdDecomposition dec = pauli_decompose(Mat::Identity(2, 2), 1);
  REQUIRE(dec.terms.size() == 2);
  for (const auto& term : dec.terms) {
    REQUIRE((term.labels[0] == PauliEig::Zp || term.labels[0] == PauliEig::Zm));
    REQUIRE(std::abs(term.coefficient - cplx(1.0, 0.0)) < 1e-12);
  }
}

TEST_CASE("pauli x expands as plus minus minus") {
  Mat x(2, 2);
  x << 0, 1, 1, 0;
  PauliProdDecomposition dec = pauli_decompose(x, 1);
  REQUIRE(dec.terms.size() == 2);
  for (const auto& term : dec.terms) {
    if (term.labels[0] == PauliEig::Xp)
      REQUIRE(std::abs(term.coefficient - cplx(1.0, 0.0)) < 1e-12);
    else {
      REQUIRE(term.labels[0] == PauliEig::Xm);
      REQUIRE(std::abs(term.coefficient - cplx(-1.0, 0.0)) < 1e-12);
    }
  }
}

TEST_CASE("pauli decomposition round-trips random operators") {
  Rng rng(37);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(3));
    const auto d = static_cast<Eigen::Index>(dim_of(n));
    Mat m = ginibre(d, d, rng);
    Mat back = pauli_reconstruct(pauli_decompose(m, n));
    REQUIRE((m - back).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("eigenstate labels enumerate all products") {
  REQUIRE(pauliprod_count(3) == 216);
  std::vector<PauliEig> first = pauliprod_label(0, 2);
  REQUIRE(first[0] == PauliEig::Zp);
  REQUIRE(first[1] == PauliEig::Zp);
  std::vector<PauliEig> last = pauliprod_label(35, 2);
  REQUIRE(last[0] == PauliEig::Ym);
  REQUIRE(last[1] == PauliEig::Ym);
  REQUIRE(to_string(PauliEig::Yp) == "Y+");
}
