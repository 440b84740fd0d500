#pragma once

// Completely positive trace-preserving maps in Kraus form, their Choi
// matrices, and CPTP certification.
//
// Choi convention: J(Phi) = (Phi ox I)(|omega><omega|) with the maximally
// entangled state normalized by 1/d, so J is a density matrix for CPTP maps.
// Index order of J is (output ox input).

#include <span>
#include <vector>

#include "qclab/common.hpp"
#include "qclab/linalg.hpp"
#include "qclab/qstate.hpp"

namespace qclab {

class QuantumChannel {
 public:
  QuantumChannel(int in_qubits, int out_qubits, std::vector<Mat> kraus,
                 double tol = 1e-10)
      : in_qubits_(in_qubits), out_qubits_(out_qubits), kraus_(std::move(kraus)) {
    require(in_qubits >= 1 && out_qubits >= 1, "channel needs nonempty registers");
    require(!kraus_.empty(), "channel needs at least one Kraus operator");
    const auto din = static_cast<Eigen::Index>(dim_of(in_qubits));
    const auto dout = static_cast<Eigen::Index>(dim_of(out_qubits));
    Mat sum = Mat::Zero(din, din);
    for (const Mat& k : kraus_) {
      require(k.rows() == dout && k.cols() == din, "Kraus operator has wrong shape");
      sum += k.adjoint() * k;
    }
    sum -= Mat::Identity(din, din);
    require(sum.cwiseAbs().maxCoeff() <= tol,
            "Kraus operators do not satisfy the trace-preservation identity");
  }

  int in_qubits() const { return in_qubits_; }
  int out_qubits() const { return out_qubits_; }
  const std::vector<Mat>& kraus() const { return kraus_; }

  /// Action on a full-register density matrix (square channels only).
  Mat apply_full(const Mat& rho) const {
    Mat out = Mat::Zero(static_cast<Eigen::Index>(dim_of(out_qubits_)),
                        static_cast<Eigen::Index>(dim_of(out_qubits_)));
    for (const Mat& k : kraus_) out += k * rho * k.adjoint();
    return out;
  }

 private:
  int in_qubits_;
  int out_qubits_;
  std::vector<Mat> kraus_;
};

inline QuantumChannel unitary_channel(const Mat& u, int qubits) {
  require(is_unitary_matrix(u), "matrix is not unitary");
  return QuantumChannel(qubits, qubits, {u});
}

inline QuantumChannel identity_channel(int qubits) {
  const auto d = static_cast<Eigen::Index>(dim_of(qubits));
  return QuantumChannel(qubits, qubits, {Mat::Identity(d, d)});
}

/// Unrecorded computational-basis measurement of one qubit (of `qubits`),
/// i.e. dephasing by the projectors onto that qubit's 0/1 subspaces.
inline QuantumChannel measurement_channel(int qubit, int qubits) {
  require(qubit >= 0 && qubit < qubits, "measured qubit out of range");
  const auto d = static_cast<Eigen::Index>(dim_of(qubits));
  Mat p0 = Mat::Zero(d, d), p1 = Mat::Zero(d, d);
  for (std::uint64_t i = 0; i < dim_of(qubits); ++i) {
    auto idx = static_cast<Eigen::Index>(i);
    (bit_of(i, qubit, qubits) ? p1 : p0)(idx, idx) = 1.0;
  }
  return QuantumChannel(qubits, qubits, {p0, p1});
}

inline QuantumChannel depolarizing_channel(double lambda) {
  require(lambda >= 0.0 && lambda <= 1.0, "depolarizing strength must lie in [0,1]");
  Mat i2 = Mat::Identity(2, 2);
  Mat x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, cplx(0, -1), cplx(0, 1), 0;
  z << 1, 0, 0, -1;
  const double a = std::sqrt(1.0 - 0.75 * lambda);
  const double b = std::sqrt(0.25 * lambda);
  return QuantumChannel(1, 1, {a * i2, b * x, b * y, b * z});
}

/// Random CPTP channel: Kraus operators from a Haar unitary on system+env,
/// read out column-block by column-block (a Stinespring dilation slice).
inline QuantumChannel random_channel(int qubits, int env_qubits, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(dim_of(qubits));
  const auto de = static_cast<Eigen::Index>(dim_of(env_qubits));
  Mat u = random_unitary(d * de, rng);
  std::vector<Mat> kraus;
  kraus.reserve(static_cast<size_t>(de));
  // Columns j*de+0 of u, viewed per environment row block, give Sum K^dag K = I.
  for (Eigen::Index e = 0; e < de; ++e) {
    Mat k(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) k(r, c) = u(r * de + e, c * de);
    kraus.push_back(std::move(k));
  }
  return QuantumChannel(qubits, qubits, std::move(kraus));
}

/// Choi matrix with the 1/d normalization, J = 1/d sum_K vec(K) vec(K)^dag,
/// where vec stacks K|i> blocks in (output ox input) order.
inline Mat choi(const QuantumChannel& phi) {
  const auto din = static_cast<Eigen::Index>(dim_of(phi.in_qubits()));
  const auto dout = static_cast<Eigen::Index>(dim_of(phi.out_qubits()));
  Mat j = Mat::Zero(dout * din, dout * din);
  for (const Mat& k : phi.kraus()) {
    Vec v(dout * din);
    for (Eigen::Index out = 0; out < dout; ++out)
      for (Eigen::Index in = 0; in < din; ++in) v(out * din + in) = k(out, in);
    j += v * v.adjoint();
  }
  return j / static_cast<double>(din);
}

/// CPTP certification from an (normalized) Choi matrix: positive semidefinite
/// within tol and input marginal of d*J equal to the identity within tol.
inline bool is_cptp_choi(const Mat& j, int in_qubits, int out_qubits, double tol = 1e-10) {
  const auto din = static_cast<Eigen::Index>(dim_of(in_qubits));
  const auto dout = static_cast<Eigen::Index>(dim_of(out_qubits));
  if (j.rows() != din * dout || j.cols() != din * dout) return false;
  if (!is_hermitian(j, tol)) return false;
  if (hermitian_eigenvalues(j).minCoeff() < -tol) return false;
  Mat traced = Mat::Zero(din, din);
  for (Eigen::Index a = 0; a < din; ++a)
    for (Eigen::Index b = 0; b < din; ++b) {
      cplx sum = 0.0;
      for (Eigen::Index o = 0; o < dout; ++o) sum += j(o * din + a, o * din + b);
      traced(a, b) = sum * static_cast<double>(din);
    }
  traced -= Mat::Identity(din, din);
  return traced.cwiseAbs().maxCoeff() <= tol;
}

inline bool is_cptp(const QuantumChannel& phi, double tol = 1e-10) {
  return is_cptp_choi(choi(phi), phi.in_qubits(), phi.out_qubits(), tol);
}

/// Kraus decomposition of a channel given its normalized Choi matrix.
inline QuantumChannel channel_from_choi(const Mat& j, int in_qubits, int out_qubits,
                                        double tol = 1e-9) {
  require(is_cptp_choi(j, in_qubits, out_qubits, tol), "Choi matrix is not CPTP");
  const auto din = static_cast<Eigen::Index>(dim_of(in_qubits));
  const auto dout = static_cast<Eigen::Index>(dim_of(out_qubits));
  Mat unnorm = 0.5 * (j + j.adjoint()) * static_cast<double>(din);
  Eigen::SelfAdjointEigenSolver<Mat> solver(unnorm);
  std::vector<Mat> kraus;
  for (Eigen::Index e = 0; e < solver.eigenvalues().size(); ++e) {
    const double lambda = solver.eigenvalues()(e);
    if (lambda <= tol) continue;
    Vec v = std::sqrt(lambda) * solver.eigenvectors().col(e);
    Mat k(dout, din);
    for (Eigen::Index out = 0; out < dout; ++out)
      for (Eigen::Index in = 0; in < din; ++in) k(out, in) = v(out * din + in);
    kraus.push_back(std::move(k));
  }
  return QuantumChannel(in_qubits, out_qubits, std::move(kraus), 1e-7);
}

namespace detail {

inline Mat embed_operator(const Mat& k, std::span<const int> targets, int n) {
  const int kq = static_cast<int>(targets.size());
  const std::uint64_t gate_dim = dim_of(kq);
  const std::uint64_t dim = dim_of(n);
  std::vector<std::uint64_t> offset(gate_dim, 0);
  std::uint64_t target_mask = 0;
  for (int j = 0; j < kq; ++j) target_mask |= 1ull << bitpos(targets[j], n);
  for (std::uint64_t g = 0; g < gate_dim; ++g) {
    std::uint64_t off = 0;
    for (int j = 0; j < kq; ++j)
      if (g >> (kq - 1 - j) & 1ull) off |= 1ull << bitpos(targets[j], n);
    offset[g] = off;
  }
  Mat full = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::uint64_t base = 0; base < dim; ++base) {
    if (base & target_mask) continue;
    for (std::uint64_t r = 0; r < gate_dim; ++r)
      for (std::uint64_t c = 0; c < gate_dim; ++c)
        full(static_cast<Eigen::Index>(base | offset[r]),
             static_cast<Eigen::Index>(base | offset[c])) =
            k(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  return full;
}

}  // namespace detail

/// Applies a square channel to a subset of qubits of a density matrix.
inline DensityMatrix apply_channel(const QuantumChannel& phi, std::span<const int> targets,
                                   const DensityMatrix& rho) {
  detail::check_targets(targets, rho.num_qubits());
  require(phi.in_qubits() == phi.out_qubits(), "embedded channel must preserve register size");
  require(phi.in_qubits() == static_cast<int>(targets.size()),
          "channel register does not match target count");
  const auto d = static_cast<Eigen::Index>(dim_of(rho.num_qubits()));
  Mat out = Mat::Zero(d, d);
  for (const Mat& k : phi.kraus()) {
    Mat kf = detail::embed_operator(k, targets, rho.num_qubits());
    out += kf * rho.matrix() * kf.adjoint();
  }
  return DensityMatrix(rho.num_qubits(), 0.5 * (out + out.adjoint()));
}

}  // namespace qclab
