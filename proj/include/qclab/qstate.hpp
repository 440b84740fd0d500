#pragma once

// Exact quantum states on small registers.
//
// Convention used everywhere: qubit 0 is the most significant bit of the
// basis-state integer, so |q0 q1 ... q_{n-1}> has index sum q_i 2^(n-1-i),
// and tensor(a, b) places a on the lower-indexed qubits.

#include <span>
#include <vector>

#include "qclab/common.hpp"
#include "qclab/linalg.hpp"

namespace qclab {

constexpr double state_atol = 1e-12;

class PureState {
 public:
  PureState(int num_qubits, Vec amplitudes)
      : num_qubits_(num_qubits), amp_(std::move(amplitudes)) {
    require(num_qubits >= 1, "pure state needs at least one qubit");
    if (num_qubits > limits().max_pure_qubits)
      throw budget_error("pure state exceeds max_pure_qubits; raise qclab::limits()");
    require(amp_.size() == static_cast<Eigen::Index>(dim_of(num_qubits)),
            "amplitude count does not match qubit count");
    require(std::abs(amp_.norm() - 1.0) <= state_atol, "pure state is not normalized");
  }

  static PureState basis(int num_qubits, std::uint64_t index) {
    Vec v = Vec::Zero(static_cast<Eigen::Index>(dim_of(num_qubits)));
    require(index < dim_of(num_qubits), "basis index out of range");
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return PureState(num_qubits, std::move(v));
  }

  static PureState zero(int num_qubits) { return basis(num_qubits, 0); }

  int num_qubits() const { return num_qubits_; }
  const Vec& amplitudes() const { return amp_; }

 private:
  int num_qubits_;
  Vec amp_;
};

class DensityMatrix {
 public:
  DensityMatrix(int num_qubits, Mat rho)
      : num_qubits_(num_qubits), rho_(std::move(rho)) {
    require(num_qubits >= 1, "density matrix needs at least one qubit");
    if (num_qubits > limits().max_epr_density_qubits)
      throw budget_error("density matrix exceeds max_epr_density_qubits; raise qclab::limits()");
    const auto d = static_cast<Eigen::Index>(dim_of(num_qubits));
    require(rho_.rows() == d && rho_.cols() == d, "density matrix has wrong dimension");
    require(is_hermitian(rho_, state_atol), "density matrix is not Hermitian");
    require(std::abs(rho_.trace().real() - 1.0) <= state_atol &&
                std::abs(rho_.trace().imag()) <= state_atol,
            "density matrix trace is not 1");
    Eigen::VectorXd evs = hermitian_eigenvalues(rho_);
    require(evs.minCoeff() >= -1e-10, "density matrix has a negative eigenvalue");
  }

  static DensityMatrix basis(int num_qubits, std::uint64_t index) {
    const auto d = static_cast<Eigen::Index>(dim_of(num_qubits));
    require(index < dim_of(num_qubits), "basis index out of range");
    Mat rho = Mat::Zero(d, d);
    rho(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
    return DensityMatrix(num_qubits, std::move(rho));
  }

  static DensityMatrix maximally_mixed(int num_qubits) {
    const auto d = static_cast<Eigen::Index>(dim_of(num_qubits));
    return DensityMatrix(num_qubits, Mat::Identity(d, d) / static_cast<double>(d));
  }

  int num_qubits() const { return num_qubits_; }
  const Mat& matrix() const { return rho_; }
  double purity() const { return (rho_ * rho_).trace().real(); }

 private:
  int num_qubits_;
  Mat rho_;
};

inline DensityMatrix to_density(const PureState& psi) {
  Mat rho = psi.amplitudes() * psi.amplitudes().adjoint();
  return DensityMatrix(psi.num_qubits(), std::move(rho));
}

inline PureState tensor(const PureState& a, const PureState& b) {
  return PureState(a.num_qubits() + b.num_qubits(), kron(a.amplitudes(), b.amplitudes()));
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(a.num_qubits() + b.num_qubits(), kron(a.matrix(), b.matrix()));
}

namespace detail {

inline void check_targets(std::span<const int> targets, int n) {
  require(!targets.empty(), "gate needs at least one target");
  std::uint64_t seen = 0;
  for (int t : targets) {
    require(t >= 0 && t < n, "gate target out of range");
    require(!(seen >> t & 1ull), "gate targets repeat a qubit");
    seen |= 1ull << t;
  }
}

/// Applies a k-qubit unitary to the amplitude vector of an n-qubit register.
/// targets[0] is the most significant bit of the gate's own index space.
inline void apply_gate_to_vec(Vec& psi, const Mat& u, std::span<const int> targets, int n) {
  const int k = static_cast<int>(targets.size());
  const std::uint64_t gate_dim = dim_of(k);
  std::uint64_t target_mask = 0;
  std::vector<std::uint64_t> offset(gate_dim, 0);
  for (int j = 0; j < k; ++j) target_mask |= 1ull << bitpos(targets[j], n);
  for (std::uint64_t g = 0; g < gate_dim; ++g) {
    std::uint64_t off = 0;
    for (int j = 0; j < k; ++j)
      if (g >> (k - 1 - j) & 1ull) off |= 1ull << bitpos(targets[j], n);
    offset[g] = off;
  }
  Vec scratch(static_cast<Eigen::Index>(gate_dim));
  const std::uint64_t dim = dim_of(n);
  for (std::uint64_t base = 0; base < dim; ++base) {
    if (base & target_mask) continue;
    for (std::uint64_t g = 0; g < gate_dim; ++g)
      scratch(static_cast<Eigen::Index>(g)) = psi(static_cast<Eigen::Index>(base | offset[g]));
    Vec mixed = u * scratch;
    for (std::uint64_t g = 0; g < gate_dim; ++g)
      psi(static_cast<Eigen::Index>(base | offset[g])) = mixed(static_cast<Eigen::Index>(g));
  }
}

/// Applies a basis-state permutation pi (given on the targets' local index
/// space) to the amplitude vector: amp'[pi(g)] = amp[g] within each block.
inline void apply_perm_to_vec(Vec& psi, std::span<const std::uint64_t> perm,
                              std::span<const int> targets, int n) {
  const int k = static_cast<int>(targets.size());
  const std::uint64_t gate_dim = dim_of(k);
  std::uint64_t target_mask = 0;
  std::vector<std::uint64_t> offset(gate_dim, 0);
  for (int j = 0; j < k; ++j) target_mask |= 1ull << bitpos(targets[j], n);
  for (std::uint64_t g = 0; g < gate_dim; ++g) {
    std::uint64_t off = 0;
    for (int j = 0; j < k; ++j)
      if (g >> (k - 1 - j) & 1ull) off |= 1ull << bitpos(targets[j], n);
    offset[g] = off;
  }
  Vec scratch(static_cast<Eigen::Index>(gate_dim));
  const std::uint64_t dim = dim_of(n);
  for (std::uint64_t base = 0; base < dim; ++base) {
    if (base & target_mask) continue;
    for (std::uint64_t g = 0; g < gate_dim; ++g)
      scratch(static_cast<Eigen::Index>(g)) = psi(static_cast<Eigen::Index>(base | offset[g]));
    for (std::uint64_t g = 0; g < gate_dim; ++g)
      psi(static_cast<Eigen::Index>(base | offset[perm[g]])) = scratch(static_cast<Eigen::Index>(g));
  }
}

inline void apply_gate_to_columns(Mat& m, const Mat& u, std::span<const int> targets, int n) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Vec col = m.col(c);
    apply_gate_to_vec(col, u, targets, n);
    m.col(c) = col;
  }
}

}  // namespace detail

inline PureState apply_unitary(const Mat& u, std::span<const int> targets, const PureState& psi) {
  detail::check_targets(targets, psi.num_qubits());
  require(u.rows() == u.cols() &&
              u.rows() == static_cast<Eigen::Index>(dim_of(static_cast<int>(targets.size()))),
          "unitary dimension does not match target count");
  require(is_unitary_matrix(u), "matrix is not unitary");
  Vec amp = psi.amplitudes();
  detail::apply_gate_to_vec(amp, u, targets, psi.num_qubits());
  return PureState(psi.num_qubits(), std::move(amp));
}

inline DensityMatrix apply_unitary(const Mat& u, std::span<const int> targets,
                                   const DensityMatrix& rho) {
  detail::check_targets(targets, rho.num_qubits());
  require(u.rows() == u.cols() &&
              u.rows() == static_cast<Eigen::Index>(dim_of(static_cast<int>(targets.size()))),
          "unitary dimension does not match target count");
  require(is_unitary_matrix(u), "matrix is not unitary");
  Mat m = rho.matrix();
  detail::apply_gate_to_columns(m, u, targets, rho.num_qubits());  // U rho
  m.adjointInPlace();
  detail::apply_gate_to_columns(m, u, targets, rho.num_qubits());  // U (U rho)^dag
  m.adjointInPlace();
  return DensityMatrix(rho.num_qubits(), 0.5 * (m + m.adjoint()));
}

/// Reduced state on `keep` (strictly increasing qubit indices); output qubit j
/// corresponds to keep[j].
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  const int n = rho.num_qubits();
  require(!keep.empty(), "partial trace must keep at least one qubit");
  for (size_t i = 0; i < keep.size(); ++i) {
    require(keep[i] >= 0 && keep[i] < n, "kept qubit out of range");
    require(i == 0 || keep[i] > keep[i - 1], "kept qubits must be strictly increasing");
  }
  const int k = static_cast<int>(keep.size());
  std::vector<int> traced;
  for (int q = 0; q < n; ++q) {
    bool kept = false;
    for (int kq : keep) kept |= (kq == q);
    if (!kept) traced.push_back(q);
  }
  const std::uint64_t kd = dim_of(k), td = dim_of(n - k);
  auto merge = [&](std::uint64_t kept_bits, std::uint64_t traced_bits) {
    std::uint64_t idx = 0;
    for (int j = 0; j < k; ++j)
      idx = set_bit(idx, keep[j], n, static_cast<int>(kept_bits >> (k - 1 - j) & 1ull));
    for (size_t j = 0; j < traced.size(); ++j)
      idx = set_bit(idx, traced[j], n,
                    static_cast<int>(traced_bits >> (traced.size() - 1 - j) & 1ull));
    return idx;
  };
  Mat out = Mat::Zero(static_cast<Eigen::Index>(kd), static_cast<Eigen::Index>(kd));
  for (std::uint64_t a = 0; a < kd; ++a)
    for (std::uint64_t b = 0; b < kd; ++b) {
      cplx sum = 0.0;
      for (std::uint64_t e = 0; e < td; ++e)
        sum += rho.matrix()(static_cast<Eigen::Index>(merge(a, e)),
                            static_cast<Eigen::Index>(merge(b, e)));
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = sum;
    }
  return DensityMatrix(k, 0.5 * (out + out.adjoint()));
}

/// Reduced state of a pure state without forming the full density matrix.
inline DensityMatrix partial_trace(const PureState& psi, std::span<const int> keep) {
  const int n = psi.num_qubits();
  require(!keep.empty(), "partial trace must keep at least one qubit");
  for (size_t i = 0; i < keep.size(); ++i) {
    require(keep[i] >= 0 && keep[i] < n, "kept qubit out of range");
    require(i == 0 || keep[i] > keep[i - 1], "kept qubits must be strictly increasing");
  }
  const int k = static_cast<int>(keep.size());
  std::vector<int> traced;
  for (int q = 0; q < n; ++q) {
    bool kept = false;
    for (int kq : keep) kept |= (kq == q);
    if (!kept) traced.push_back(q);
  }
  const std::uint64_t kd = dim_of(k);
  const std::uint64_t td = traced.empty() ? 1 : dim_of(n - k);
  auto merge = [&](std::uint64_t kept_bits, std::uint64_t traced_bits) {
    std::uint64_t idx = 0;
    for (int j = 0; j < k; ++j)
      idx = set_bit(idx, keep[j], n, static_cast<int>(kept_bits >> (k - 1 - j) & 1ull));
    for (size_t j = 0; j < traced.size(); ++j)
      idx = set_bit(idx, traced[j], n,
                    static_cast<int>(traced_bits >> (traced.size() - 1 - j) & 1ull));
    return idx;
  };
  Mat out = Mat::Zero(static_cast<Eigen::Index>(kd), static_cast<Eigen::Index>(kd));
  const Vec& amp = psi.amplitudes();
  for (std::uint64_t e = 0; e < td; ++e)
    for (std::uint64_t a = 0; a < kd; ++a) {
      const cplx va = amp(static_cast<Eigen::Index>(merge(a, e)));
      if (va == cplx(0.0, 0.0)) continue;
      for (std::uint64_t b = 0; b < kd; ++b)
        out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
            va * std::conj(amp(static_cast<Eigen::Index>(merge(b, e))));
    }
  return DensityMatrix(k, 0.5 * (out + out.adjoint()));
}

/// Normalized trace distance D(rho, sigma) = Tr|rho - sigma| / 2 in [0, 1].
inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require(rho.num_qubits() == sigma.num_qubits(), "trace distance needs equal registers");
  Eigen::VectorXd evs = hermitian_eigenvalues(rho.matrix() - sigma.matrix());
  double d = 0.5 * evs.cwiseAbs().sum();
  if (d < 0.0) d = 0.0;
  if (d > 1.0) d = 1.0;
  return d;
}

/// Optimal single-shot discrimination probability for equal priors:
/// 1/2 + D(rho, sigma)/2 (Helstrom bound).
inline double helstrom_success(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return 0.5 + 0.5 * trace_distance(rho, sigma);
}

}  // namespace qclab
