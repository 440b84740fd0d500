#pragma once

// Pauli eigenstate products and operator decompositions over them.
//
// The six single-qubit labels are the +/- eigenstates of Z, X, Y:
//   Z+ = |0>, Z- = |1>, X+ = |+>, X- = |->, Y+ = (|0>+i|1>)/sqrt2,
//   Y- = (|0>-i|1>)/sqrt2.
// Rank-one projectors onto them span all single-qubit operators:
//   I = Z+ + Z-,  Z = Z+ - Z-,  X = X+ - X-,  Y = Y+ - Y-   (as projectors),
// so any d-qubit operator expands over 6^d product projectors by first
// expanding in the Pauli-string basis and then replacing each factor by its
// two-eigenstate combination.

#include <array>
#include <map>
#include <string>
#include <vector>

#include "qclab/common.hpp"
#include "qclab/linalg.hpp"
#include "qclab/qstate.hpp"

namespace qclab {

enum class PauliEig : int { Zp = 0, Zm = 1, Xp = 2, Xm = 3, Yp = 4, Ym = 5 };

inline std::string to_string(PauliEig e) {
  static const std::array<const char*, 6> names = {"Z+", "Z-", "X+", "X-", "Y+", "Y-"};
  return names[static_cast<int>(e)];
}

inline Vec single_eigenstate(PauliEig e) {
  const double s = 1.0 / std::sqrt(2.0);
  Vec v(2);
  switch (e) {
    case PauliEig::Zp: v << 1, 0; break;
    case PauliEig::Zm: v << 0, 1; break;
    case PauliEig::Xp: v << s, s; break;
    case PauliEig::Xm: v << s, -s; break;
    case PauliEig::Yp: v << s, cplx(0, s); break;
    case PauliEig::Ym: v << s, cplx(0, -s); break;
  }
  return v;
}

/// Product eigenstate; labels[0] sits on qubit 0 (the most significant bit).
inline PureState pauli_eigenstate(const std::vector<PauliEig>& labels) {
  require(!labels.empty(), "eigenstate needs at least one qubit label");
  Vec v = single_eigenstate(labels[0]);
  for (size_t i = 1; i < labels.size(); ++i) v = kron(v, single_eigenstate(labels[i]));
  return PureState(static_cast<int>(labels.size()), std::move(v));
}

/// The i-th of the 6^c product labels, enumerated with qubit 0 as the most
/// significant base-6 digit.
inline std::vector<PauliEig> pauliprod_label(std::uint64_t index, int qubits) {
  std::vector<PauliEig> labels(qubits);
  for (int q = qubits - 1; q >= 0; --q) {
    labels[q] = static_cast<PauliEig>(index % 6);
    index /= 6;
  }
  return labels;
}

inline std::uint64_t pauliprod_count(int qubits) {
  std::uint64_t n = 1;
  for (int q = 0; q < qubits; ++q) n *= 6;
  return n;
}

struct PauliProdTerm {
  std::vector<PauliEig> labels;
  cplx coefficient;
};

struct PauliProdDecomposition {
  int num_qubits = 0;
  std::vector<PauliProdTerm> terms;
};

namespace detail {

inline const std::array<Mat, 4>& pauli_matrices() {
  static const std::array<Mat, 4> p = [] {
    std::array<Mat, 4> m;
    for (auto& x : m) x = Mat(2, 2);
    m[0] << 1, 0, 0, 1;
    m[1] << 0, 1, 1, 0;
    m[2] << 0, cplx(0, -1), cplx(0, 1), 0;
    m[3] << 1, 0, 0, -1;
    return m;
  }();
  return p;
}

// Eigenstate replacement table: pauli index (I,X,Y,Z) -> two (label, sign).
struct Replacement {
  PauliEig label;
  double sign;
};

inline const std::array<std::array<Replacement, 2>, 4>& replacements() {
  static const std::array<std::array<Replacement, 2>, 4> r = {{
      {{{PauliEig::Zp, 1.0}, {PauliEig::Zm, 1.0}}},   // I
      {{{PauliEig::Xp, 1.0}, {PauliEig::Xm, -1.0}}},  // X
      {{{PauliEig::Yp, 1.0}, {PauliEig::Ym, -1.0}}},  // Y
      {{{PauliEig::Zp, 1.0}, {PauliEig::Zm, -1.0}}},  // Z
  }};
  return r;
}

}  // namespace detail

/// Expands an arbitrary operator over product-eigenstate projectors.
/// Route: Pauli-string expansion (coefficients Tr(P M)/2^d), then each factor
/// replaced by its two-eigenstate combination; like terms are merged.
inline PauliProdDecomposition pauli_decompose(const Mat& m, int num_qubits) {
  const auto d = static_cast<Eigen::Index>(dim_of(num_qubits));
  require(m.rows() == d && m.cols() == d, "operator dimension does not match qubit count");
  require(num_qubits >= 1 && num_qubits <= 6, "decomposition supported for 1..6 qubits");
  const auto& sigma = detail::pauli_matrices();
  const auto& rep = detail::replacements();
  const std::uint64_t strings = 1ull << (2 * num_qubits);

  std::map<std::vector<PauliEig>, cplx> acc;
  std::vector<int> digits(num_qubits);
  for (std::uint64_t s = 0; s < strings; ++s) {
    std::uint64_t idx = s;
    for (int q = num_qubits - 1; q >= 0; --q) {
      digits[q] = static_cast<int>(idx & 3);
      idx >>= 2;
    }
    Mat p = sigma[digits[0]];
    for (int q = 1; q < num_qubits; ++q) p = kron(p, sigma[digits[q]]);
    const cplx coeff = (p * m).trace() / static_cast<double>(d);
    if (std::abs(coeff) < 1e-14) continue;
    // Distribute over the 2^d eigenstate choices for this string.
    const std::uint64_t choices = dim_of(num_qubits);
    for (std::uint64_t c = 0; c < choices; ++c) {
      std::vector<PauliEig> labels(num_qubits);
      double sign = 1.0;
      for (int q = 0; q < num_qubits; ++q) {
        const auto& r = rep[digits[q]][bit_of(c, q, num_qubits)];
        labels[q] = r.label;
        sign *= r.sign;
      }
      acc[labels] += coeff * sign;
    }
  }

  PauliProdDecomposition out;
  out.num_qubits = num_qubits;
  for (auto& [labels, coeff] : acc)
    if (std::abs(coeff) >= 1e-14) out.terms.push_back({labels, coeff});
  return out;
}

inline Mat pauli_reconstruct(const PauliProdDecomposition& dec) {
  const auto d = static_cast<Eigen::Index>(dim_of(dec.num_qubits));
  Mat m = Mat::Zero(d, d);
  for (const auto& term : dec.terms) {
    const Vec v = pauli_eigenstate(term.labels).amplitudes();
    m += term.coefficient * (v * v.adjoint());
  }
  return m;
}

}  // namespace qclab
