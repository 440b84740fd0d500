#pragma once

// Shared scalar types, resource limits, and error categories used across qclab.

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qclab {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

/// Thrown when a requested computation exceeds a configured resource cap.
/// Caps are adjustable through limits(); the message says which knob to raise.
class budget_error : public std::runtime_error {
 public:
  explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

/// Mutable process-wide resource caps. Defaults keep every operation at desk
/// scale; tests and the CLI may raise them deliberately.
struct Limits {
  int max_pure_qubits = 12;       // statevector simulations
  int max_density_qubits = 7;     // density-matrix / superoperator simulations
  int max_epr_density_qubits = 10;  // doubled-register runs in the mixed picture
  int pauliprod_max_catalytic = 5;  // 6^c enumeration bound for the product-state verifier
  std::uint64_t exhaustive_budget = 10'000'000;  // exhaustive oracle evaluations
  std::uint64_t sampled_trials = 10'000;         // fallback sample count past the budget
  std::uint64_t max_circuit_steps = 200'000;
  std::uint64_t census_max_configs = 1ull << 26;  // runtime census configuration space
  int dqc1_max_mixed_qubits = 14;                 // exact mixed-register enumeration
  int dqc1_max_total_qubits = 20;                 // statevector width inside the DQC1 runner
};

inline Limits& limits() {
  static Limits l;
  return l;
}

inline std::uint64_t dim_of(int qubits) { return 1ull << qubits; }

/// Bit position of qubit q inside an n-qubit basis index.
/// Qubit 0 is the most significant bit of the basis-state integer.
inline int bitpos(int qubit, int n) { return n - 1 - qubit; }

inline int bit_of(std::uint64_t index, int qubit, int n) {
  return static_cast<int>((index >> bitpos(qubit, n)) & 1ull);
}

inline std::uint64_t set_bit(std::uint64_t index, int qubit, int n, int value) {
  const std::uint64_t mask = 1ull << bitpos(qubit, n);
  return value ? (index | mask) : (index & ~mask);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace qclab
