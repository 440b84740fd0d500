#pragma once

// Catalytic circuits: a clean work register of s qubits (initialized |0^s>)
// next to a catalytic register of c qubits (arbitrary borrowed state).
// Work qubits are 0..s-1, catalytic qubits s..s+c-1; an optional reference
// register supplied with the catalytic state sits above s+c-1 and is never
// addressed by gates.
//
// Unitary mode allows only gates; general mode adds unrecorded
// computational-basis measurements and is simulated in the mixed picture.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qclab/channel.hpp"
#include "qclab/common.hpp"
#include "qclab/qstate.hpp"

namespace qclab {

enum class StepKind { Unitary, Permutation, Measurement };
enum class CircuitMode { Unitary, General };

struct CircuitStep {
  StepKind kind = StepKind::Unitary;
  std::string name;
  std::vector<int> targets;
  Mat unitary;                      // StepKind::Unitary
  std::vector<std::uint64_t> perm;  // StepKind::Permutation, local index map
};

/// Matrix of a named gate. Control qubits come first in the target list
/// (CNOT: control, target; TOFFOLI: control, control, target).
inline Mat named_gate_matrix(const std::string& name) {
  const double s = 1.0 / std::sqrt(2.0);
  if (name == "X") {
    Mat m(2, 2);
    m << 0, 1, 1, 0;
    return m;
  }
  if (name == "Y") {
    Mat m(2, 2);
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return m;
  }
  if (name == "Z") {
    Mat m(2, 2);
    m << 1, 0, 0, -1;
    return m;
  }
  if (name == "H") {
    Mat m(2, 2);
    m << s, s, s, -s;
    return m;
  }
  if (name == "S") {
    Mat m(2, 2);
    m << 1, 0, 0, cplx(0, 1);
    return m;
  }
  if (name == "T") {
    Mat m(2, 2);
    m << 1, 0, 0, std::polar(1.0, 0.25 * 3.14159265358979323846);
    return m;
  }
  if (name == "CNOT") {
    Mat m = Mat::Zero(4, 4);
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
    return m;
  }
  if (name == "CZ") {
    Mat m = Mat::Identity(4, 4);
    m(3, 3) = -1;
    return m;
  }
  if (name == "SWAP") {
    Mat m = Mat::Zero(4, 4);
    m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
    return m;
  }
  if (name == "TOFFOLI") {
    Mat m = Mat::Identity(8, 8);
    m(6, 6) = m(7, 7) = 0;
    m(6, 7) = m(7, 6) = 1;
    return m;
  }
  throw std::invalid_argument("unknown gate name: " + name);
}

inline CircuitStep make_gate(const std::string& name, std::vector<int> targets) {
  CircuitStep step;
  step.kind = StepKind::Unitary;
  step.name = name;
  step.unitary = named_gate_matrix(name);
  require(step.unitary.rows() == static_cast<Eigen::Index>(dim_of(static_cast<int>(targets.size()))),
          "gate " + name + " takes a different number of qubits");
  step.targets = std::move(targets);
  return step;
}

inline CircuitStep make_perm(std::vector<int> targets, std::vector<std::uint64_t> perm) {
  CircuitStep step;
  step.kind = StepKind::Permutation;
  step.name = "PERM";
  const std::uint64_t dim = dim_of(static_cast<int>(targets.size()));
  require(perm.size() == dim, "permutation size does not match target count");
  std::vector<bool> seen(dim, false);
  for (std::uint64_t v : perm) {
    require(v < dim, "permutation value out of range");
    require(!seen[v], "permutation repeats a value");
    seen[v] = true;
  }
  step.targets = std::move(targets);
  step.perm = std::move(perm);
  return step;
}

inline CircuitStep make_measure(int qubit) {
  CircuitStep step;
  step.kind = StepKind::Measurement;
  step.name = "MEASURE";
  step.targets = {qubit};
  return step;
}

class CatalyticCircuit {
 public:
  CatalyticCircuit(int work_width, int catalytic_width, int output_qubit,
                   std::vector<CircuitStep> steps, CircuitMode mode = CircuitMode::Unitary)
      : work_width_(work_width),
        catalytic_width_(catalytic_width),
        output_qubit_(output_qubit),
        mode_(mode),
        steps_(std::move(steps)) {
    require(work_width >= 1, "need at least one work qubit");
    require(catalytic_width >= 1, "need at least one catalytic qubit");
    require(output_qubit >= 0 && output_qubit < work_width,
            "output qubit must lie in the work register");
    if (steps_.size() > limits().max_circuit_steps)
      throw budget_error("circuit exceeds max_circuit_steps; raise qclab::limits()");
    const int n = work_width + catalytic_width;
    for (const auto& step : steps_) {
      detail::check_targets(step.targets, n);
      if (step.kind == StepKind::Measurement)
        require(mode_ == CircuitMode::General, "measurements require general mode");
      if (step.kind == StepKind::Unitary)
        require(is_unitary_matrix(step.unitary), "circuit step matrix is not unitary");
    }
  }

  int work_width() const { return work_width_; }
  int catalytic_width() const { return catalytic_width_; }
  int total_width() const { return work_width_ + catalytic_width_; }
  int output_qubit() const { return output_qubit_; }
  CircuitMode mode() const { return mode_; }
  const std::vector<CircuitStep>& steps() const { return steps_; }

 private:
  int work_width_;
  int catalytic_width_;
  int output_qubit_;
  CircuitMode mode_;
  std::vector<CircuitStep> steps_;
};

namespace detail {

inline void apply_step_pure(Vec& amp, const CircuitStep& step, int n) {
  if (step.kind == StepKind::Unitary) {
    apply_gate_to_vec(amp, step.unitary, step.targets, n);
  } else if (step.kind == StepKind::Permutation) {
    apply_perm_to_vec(amp, step.perm, step.targets, n);
  } else {
    throw std::invalid_argument("measurement steps need the mixed-state path");
  }
}

inline void apply_step_density(Mat& rho, const CircuitStep& step, int n) {
  if (step.kind == StepKind::Measurement) {
    const int q = step.targets[0];
    const std::uint64_t dim = dim_of(n);
    for (std::uint64_t i = 0; i < dim; ++i)
      for (std::uint64_t j = 0; j < dim; ++j)
        if (bit_of(i, q, n) != bit_of(j, q, n))
          rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.0;
    return;
  }
  if (step.kind == StepKind::Permutation) {
    const std::uint64_t dim = dim_of(n);
    std::vector<std::uint64_t> global(dim);
    const int k = static_cast<int>(step.targets.size());
    for (std::uint64_t i = 0; i < dim; ++i) {
      std::uint64_t local = 0;
      for (int j = 0; j < k; ++j)
        local = (local << 1) | static_cast<std::uint64_t>(bit_of(i, step.targets[j], n));
      std::uint64_t mapped = step.perm[local];
      std::uint64_t out = i;
      for (int j = 0; j < k; ++j)
        out = set_bit(out, step.targets[j], n, static_cast<int>(mapped >> (k - 1 - j) & 1ull));
      global[i] = out;
    }
    Mat next(rho.rows(), rho.cols());
    for (std::uint64_t i = 0; i < dim; ++i)
      for (std::uint64_t j = 0; j < dim; ++j)
        next(static_cast<Eigen::Index>(global[i]), static_cast<Eigen::Index>(global[j])) =
            rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    rho = std::move(next);
    return;
  }
  apply_gate_to_columns(rho, step.unitary, step.targets, n);
  rho.adjointInPlace();
  apply_gate_to_columns(rho, step.unitary, step.targets, n);
  rho.adjointInPlace();
}

}  // namespace detail

struct RunResult {
  std::variant<PureState, DensityMatrix> joint;  // work ox catalytic ox reference
  DensityMatrix work_marginal;                   // s qubits
  DensityMatrix catalytic_marginal;              // catalytic plus reference qubits
};

/// Runs the circuit on |0^s> ox catalytic_state in the pure picture.
/// The supplied state covers the catalytic register plus any reference tail.
inline RunResult run(const CatalyticCircuit& circuit, const PureState& catalytic_state) {
  require(circuit.mode() == CircuitMode::Unitary,
          "general-mode circuits need a mixed-state run");
  const int ref = catalytic_state.num_qubits() - circuit.catalytic_width();
  require(ref >= 0, "catalytic state narrower than the catalytic register");
  const int n = circuit.work_width() + catalytic_state.num_qubits();
  if (n > limits().max_pure_qubits)
    throw budget_error("pure run exceeds max_pure_qubits; raise qclab::limits()");
  Vec amp = kron(PureState::zero(circuit.work_width()).amplitudes(),
                 catalytic_state.amplitudes());
  for (const auto& step : circuit.steps()) detail::apply_step_pure(amp, step, n);
  PureState joint(n, std::move(amp));
  std::vector<int> work_keep, cat_keep;
  for (int q = 0; q < circuit.work_width(); ++q) work_keep.push_back(q);
  for (int q = circuit.work_width(); q < n; ++q) cat_keep.push_back(q);
  DensityMatrix wm = partial_trace(joint, work_keep);
  DensityMatrix cm = partial_trace(joint, cat_keep);
  return RunResult{std::move(joint), std::move(wm), std::move(cm)};
}

/// Mixed-picture run; used for general-mode circuits and mixed catalytic
/// states. The circuit registers obey the density cap, the optional reference
/// tail the doubled-register cap.
inline RunResult run(const CatalyticCircuit& circuit, const DensityMatrix& catalytic_state) {
  const int ref = catalytic_state.num_qubits() - circuit.catalytic_width();
  require(ref >= 0, "catalytic state narrower than the catalytic register");
  const int n = circuit.work_width() + catalytic_state.num_qubits();
  if (circuit.mode() == CircuitMode::General &&
      circuit.total_width() > limits().max_density_qubits)
    throw budget_error("general-mode circuit exceeds max_density_qubits; raise qclab::limits()");
  if (n > limits().max_epr_density_qubits)
    throw budget_error("mixed run exceeds max_epr_density_qubits; raise qclab::limits()");
  Mat rho = kron(to_density(PureState::zero(circuit.work_width())).matrix(),
                 catalytic_state.matrix());
  for (const auto& step : circuit.steps()) detail::apply_step_density(rho, step, n);
  DensityMatrix joint(n, 0.5 * (rho + rho.adjoint()));
  std::vector<int> work_keep, cat_keep;
  for (int q = 0; q < circuit.work_width(); ++q) work_keep.push_back(q);
  for (int q = circuit.work_width(); q < n; ++q) cat_keep.push_back(q);
  DensityMatrix wm = partial_trace(joint, work_keep);
  DensityMatrix cm = partial_trace(joint, cat_keep);
  return RunResult{std::move(joint), std::move(wm), std::move(cm)};
}

namespace detail {

/// Image of a basis state under a unitary that is a 0/1 permutation matrix.
inline std::uint64_t permutation_image(const Mat& u, std::uint64_t col) {
  Eigen::Index row = -1;
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    const cplx v = u(r, static_cast<Eigen::Index>(col));
    if (std::abs(v) < 1e-12) continue;
    if (std::abs(v - cplx(1.0, 0.0)) > 1e-12 || row >= 0)
      throw std::invalid_argument("classical replay needs permutation gates, found " +
                                  std::string("a non-permutation step"));
    row = r;
  }
  return static_cast<std::uint64_t>(row);
}

}  // namespace detail

/// Replays a circuit built from permutation steps (or unitary steps whose
/// matrices are 0/1 permutations) on a computational basis state.  bits[q]
/// holds the value of qubit q and covers every circuit qubit, work included.
/// Measurements are identity on basis states and pass through.  Scales with
/// circuit size, not Hilbert dimension, so wide circuits replay exhaustively.
inline std::vector<int> classical_run(const CatalyticCircuit& circuit, std::vector<int> bits) {
  const int n = circuit.total_width();
  require(static_cast<int>(bits.size()) == n, "bit assignment must cover every circuit qubit");
  for (int b : bits) require(b == 0 || b == 1, "bit assignment entries must be 0 or 1");
  for (const auto& step : circuit.steps()) {
    if (step.kind == StepKind::Measurement) continue;
    const int k = static_cast<int>(step.targets.size());
    std::uint64_t local = 0;
    for (int j = 0; j < k; ++j)
      local = (local << 1) | static_cast<std::uint64_t>(bits[static_cast<size_t>(step.targets[j])]);
    const std::uint64_t mapped = step.kind == StepKind::Permutation
                                     ? step.perm[local]
                                     : detail::permutation_image(step.unitary, local);
    for (int j = 0; j < k; ++j)
      bits[static_cast<size_t>(step.targets[j])] = static_cast<int>((mapped >> (k - 1 - j)) & 1ull);
  }
  return bits;
}

/// Probability that measuring the output qubit after the run yields 1.
inline double decision_probability(const CatalyticCircuit& circuit,
                                   const DensityMatrix& catalytic_state) {
  RunResult r = run(circuit, catalytic_state);
  const int s = circuit.work_width();
  double p1 = 0.0;
  for (std::uint64_t i = 0; i < dim_of(s); ++i)
    if (bit_of(i, circuit.output_qubit(), s))
      p1 += r.work_marginal.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))
                .real();
  if (p1 < 0.0) p1 = 0.0;
  if (p1 > 1.0) p1 = 1.0;
  return p1;
}

inline double decision_probability(const CatalyticCircuit& circuit,
                                   const PureState& catalytic_state) {
  if (circuit.mode() == CircuitMode::General)
    return decision_probability(circuit, to_density(catalytic_state));
  RunResult r = run(circuit, catalytic_state);
  const int s = circuit.work_width();
  double p1 = 0.0;
  for (std::uint64_t i = 0; i < dim_of(s); ++i)
    if (bit_of(i, circuit.output_qubit(), s))
      p1 += r.work_marginal.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))
                .real();
  if (p1 < 0.0) p1 = 0.0;
  if (p1 > 1.0) p1 = 1.0;
  return p1;
}

}  // namespace qclab
