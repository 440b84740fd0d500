#pragma once

// One-clean-qubit simulation (DQC_k): clean qubits 0..k-1 start |0>, mixed
// qubits k..k+n-1 start maximally mixed, a unitary gate list runs, and clean
// qubit 0 is measured once at the end. The mixed register is handled as a
// uniform average over its 2^n basis initializations, each a pure-state run,
// which is exponentially cheaper in memory than a density-matrix simulation.
//
// Two entry points connect the model to the rest of the library:
// from_unitary_catalytic turns a unitary-mode catalytic circuit into an
// instance (work register clean, catalytic register mixed), and cl_pipeline
// turns a clean register program into a truncated cycled machine with an
// explicit decision qubit and coin qubit.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qclab/circuit.hpp"
#include "qclab/common.hpp"
#include "qclab/compile.hpp"
#include "qclab/qstate.hpp"
#include "qclab/regprog.hpp"
#include "qclab/rng.hpp"

namespace qclab {

struct DQCkInstance {
  DQCkInstance(int clean_count, int mixed_count, std::vector<CircuitStep> gates)
      : clean_count(clean_count), mixed_count(mixed_count), gates(std::move(gates)) {
    require(clean_count >= 1, "need at least one clean qubit");
    require(mixed_count >= 1, "need at least one mixed qubit");
    const int n = clean_count + mixed_count;
    for (const auto& step : this->gates) {
      require(step.kind != StepKind::Measurement,
              "intermediate measurements are not part of the model");
      detail::check_targets(step.targets, n);
      if (step.kind == StepKind::Unitary)
        require(is_unitary_matrix(step.unitary), "instance step matrix is not unitary");
    }
  }

  int total_qubits() const { return clean_count + mixed_count; }

  int clean_count;
  int mixed_count;
  std::vector<CircuitStep> gates;  // measured qubit is clean qubit 0
};

/// Wraps one dense unitary over all clean_count + mixed_count qubits.
inline DQCkInstance from_dense(int clean_count, int mixed_count, Mat u) {
  const int n = clean_count + mixed_count;
  require(u.rows() == static_cast<Eigen::Index>(dim_of(n)) && u.cols() == u.rows(),
          "dense unitary must cover every instance qubit");
  CircuitStep step;
  step.kind = StepKind::Unitary;
  step.name = "DENSE";
  for (int q = 0; q < n; ++q) step.targets.push_back(q);
  step.unitary = std::move(u);
  return DQCkInstance(clean_count, mixed_count, {std::move(step)});
}

enum class EstimateMethod { Exact, Sampled };

inline std::string to_string(EstimateMethod m) {
  return m == EstimateMethod::Exact ? "exact" : "sampled";
}

struct OutcomeEstimate {
  double p0 = 0.0;
  double p1 = 0.0;
  EstimateMethod method = EstimateMethod::Exact;
  std::uint64_t shots = 0;      // sampled only
  double standard_error = 0.0;  // sampled only
};

enum class Verdict { Yes, No, Inconclusive };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Yes: return "yes";
    case Verdict::No: return "no";
    default: return "inconclusive";
  }
}

struct DecisionOutcome {
  Verdict verdict = Verdict::Inconclusive;
  double margin_bound = 0.0;  // 1/q(n)
};

namespace detail {

inline void check_dqc1_budget(const DQCkInstance& inst) {
  if (inst.mixed_count > limits().dqc1_max_mixed_qubits)
    throw budget_error("mixed register exceeds dqc1_max_mixed_qubits; raise qclab::limits()");
  if (inst.total_qubits() > limits().dqc1_max_total_qubits)
    throw budget_error("instance exceeds dqc1_max_total_qubits; raise qclab::limits()");
}

inline bool is_zero_one_permutation(const Mat& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    int hits = 0;
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      const double a = std::abs(u(r, c));
      if (a < 1e-12) continue;
      if (std::abs(u(r, c) - cplx(1.0, 0.0)) > 1e-12 || ++hits > 1) return false;
    }
    if (hits != 1) return false;
  }
  return true;
}

inline bool classical_instance(const DQCkInstance& inst) {
  for (const auto& step : inst.gates) {
    if (step.kind == StepKind::Permutation) continue;
    if (!is_zero_one_permutation(step.unitary)) return false;
  }
  return true;
}

/// Final value of clean qubit 0 when every gate permutes basis states.
inline int classical_measured_bit(const DQCkInstance& inst, std::uint64_t mixed_index) {
  const int n = inst.total_qubits();
  std::vector<int> bits(static_cast<size_t>(n), 0);
  for (int j = 0; j < inst.mixed_count; ++j)
    bits[static_cast<size_t>(inst.clean_count + j)] = bit_of(mixed_index, j, inst.mixed_count);
  for (const auto& step : inst.gates) {
    const int k = static_cast<int>(step.targets.size());
    std::uint64_t local = 0;
    for (int j = 0; j < k; ++j)
      local = (local << 1) | static_cast<std::uint64_t>(bits[static_cast<size_t>(step.targets[j])]);
    const std::uint64_t mapped = step.kind == StepKind::Permutation
                                     ? step.perm[local]
                                     : permutation_image(step.unitary, local);
    for (int j = 0; j < k; ++j)
      bits[static_cast<size_t>(step.targets[j])] = static_cast<int>((mapped >> (k - 1 - j)) & 1ull);
  }
  return bits[0];
}

/// P(clean 0 = 1) for one basis initialization |0^k> ox |mixed_index>.
inline double measured_one_probability(const DQCkInstance& inst, std::uint64_t mixed_index,
                                       double* p0_out = nullptr) {
  const int n = inst.total_qubits();
  Vec amp = PureState::basis(n, mixed_index).amplitudes();
  for (const auto& step : inst.gates) apply_step_pure(amp, step, n);
  const Eigen::Index half = amp.size() / 2;
  const double p1 = amp.tail(half).squaredNorm();  // qubit 0 is the top bit
  if (p0_out) *p0_out = amp.head(half).squaredNorm();
  return p1;
}

/// Full final pure state for one basis initialization of the mixed register.
inline PureState final_state(const DQCkInstance& inst, std::uint64_t mixed_index) {
  const int n = inst.total_qubits();
  Vec amp = PureState::basis(n, mixed_index).amplitudes();
  for (const auto& step : inst.gates) apply_step_pure(amp, step, n);
  return PureState(n, std::move(amp));
}

}  // namespace detail

/// Exact p0, p1 by averaging over all 2^n basis initializations of the mixed
/// register. Instances whose gates all permute basis states replay on bits
/// instead, so the probabilities come out as exact dyadic rationals.
inline OutcomeEstimate exact_probabilities(const DQCkInstance& inst) {
  detail::check_dqc1_budget(inst);
  const std::uint64_t runs = dim_of(inst.mixed_count);
  OutcomeEstimate est;
  est.method = EstimateMethod::Exact;
  if (detail::classical_instance(inst)) {
    std::uint64_t ones = 0;
    for (std::uint64_t b = 0; b < runs; ++b) ones += detail::classical_measured_bit(inst, b);
    est.p1 = static_cast<double>(ones) / static_cast<double>(runs);
    est.p0 = static_cast<double>(runs - ones) / static_cast<double>(runs);
    return est;
  }
  double p0 = 0.0, p1 = 0.0;
  for (std::uint64_t b = 0; b < runs; ++b) {
    double run_p0 = 0.0;
    p1 += detail::measured_one_probability(inst, b, &run_p0);
    p0 += run_p0;
  }
  est.p0 = p0 / static_cast<double>(runs);
  est.p1 = p1 / static_cast<double>(runs);
  return est;
}

/// Monte-Carlo view of the maximally mixed register: each shot draws a
/// uniform basis state, runs it, and flips a Bernoulli coin with that run's
/// outcome probability. Shots are keyed (seed, shot index) so the estimate is
/// reproducible under any evaluation order.
inline OutcomeEstimate sample(const DQCkInstance& inst, std::uint64_t shots, std::uint64_t seed) {
  detail::check_dqc1_budget(inst);
  require(shots >= 1, "need at least one shot");
  const std::uint64_t runs = dim_of(inst.mixed_count);
  const bool classical = detail::classical_instance(inst);
  std::vector<double> cache(runs, -1.0);
  std::uint64_t ones = 0;
  for (std::uint64_t shot = 0; shot < shots; ++shot) {
    Rng rng(seed, shot);
    const std::uint64_t b = rng.uniform_int(runs);
    double& p1 = cache[b];
    if (p1 < 0.0)
      p1 = classical ? static_cast<double>(detail::classical_measured_bit(inst, b))
                     : detail::measured_one_probability(inst, b);
    if (rng.uniform() < p1) ++ones;
  }
  OutcomeEstimate est;
  est.method = EstimateMethod::Sampled;
  est.shots = shots;
  est.p1 = static_cast<double>(ones) / static_cast<double>(shots);
  est.p0 = static_cast<double>(shots - ones) / static_cast<double>(shots);
  est.standard_error = std::sqrt(est.p0 * est.p1 / static_cast<double>(shots));
  return est;
}

inline DecisionOutcome decide(const OutcomeEstimate& est, double q_bound) {
  require(q_bound > 0.0, "the promise bound q must be positive");
  DecisionOutcome out;
  out.margin_bound = 1.0 / q_bound;
  if (est.p1 >= 0.5 + out.margin_bound)
    out.verdict = Verdict::Yes;
  else if (est.p0 >= 0.5 + out.margin_bound)
    out.verdict = Verdict::No;
  else
    out.verdict = Verdict::Inconclusive;
  return out;
}

inline DecisionOutcome decide(const DQCkInstance& inst, double q_bound) {
  return decide(exact_probabilities(inst), q_bound);
}

/// Work register becomes the clean block, catalytic register the mixed block.
/// The circuit's output qubit trades labels with qubit 0 so the measured
/// qubit lands in the model's fixed slot; measurement steps are rejected, not
/// reinterpreted. Catalyticity is not required here: the instance is valid
/// for any unitary circuit, catalytic ones merely guarantee extra structure
/// (see mixed_marginal_after).
inline DQCkInstance from_unitary_catalytic(const CatalyticCircuit& circuit) {
  require(circuit.mode() == CircuitMode::Unitary,
          "only unitary-mode circuits lift to instances; measurements are not modeled");
  const int out = circuit.output_qubit();
  auto relabel = [out](int q) { return q == out ? 0 : q == 0 ? out : q; };
  std::vector<CircuitStep> gates = circuit.steps();
  for (auto& step : gates)
    for (int& q : step.targets) q = relabel(q);
  return DQCkInstance(circuit.work_width(), circuit.catalytic_width(), std::move(gates));
}

/// Mixed-register marginal after the run (measuring clean qubit 0 cannot
/// change it): the uniform average over basis initializations of the traced
/// final state. For an instance lifted from a catalytic circuit this must be
/// maximally mixed again; that is the preservation property worth testing.
inline DensityMatrix mixed_marginal_after(const DQCkInstance& inst) {
  detail::check_dqc1_budget(inst);
  if (inst.mixed_count > limits().max_density_qubits)
    throw budget_error("mixed-register marginal exceeds max_density_qubits; raise qclab::limits()");
  const std::uint64_t runs = dim_of(inst.mixed_count);
  std::vector<int> keep;
  for (int j = 0; j < inst.mixed_count; ++j) keep.push_back(inst.clean_count + j);
  const std::uint64_t dim = dim_of(inst.mixed_count);
  Mat acc = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::uint64_t b = 0; b < runs; ++b)
    acc += partial_trace(detail::final_state(inst, b), keep).matrix();
  return DensityMatrix(inst.mixed_count, acc / static_cast<double>(runs));
}

/// A clean register program, cycled and truncated, as a decision instance.
struct CLPipelineResult {
  DQCkInstance instance;
  CycledMachine machine;
  std::size_t t = 0;          // stream prefix length actually lowered
  int f_value = 0;            // the function value the decision qubit chases
  double determined_fraction = 0.0;
  double census_success = 0.0;   // P(decision = f) with the coin as explicit 1/2 weight
  double predicted_bound = 0.0;  // 1/2 + determined_fraction / 2
  bool never_wrong = true;
  int decision_qubit = 0;
  int coin_qubit = 0;
};

/// Cycles prog l times, truncates the step stream after t steps, lowers the
/// prefix with the permutation backend, and appends a decision qubit fed by
/// the latch: decision = output when determined, else an independent coin
/// qubit drawn from the mixed register. Success statistics come from an
/// exhaustive census over catalytic tapes with the undetermined coin counted
/// as an explicit one-half weight, so the bound is exact, not sampled.
inline CLPipelineResult cl_pipeline(const RegisterProgram& prog, const std::vector<int>& x,
                                    int cycles, std::size_t t, int block_count = -1) {
  CycledMachine machine = cycle_wrap(prog, cycles, block_count);
  const CatalyticCircuit prefix =
      with_input(lower_cycled_to_circuit(machine, t), machine.layout, x);

  const int c = machine.layout.catalytic_width();
  const int clean_count = machine.work_width + 1;  // decision qubit in front
  const int mixed_count = c + 1;                   // tape plus coin behind
  const int decision = 0;
  const int coin = clean_count + c;
  const int determined = 1 + machine.determined_bit;
  const int output = 1 + machine.output_bit;

  std::vector<CircuitStep> gates = prefix.steps();
  for (auto& step : gates)
    for (int& q : step.targets) q += 1;
  gates.push_back(make_gate("TOFFOLI", {determined, output, decision}));
  gates.push_back(make_gate("X", {determined}));
  gates.push_back(make_gate("TOFFOLI", {determined, coin, decision}));
  gates.push_back(make_gate("X", {determined}));

  CLPipelineResult result{DQCkInstance(clean_count, mixed_count, std::move(gates)),
                          std::move(machine),
                          t,
                          0,
                          0.0,
                          0.0,
                          0.0,
                          true,
                          decision,
                          coin};

  const std::vector<int> zero_tape(static_cast<size_t>(c), 0);
  result.f_value =
      replay_cycled(result.machine, x, zero_tape, result.machine.stream.size()).output;

  const std::uint64_t tapes = dim_of(c);
  std::uint64_t det_count = 0;
  double success = 0.0;
  for (std::uint64_t tau = 0; tau < tapes; ++tau) {
    std::vector<int> raw(static_cast<size_t>(c));
    for (int j = 0; j < c; ++j) raw[static_cast<size_t>(j)] = bit_of(tau, j, c);
    const CycledReplay r = replay_cycled(result.machine, x, raw, t);
    if (r.determined) {
      ++det_count;
      if (r.output == result.f_value)
        success += 1.0;
      else
        result.never_wrong = false;
    } else {
      success += 0.5;
    }
  }
  result.determined_fraction = static_cast<double>(det_count) / static_cast<double>(tapes);
  result.census_success = success / static_cast<double>(tapes);
  result.predicted_bound = 0.5 + result.determined_fraction / 2.0;
  return result;
}

}  // namespace qclab
