#pragma once

// Catalyticity verification against the admissible-state characterizations.
//
// A circuit is catalytic when every admissible catalytic state is returned
// exactly and the work-register output is the same for all of them. Three
// verifiers cover the characterizations at desk scale:
//   verify_pauliprod     exhaustive over the 6^c products of Pauli eigenstates
//   verify_epr           one run on halves of entangled pairs, certified
//                        through the effective channel's Choi matrix
//   verify_random_density  spot checks on Ginibre mixed states and their
//                        purifications against a held-out reference
// Since the product eigenstate projectors span all operators, an exact pass
// of any one characterization forces the others by linearity; the verifiers
// must therefore agree on every circuit up to tolerance.

#include <optional>
#include <string>
#include <vector>

#include "qclab/circuit.hpp"
#include "qclab/pauli.hpp"

namespace qclab {

enum class CatalyticSet { Density, Pure, PauliProd, Epr };

inline std::string to_string(CatalyticSet s) {
  switch (s) {
    case CatalyticSet::Density: return "density";
    case CatalyticSet::Pure: return "pure";
    case CatalyticSet::PauliProd: return "pauliprod";
    case CatalyticSet::Epr: return "epr";
  }
  return "?";
}

inline CatalyticSet catalytic_set_from_string(const std::string& s) {
  if (s == "density" || s == "random") return CatalyticSet::Density;
  if (s == "pure") return CatalyticSet::Pure;
  if (s == "pauliprod") return CatalyticSet::PauliProd;
  if (s == "epr") return CatalyticSet::Epr;
  throw std::invalid_argument("unknown catalytic set: " + s);
}

struct CatalyticityReport {
  bool passed = false;
  double max_reset_deviation = 0.0;   // trace distance, catalytic marginal out vs in
  double max_output_deviation = 0.0;  // trace distance, work marginal vs baseline
  std::uint64_t states_tested = 0;
  std::string certificate_kind;
  std::string worst_state;
  std::optional<DensityMatrix> eta;  // output state on the first enumerated input
};

namespace detail {

struct SingleRunCheck {
  double reset_deviation;
  DensityMatrix work_marginal;
};

/// Runs one catalytic input through the circuit and measures how far the
/// catalytic (plus reference) marginal moved.
inline SingleRunCheck check_state(const CatalyticCircuit& circuit, const PureState& input) {
  if (circuit.mode() == CircuitMode::General) {
    DensityMatrix in = to_density(input);
    RunResult r = run(circuit, in);
    return {trace_distance(r.catalytic_marginal, in), r.work_marginal};
  }
  RunResult r = run(circuit, input);
  return {trace_distance(r.catalytic_marginal, to_density(input)), r.work_marginal};
}

inline SingleRunCheck check_state(const CatalyticCircuit& circuit, const DensityMatrix& input) {
  RunResult r = run(circuit, input);
  return {trace_distance(r.catalytic_marginal, input), r.work_marginal};
}

inline void fold_into_report(CatalyticityReport& report, const SingleRunCheck& check,
                             const std::string& label) {
  double output_dev = 0.0;
  if (!report.eta) {
    report.eta = check.work_marginal;
  } else {
    output_dev = trace_distance(check.work_marginal, *report.eta);
  }
  const double worst_before = std::max(report.max_reset_deviation, report.max_output_deviation);
  if (std::max(check.reset_deviation, output_dev) > worst_before || report.states_tested == 0)
    report.worst_state = label;
  report.max_reset_deviation = std::max(report.max_reset_deviation, check.reset_deviation);
  report.max_output_deviation = std::max(report.max_output_deviation, output_dev);
  report.states_tested += 1;
}

inline std::string label_string(const std::vector<PauliEig>& labels) {
  std::string s;
  for (PauliEig e : labels) s += to_string(e);
  return s;
}

}  // namespace detail

/// Exhaustive verification over all 6^c products of Pauli eigenstates.
/// Exact passes here extend to every admissible state by linearity.
inline CatalyticityReport verify_pauliprod(const CatalyticCircuit& circuit, double tol = 1e-9) {
  const int c = circuit.catalytic_width();
  if (c > limits().pauliprod_max_catalytic)
    throw budget_error(
        "6^c product-state enumeration exceeds pauliprod_max_catalytic; "
        "use verify_epr or raise qclab::limits()");
  CatalyticityReport report;
  report.certificate_kind = "pauliprod-exhaustive";
  const std::uint64_t count = pauliprod_count(c);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::vector<PauliEig> labels = pauliprod_label(i, c);
    PureState input = pauli_eigenstate(labels);
    detail::fold_into_report(report, detail::check_state(circuit, input),
                             detail::label_string(labels));
  }
  report.passed =
      report.max_reset_deviation <= tol && report.max_output_deviation <= tol;
  return report;
}

/// The c-pair entangled input: catalytic register holds one half of each
/// pair, the reference register the other, pair i on (cat bit i, ref bit i).
inline PureState epr_input(int c) {
  const std::uint64_t d = dim_of(c);
  Vec amp = Vec::Zero(static_cast<Eigen::Index>(d * d));
  const double w = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::uint64_t t = 0; t < d; ++t)
    amp(static_cast<Eigen::Index>((t << c) | t)) = w;
  return PureState(2 * c, std::move(amp));
}

/// One-shot verification on entangled-pair halves. The final marginal on
/// (catalytic, reference) equals the effective catalytic channel's Choi
/// matrix in the 1/d normalization, so comparing it against the identity
/// channel's Choi certifies the reset of every admissible state at once.
inline CatalyticityReport verify_epr(const CatalyticCircuit& circuit, double tol = 1e-9) {
  const int c = circuit.catalytic_width();
  const int s = circuit.work_width();
  CatalyticityReport report;
  report.certificate_kind = "epr-choi";
  PureState input = epr_input(c);
  if (circuit.mode() == CircuitMode::Unitary) {
    if (s + 2 * c > limits().max_pure_qubits)
      throw budget_error("entangled-pair run exceeds max_pure_qubits; raise qclab::limits()");
    detail::fold_into_report(report, detail::check_state(circuit, input), "epr");
  } else {
    if (s + 2 * c > limits().max_epr_density_qubits)
      throw budget_error(
          "entangled-pair run exceeds max_epr_density_qubits; raise qclab::limits()");
    detail::fold_into_report(report, detail::check_state(circuit, to_density(input)), "epr");
  }
  report.passed = report.max_reset_deviation <= tol;
  return report;
}

/// Spot checks on random mixed catalytic states. Even trials run a Ginibre
/// density matrix directly; odd trials run its purification with the
/// reference register held out, so entangled admissible states are covered.
inline CatalyticityReport verify_random_density(const CatalyticCircuit& circuit,
                                                int trials, double tol = 1e-9,
                                                std::uint64_t seed = 0) {
  require(trials >= 1, "need at least one trial");
  const int c = circuit.catalytic_width();
  CatalyticityReport report;
  report.certificate_kind = "random-density";
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(seed, static_cast<std::uint64_t>(trial));
    const auto d = static_cast<Eigen::Index>(dim_of(c));
    Mat rho = random_density_matrix(d, rng);
    if (trial % 2 == 0) {
      detail::fold_into_report(report,
                               detail::check_state(circuit, DensityMatrix(c, rho)),
                               "trial " + std::to_string(trial) + " (direct)");
    } else {
      Eigen::SelfAdjointEigenSolver<Mat> solver(rho);
      Vec amp = Vec::Zero(d * d);
      for (Eigen::Index i = 0; i < d; ++i) {
        const double lambda = std::max(0.0, solver.eigenvalues()(i));
        const double w = std::sqrt(lambda);
        for (Eigen::Index t = 0; t < d; ++t)
          amp(t * d + i) += w * solver.eigenvectors()(t, i);
      }
      amp /= amp.norm();
      PureState purified(2 * c, std::move(amp));
      detail::fold_into_report(
          report,
          circuit.mode() == CircuitMode::Unitary
              ? detail::check_state(circuit, purified)
              : detail::check_state(circuit, to_density(purified)),
          "trial " + std::to_string(trial) + " (purified)");
    }
  }
  report.passed =
      report.max_reset_deviation <= tol && report.max_output_deviation <= tol;
  return report;
}

struct EffectiveChannels {
  QuantumChannel gamma;  // work side: constant map onto eta
  QuantumChannel xi;     // catalytic side: equals the identity for catalytic circuits
  DensityMatrix eta;
};

/// Splits a catalytic circuit's action into Gamma ox Xi. Gamma is pinned by
/// its action on |0^s> (the only input the model ever feeds it), so it is
/// returned as the constant channel onto eta. Xi is reconstructed from the
/// entangled-pair run's Choi matrix.
inline EffectiveChannels effective_channels(const CatalyticCircuit& circuit,
                                            double tol = 1e-9) {
  CatalyticityReport epr = verify_epr(circuit, tol);
  if (!epr.passed)
    throw std::invalid_argument(
        "circuit is not catalytic (entangled-pair deviation " +
        std::to_string(epr.max_reset_deviation) + "); no channel split exists");
  const int c = circuit.catalytic_width();
  const int s = circuit.work_width();

  PureState input = epr_input(c);
  RunResult r = circuit.mode() == CircuitMode::Unitary ? run(circuit, input)
                                                       : run(circuit, to_density(input));
  QuantumChannel xi = channel_from_choi(r.catalytic_marginal.matrix(), c, c,
                                        std::max(tol, 1e-9));

  const DensityMatrix& eta = r.work_marginal;
  Eigen::SelfAdjointEigenSolver<Mat> solver(eta.matrix());
  std::vector<Mat> kraus;
  const auto ds = static_cast<Eigen::Index>(dim_of(s));
  for (Eigen::Index i = 0; i < ds; ++i) {
    const double lambda = solver.eigenvalues()(i);
    if (lambda <= 1e-14) continue;
    for (Eigen::Index j = 0; j < ds; ++j) {
      Mat k = Mat::Zero(ds, ds);
      k.col(j) = std::sqrt(lambda) * solver.eigenvectors().col(i);
      kraus.push_back(std::move(k));
    }
  }
  QuantumChannel gamma(s, s, std::move(kraus), 1e-8);
  return EffectiveChannels{std::move(gamma), std::move(xi), eta};
}

}  // namespace qclab
