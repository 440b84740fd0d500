// Acceptance gate: eight independently checkable properties, one line each.
// Every check recomputes its expected values from first principles (explicit
// oracles, exhaustive enumeration, or statistical bounds with pinned
// tolerances) rather than trusting intermediate library state.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "qclab/census.hpp"
#include "qclab/compile.hpp"
#include "qclab/dqc1.hpp"
#include "qclab/linalg.hpp"
#include "qclab/pauli.hpp"
#include "qclab/verify.hpp"

using namespace qclab;

namespace {

int failures = 0;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(int id, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* pattern, ...) {
  char buffer[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buffer, sizeof buffer, pattern, args);
  va_end(args);
  return buffer;
}

int maj(const std::vector<int>& x) { return x[0] + x[1] + x[2] >= 2 ? 1 : 0; }

std::vector<int> input_bits(int packed) {
  return {packed & 1, (packed >> 1) & 1, (packed >> 2) & 1};
}

std::vector<int> tape_bits(std::uint64_t value, int width) {
  std::vector<int> bits(static_cast<size_t>(width));
  for (int i = 0; i < width; ++i) bits[static_cast<size_t>(i)] = (value >> (width - 1 - i)) & 1;
  return bits;
}

// Computes f(x) = x1 over Z_3 through one catalytic register (park, copy,
// unpark, uncopy); used to compare the two lowering backends.
RegisterProgram one_register_z3() {
  Polynomial reads_r2;
  reads_r2.terms.push_back(Monomial{1, {{1, 1}}});
  std::vector<Instruction> ins = {add_input(1, 0, 1), add_poly(0, reads_r2, 1),
                                  add_input(1, 0, -1), add_poly(0, reads_r2, -1)};
  return RegisterProgram(3, 2, 1, std::move(ins));
}

void criterion_1() {
  Timer timer;
  const double tol = 1e-10;
  double worst = 0.0;
  int count = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(101, static_cast<std::uint64_t>(trial));
    const int qubits = 1 + trial % 3;
    const auto dim = static_cast<Eigen::Index>(dim_of(qubits));
    const Mat m = ginibre(dim, dim, rng);
    const Mat back = pauli_reconstruct(pauli_decompose(m, qubits));
    const double err = (m - back).cwiseAbs().maxCoeff();
    if (err > worst) worst = err;
    ++count;
  }
  const double secs = timer.seconds();
  report(1, worst <= tol && count == 200 && secs < 5.0,
         fmt("pauli round-trip on %d matrices, worst error %.2e (tol 1e-10), %.2fs (< 5s)",
             count, worst, secs));
}

void criterion_2() {
  Timer timer;
  const double tol = 1e-9;
  int circuits = 0;
  int catalytic = 0;
  int adversarial = 0;
  int disagreements = 0;
  int ground_truth_misses = 0;
  for (const auto& entry : qclab_testing::verification_corpus()) {
    if (entry.circuit.work_width() > 2 || entry.circuit.catalytic_width() > 3) continue;
    ++circuits;
    ++(entry.catalytic ? catalytic : adversarial);
    const bool a = verify_pauliprod(entry.circuit, tol).passed;
    const bool b = verify_epr(entry.circuit, tol).passed;
    const bool c = verify_random_density(entry.circuit, 100, tol, 2026).passed;
    if (a != b || b != c) ++disagreements;
    if (a != entry.catalytic) ++ground_truth_misses;
  }
  const double secs = timer.seconds();
  report(2,
         circuits >= 20 && catalytic >= 10 && adversarial >= 10 && disagreements == 0 &&
             ground_truth_misses == 0 && secs < 60.0,
         fmt("%d corpus circuits (%d catalytic, %d adversarial), %d verifier disagreements, "
             "%d ground-truth misses, %.2fs (< 60s)",
             circuits, catalytic, adversarial, disagreements, ground_truth_misses, secs));
}

void criterion_3() {
  Timer timer;
  double worst_violation = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    Rng rng(303, static_cast<std::uint64_t>(trial));
    const int qubits = 1 + trial % 2;
    const auto dim = static_cast<Eigen::Index>(dim_of(qubits));
    const QuantumChannel phi = random_channel(qubits, 1 + trial % 2, rng);
    const DensityMatrix rho(qubits, random_density_matrix(dim, rng));
    const DensityMatrix sigma(qubits, random_density_matrix(dim, rng));
    std::vector<int> targets;
    for (int q = 0; q < qubits; ++q) targets.push_back(q);
    const double before = trace_distance(rho, sigma);
    const double after =
        trace_distance(apply_channel(phi, targets, rho), apply_channel(phi, targets, sigma));
    if (after - before > worst_violation) worst_violation = after - before;
  }

  // Orthogonal states with an exactly diagonal difference: the discrimination
  // probability must come back as the literal double 1.0, no tolerance.
  bool orthogonal_exact = true;
  for (int qubits = 1; qubits <= 3 && orthogonal_exact; ++qubits) {
    const auto dim = static_cast<Eigen::Index>(dim_of(qubits));
    for (Eigen::Index i = 0; i < dim && orthogonal_exact; ++i) {
      for (Eigen::Index j = i + 1; j < dim && orthogonal_exact; ++j) {
        Mat a = Mat::Zero(dim, dim);
        Mat b = Mat::Zero(dim, dim);
        a(i, i) = 1.0;
        b(j, j) = 1.0;
        orthogonal_exact =
            helstrom_success(DensityMatrix(qubits, a), DensityMatrix(qubits, b)) == 1.0;
      }
    }
    // Mixed-rank orthogonal pair: uniform over the lower and upper halves.
    Mat low = Mat::Zero(dim, dim);
    Mat high = Mat::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim / 2; ++i) {
      low(i, i) = 2.0 / static_cast<double>(dim);
      high(dim / 2 + i, dim / 2 + i) = 2.0 / static_cast<double>(dim);
    }
    orthogonal_exact = orthogonal_exact &&
                       helstrom_success(DensityMatrix(qubits, low),
                                        DensityMatrix(qubits, high)) == 1.0;
  }

  // Independent discrimination oracle: 1/2 + (sum of singular values)/4.
  double worst_oracle_gap = 0.0;
  double worst_orthogonal_gap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(304, static_cast<std::uint64_t>(trial));
    const int qubits = 1 + trial % 2;
    const auto dim = static_cast<Eigen::Index>(dim_of(qubits));
    const DensityMatrix rho(qubits, random_density_matrix(dim, rng));
    const DensityMatrix sigma(qubits, random_density_matrix(dim, rng));
    const Eigen::JacobiSVD<Mat> svd(rho.matrix() - sigma.matrix());
    const double oracle = 0.5 + 0.25 * svd.singularValues().sum();
    const double gap = std::abs(helstrom_success(rho, sigma) - oracle);
    if (gap > worst_oracle_gap) worst_oracle_gap = gap;

    const Mat u = random_unitary(dim, rng);
    const DensityMatrix pure0(qubits, u.col(0) * u.col(0).adjoint());
    const DensityMatrix pure1(qubits, u.col(1) * u.col(1).adjoint());
    const double ortho_gap = std::abs(helstrom_success(pure0, pure1) - 1.0);
    if (ortho_gap > worst_orthogonal_gap) worst_orthogonal_gap = ortho_gap;
  }
  const double secs = timer.seconds();
  report(3,
         worst_violation <= 1e-12 && orthogonal_exact && worst_oracle_gap <= 1e-12 &&
             worst_orthogonal_gap <= 1e-12,
         fmt("500 contractivity triples (worst violation %.2e), diagonal orthogonal pairs "
             "give exactly 1.0: %s, helstrom vs singular-value oracle gap %.2e, random "
             "orthogonal-pair gap %.2e (<= 1e-12), %.2fs",
             worst_violation, orthogonal_exact ? "yes" : "no", worst_oracle_gap,
             worst_orthogonal_gap, secs));
}

void criterion_4() {
  Timer timer;
  const RegisterProgram prog = threshold_program(3, 2, 5);
  const std::vector<int> truth = gate_truth_table(GateKind::Threshold, 3, 2);
  const CleanComputationCert cert = verify_clean(prog, truth, VerifyMode::Exhaustive());
  const auto domains = static_cast<std::uint64_t>(std::pow(5, prog.num_registers())) * 8;
  const double secs = timer.seconds();
  report(4,
         cert.passed && cert.exhaustive && cert.domains_checked == domains &&
             prog.num_registers() <= 6 && secs < 30.0,
         fmt("threshold MAJ3 over Z_5 clean on all %llu (tape, input) pairs, exhaustive=%s, "
             "%.2fs (< 30s)",
             static_cast<unsigned long long>(cert.domains_checked),
             cert.exhaustive ? "yes" : "no", secs));
}

void criterion_5() {
  Timer timer;
  bool ok = true;
  std::string fail;

  // Quantum exactness on the single-block layout (10 qubits total).
  const RegisterProgram prog = threshold_program(3, 2, 5);
  const CompiledArtifact art = compile_program(prog, Backend::Perm, 1);
  const int c = art.layout.catalytic_width();
  for (std::uint64_t tau = 0; tau < dim_of(c) && ok; ++tau) {
    for (int packed = 0; packed < 8 && ok; ++packed) {
      const std::vector<int> x = input_bits(packed);
      const CatalyticCircuit circ = with_input(art, x);
      const RunResult r = run(circ, PureState::basis(c, tau));
      const double back = r.catalytic_marginal.matrix()(static_cast<Eigen::Index>(tau),
                                                        static_cast<Eigen::Index>(tau))
                              .real();
      const double p1 = decision_probability(circ, PureState::basis(c, tau));
      if (std::abs(back - 1.0) > 1e-12 || std::abs(p1 - maj(x)) > 1e-12) {
        ok = false;
        fail = fmt("tape %llu input %d%d%d: reset diag %.2e, p1 %.4f",
                   static_cast<unsigned long long>(tau), x[0], x[1], x[2], back, p1);
      }
    }
  }

  // Classical exactness on the default two-blocks-per-register layout.
  const CompiledArtifact wide = compile_program(prog);
  const int cw = wide.layout.catalytic_width();
  for (std::uint64_t tau = 0; tau < dim_of(cw) && ok; ++tau) {
    for (int packed = 0; packed < 8 && ok; ++packed) {
      const std::vector<int> x = input_bits(packed);
      const ReplayResult r = replay_steps(wide.stream, wide.layout, x, tape_bits(tau, cw));
      if (r.tape_bits != tape_bits(tau, cw) || r.output_value != maj(x)) {
        ok = false;
        fail = fmt("default layout tape %llu broke", static_cast<unsigned long long>(tau));
      }
    }
  }

  double pauliprod_dev = 1.0;
  if (ok) {
    const CatalyticityReport rep = verify_pauliprod(with_input(art, {1, 0, 1}), 1e-9);
    pauliprod_dev = rep.max_reset_deviation;
    if (!rep.passed || pauliprod_dev > 1e-9) {
      ok = false;
      fail = fmt("pauliprod deviation %.2e", pauliprod_dev);
    }
  }

  int states_compared = 0;
  if (ok) {
    const RegisterProgram z3 = one_register_z3();
    const CompiledArtifact perm = compile_program(z3, Backend::Perm);
    const CompiledArtifact toff = compile_program(z3, Backend::Toffoli);
    const int common = perm.circuit.total_width();
    const int extra = toff.circuit.work_width() - perm.circuit.work_width();
    for (std::uint64_t a = 0; a < dim_of(common) && ok; ++a) {
      std::vector<int> bits = tape_bits(a, common);
      std::vector<int> padded(bits.begin(), bits.begin() + perm.circuit.work_width());
      padded.insert(padded.end(), static_cast<size_t>(extra), 0);
      padded.insert(padded.end(), bits.begin() + perm.circuit.work_width(), bits.end());
      const std::vector<int> via_perm = classical_run(perm.circuit, bits);
      const std::vector<int> via_toff = classical_run(toff.circuit, padded);
      ++states_compared;
      for (int q = 0; q < common && ok; ++q) {
        const int mapped = q < perm.circuit.work_width() ? q : q + extra;
        if (via_toff[static_cast<size_t>(mapped)] != via_perm[static_cast<size_t>(q)]) {
          ok = false;
          fail = fmt("backends disagree on basis state %llu",
                     static_cast<unsigned long long>(a));
        }
      }
    }
  }

  const double secs = timer.seconds();
  if (ok && secs >= 300.0) {
    ok = false;
    fail = "runtime over budget";
  }
  report(5, ok,
         ok ? fmt("majority circuit exact on %llu (tape, input) pairs plus %llu classical, "
                  "pauliprod deviation %.2e (<= 1e-9), backends agree on %d states, "
                  "%.2fs (< 300s)",
                  static_cast<unsigned long long>(dim_of(c) * 8),
                  static_cast<unsigned long long>(dim_of(cw) * 8), pauliprod_dev,
                  states_compared, secs)
            : fail);
}

void criterion_6() {
  Timer timer;
  bool ok = true;
  std::string fail;

  const RegisterProgram prog = threshold_program(3, 2, 5);
  const CompiledArtifact art = compile_program(prog, Backend::Perm, 1);
  for (int packed = 0; packed < 8 && ok; ++packed) {
    const std::vector<int> x = input_bits(packed);
    const DQCkInstance inst = from_unitary_catalytic(with_input(art, x));
    const OutcomeEstimate est = exact_probabilities(inst);
    const double want = maj(x);
    if (std::abs(est.p1 - want) > 1e-12) {
      ok = false;
      fail = fmt("input %d%d%d gave p1 = %.6f", x[0], x[1], x[2], est.p1);
    }
  }

  double marginal_dev = 1.0;
  if (ok) {
    const DQCkInstance inst = from_unitary_catalytic(with_input(art, {1, 1, 0}));
    const DensityMatrix marginal = mixed_marginal_after(inst);
    const auto dim = static_cast<Eigen::Index>(dim_of(inst.mixed_count));
    marginal_dev =
        (marginal.matrix() - Mat::Identity(dim, dim) / static_cast<double>(dim))
            .cwiseAbs()
            .maxCoeff();
    if (marginal_dev > 1e-9) {
      ok = false;
      fail = fmt("mixed marginal off identity by %.2e", marginal_dev);
    }
  }

  const int l = 4;
  double worst_success = 1.0;
  bool never_wrong = true;
  if (ok) {
    const CycledMachine probe = cycle_wrap(prog, l, 1);
    const std::size_t t = static_cast<std::size_t>(probe.cycle_length) + 1;
    for (int packed = 0; packed < 8; ++packed) {
      const CLPipelineResult pipe = cl_pipeline(prog, input_bits(packed), l, t, 1);
      if (pipe.census_success < worst_success) worst_success = pipe.census_success;
      never_wrong = never_wrong && pipe.never_wrong;
    }
    if (worst_success < 0.6 || !never_wrong) {
      ok = false;
      fail = fmt("cycled census success %.4f (need >= 0.6), never-wrong %s", worst_success,
                 never_wrong ? "yes" : "no");
    }
  }

  const double secs = timer.seconds();
  if (ok && secs >= 300.0) {
    ok = false;
    fail = "runtime over budget";
  }
  report(6, ok,
         ok ? fmt("lifted majority exact on 8 inputs, mixed marginal within %.2e of I/2^n "
                  "(<= 1e-9), cycled l=4 census success %.2f >= 0.6 and never wrong, "
                  "%.2fs (< 300s)",
                  marginal_dev, worst_success, secs)
            : fail);
}

void criterion_7() {
  Timer timer;
  bool ok = true;
  std::string fail;
  const int c = 16;
  const CatalyticAutomaton machines[] = {immediate_halt_automaton(c), bit_scan_walker(c),
                                         modular_counter(c)};
  for (const CatalyticAutomaton& m : machines) {
    if (m.state_bits + m.clean_bits > 4) {
      ok = false;
      fail = m.name + " uses more than 4 clean bits";
      break;
    }
    const CensusReport r = runtime_census(m);
    if (!(r.sum_runtimes <= r.configuration_count && r.trajectories_disjoint &&
          r.tapes_restored)) {
      ok = false;
      fail = fmt("%s: sum %llu vs configs %llu, disjoint %s, restored %s", m.name.c_str(),
                 static_cast<unsigned long long>(r.sum_runtimes),
                 static_cast<unsigned long long>(r.configuration_count),
                 r.trajectories_disjoint ? "yes" : "no", r.tapes_restored ? "yes" : "no");
      break;
    }
  }
  const double secs = timer.seconds();
  if (ok && secs >= 120.0) {
    ok = false;
    fail = "runtime over budget";
  }
  report(7, ok,
         ok ? fmt("3 built-ins at c=16: runtimes sum within the configuration space, "
                  "trajectories disjoint, tapes restored, %.2fs (< 120s)",
                  secs)
            : fail);
}

void criterion_8() {
  Timer timer;
  const std::uint64_t shots = 100000;
  double worst_sigmas = 0.0;
  int instances = 0;
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng(808, static_cast<std::uint64_t>(trial));
    const int clean = 1 + trial % 3;
    const DQCkInstance inst = from_dense(clean, 4 - clean, random_unitary(16, rng));
    const OutcomeEstimate exact = exact_probabilities(inst);
    const OutcomeEstimate sampled = sample(inst, shots, static_cast<std::uint64_t>(trial));
    const double se =
        std::sqrt(std::max(exact.p0 * exact.p1, 1e-12) / static_cast<double>(shots));
    const double sigmas = std::abs(sampled.p1 - exact.p1) / se;
    if (sigmas > worst_sigmas) worst_sigmas = sigmas;
    ++instances;
  }
  const double secs = timer.seconds();
  report(8, instances == 50 && worst_sigmas <= 5.0,
         fmt("%d random 4-qubit instances at %llu shots, worst deviation %.2f standard "
             "errors (<= 5), %.2fs",
             instances, static_cast<unsigned long long>(shots), worst_sigmas, secs));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  if (failures > 0) std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
