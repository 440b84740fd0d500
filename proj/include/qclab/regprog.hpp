#pragma once

// Clean register programs over Z_p.
//
// A program acts on m registers holding arbitrary unknown values tau and may
// only add or subtract: an input variable (R_j += x_k) or a polynomial in
// the other registers (R_j += q(...), target excluded so sign-flipping
// inverts every step). The program cleanly computes f when the net effect is
// R_1 += f(x) with every other register restored, for every initial tape.
//
// verify_clean is the ground-truth oracle for all constructions here; any
// instruction sequence it passes is admissible.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "qclab/common.hpp"
#include "qclab/rng.hpp"

namespace qclab {

inline bool is_prime(int p) {
  if (p < 2) return false;
  for (int d = 2; static_cast<long long>(d) * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

inline int mod_reduce(long long v, int p) {
  const long long r = v % p;
  return static_cast<int>(r < 0 ? r + p : r);
}

inline int mod_pow(long long base, long long exp, int p) {
  long long acc = 1 % p;
  base = mod_reduce(base, p);
  while (exp > 0) {
    if (exp & 1) acc = acc * base % p;
    base = base * base % p;
    exp >>= 1;
  }
  return static_cast<int>(acc);
}

inline int mod_inverse(int v, int p) {
  require(v % p != 0, "no inverse of 0");
  return mod_pow(v, p - 2, p);
}

/// coeff * prod_i R_{reg_i}^{exp_i}; an empty power list is a constant term.
struct Monomial {
  int coeff = 0;
  std::vector<std::pair<int, int>> powers;  // (register, exponent >= 1)
};

struct Polynomial {
  std::vector<Monomial> terms;
};

inline int eval_polynomial(const Polynomial& poly, const std::vector<int>& tape, int p) {
  long long total = 0;
  for (const Monomial& term : poly.terms) {
    long long v = term.coeff % p;
    for (const auto& [reg, exp] : term.powers)
      v = v * mod_pow(tape[static_cast<std::size_t>(reg)], exp, p) % p;
    total += v;
  }
  return mod_reduce(total, p);
}

struct Instruction {
  enum class Kind { AddInput, AddPoly };
  Kind kind = Kind::AddInput;
  int target = 0;
  int sign = 1;  // +1 or -1
  int input = -1;
  Polynomial poly;
};

inline Instruction add_input(int target, int input, int sign = 1) {
  Instruction ins;
  ins.kind = Instruction::Kind::AddInput;
  ins.target = target;
  ins.input = input;
  ins.sign = sign;
  return ins;
}

inline Instruction add_poly(int target, Polynomial poly, int sign = 1) {
  Instruction ins;
  ins.kind = Instruction::Kind::AddPoly;
  ins.target = target;
  ins.poly = std::move(poly);
  ins.sign = sign;
  return ins;
}

class RegisterProgram {
 public:
  RegisterProgram(int modulus, int num_registers, int num_inputs,
                  std::vector<Instruction> instructions)
      : modulus_(modulus),
        num_registers_(num_registers),
        num_inputs_(num_inputs),
        instructions_(std::move(instructions)) {
    require(is_prime(modulus_), "modulus must be prime");
    require(num_registers_ >= 1, "need at least one register");
    require(num_inputs_ >= 0, "negative input count");
    for (Instruction& ins : instructions_) {
      require(ins.target >= 0 && ins.target < num_registers_, "target register out of range");
      require(ins.sign == 1 || ins.sign == -1, "sign must be +1 or -1");
      if (ins.kind == Instruction::Kind::AddInput) {
        require(ins.input >= 0 && ins.input < num_inputs_, "input index out of range");
      } else {
        for (Monomial& term : ins.poly.terms) {
          term.coeff = mod_reduce(term.coeff, modulus_);
          for (const auto& [reg, exp] : term.powers) {
            require(reg >= 0 && reg < num_registers_, "polynomial register out of range");
            require(reg != ins.target, "polynomial may not read its own target");
            require(exp >= 1, "exponents start at 1");
          }
        }
      }
    }
  }

  int modulus() const { return modulus_; }
  int num_registers() const { return num_registers_; }
  int num_inputs() const { return num_inputs_; }
  const std::vector<Instruction>& instructions() const { return instructions_; }

 private:
  int modulus_;
  int num_registers_;
  int num_inputs_;
  std::vector<Instruction> instructions_;
};

inline void execute_step(const Instruction& ins, const std::vector<int>& x,
                         std::vector<int>& tape, int p) {
  long long delta = ins.kind == Instruction::Kind::AddInput
                        ? x[static_cast<std::size_t>(ins.input)]
                        : eval_polynomial(ins.poly, tape, p);
  auto& cell = tape[static_cast<std::size_t>(ins.target)];
  cell = mod_reduce(cell + ins.sign * delta, p);
}

inline std::vector<int> execute(const RegisterProgram& prog, const std::vector<int>& x,
                                std::vector<int> tape) {
  require(static_cast<int>(x.size()) == prog.num_inputs(), "input vector has wrong length");
  require(static_cast<int>(tape.size()) == prog.num_registers(), "tape has wrong length");
  for (const Instruction& ins : prog.instructions())
    execute_step(ins, x, tape, prog.modulus());
  return tape;
}

inline RegisterProgram reverse(const RegisterProgram& prog) {
  std::vector<Instruction> rev(prog.instructions().rbegin(), prog.instructions().rend());
  for (Instruction& ins : rev) ins.sign = -ins.sign;
  return RegisterProgram(prog.modulus(), prog.num_registers(), prog.num_inputs(),
                         std::move(rev));
}

/// Concatenation of programs over the same modulus and input set.
inline RegisterProgram concat(const RegisterProgram& a, const RegisterProgram& b) {
  require(a.modulus() == b.modulus() && a.num_inputs() == b.num_inputs(),
          "programs must share modulus and inputs");
  std::vector<Instruction> ins = a.instructions();
  ins.insert(ins.end(), b.instructions().begin(), b.instructions().end());
  return RegisterProgram(a.modulus(), std::max(a.num_registers(), b.num_registers()),
                         a.num_inputs(), std::move(ins));
}

struct CleanComputationCert {
  std::vector<int> verified_function;  // truth table over {0,1}^n
  std::uint64_t domains_checked = 0;
  bool passed = false;
  bool exhaustive = false;
  std::string counterexample;  // first failing (x, tape) if any
  std::string note;            // e.g. budget fallback warning
};

struct VerifyMode {
  bool exhaustive = true;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  static VerifyMode Exhaustive() { return {true, 0, 0}; }
  static VerifyMode Sampled(std::uint64_t trials, std::uint64_t seed) {
    return {false, trials, seed};
  }
};

namespace detail {

inline std::string format_counterexample(const std::vector<int>& x,
                                         const std::vector<int>& tape_in,
                                         const std::vector<int>& tape_out) {
  std::string s = "x=(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + std::to_string(x[i]);
  s += ") tape=(";
  for (std::size_t i = 0; i < tape_in.size(); ++i)
    s += (i ? "," : "") + std::to_string(tape_in[i]);
  s += ") final=(";
  for (std::size_t i = 0; i < tape_out.size(); ++i)
    s += (i ? "," : "") + std::to_string(tape_out[i]);
  s += ")";
  return s;
}

inline bool clean_case(const RegisterProgram& prog, const std::vector<int>& truth,
                       const std::vector<int>& x, const std::vector<int>& tape,
                       CleanComputationCert& cert) {
  std::vector<int> out = execute(prog, x, tape);
  std::uint64_t idx = 0;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k]) idx |= (1ull << k);
  const int expected = mod_reduce(tape[0] + truth[idx], prog.modulus());
  bool ok = out[0] == expected;
  for (std::size_t j = 1; ok && j < tape.size(); ++j) ok = out[j] == tape[j];
  cert.domains_checked += 1;
  if (!ok && cert.counterexample.empty())
    cert.counterexample = format_counterexample(x, tape, out);
  return ok;
}

}  // namespace detail

/// Ground-truth oracle: exhaustively (or at scale, by sampling) checks that
/// the net effect is R_1 += f(x) with every other register restored. In
/// exhaustive mode, blowing the evaluation budget falls back to sampling and
/// says so in the note.
inline CleanComputationCert verify_clean(const RegisterProgram& prog,
                                         const std::vector<int>& truth,
                                         VerifyMode mode = VerifyMode::Exhaustive()) {
  const int n = prog.num_inputs();
  const int m = prog.num_registers();
  const int p = prog.modulus();
  require(truth.size() == (1ull << n), "truth table must cover {0,1}^n");
  for (int v : truth) require(v >= 0 && v < p, "truth values live in Z_p");

  CleanComputationCert cert;
  cert.verified_function = truth;

  bool exhaustive = mode.exhaustive;
  if (exhaustive) {
    double cost = std::pow(static_cast<double>(p), m) * std::pow(2.0, n);
    if (cost > static_cast<double>(limits().exhaustive_budget)) {
      exhaustive = false;
      cert.note = "exhaustive budget exceeded; fell back to " +
                  std::to_string(limits().sampled_trials) + " sampled cases";
    }
  }
  cert.exhaustive = exhaustive;

  bool ok = true;
  if (exhaustive) {
    std::vector<int> x(static_cast<std::size_t>(n), 0);
    for (std::uint64_t xi = 0; xi < (1ull << n); ++xi) {
      for (int k = 0; k < n; ++k) x[static_cast<std::size_t>(k)] = (xi >> k) & 1;
      std::vector<int> tape(static_cast<std::size_t>(m), 0);
      while (true) {
        ok = detail::clean_case(prog, truth, x, tape, cert) && ok;
        int j = 0;
        while (j < m && ++tape[static_cast<std::size_t>(j)] == p)
          tape[static_cast<std::size_t>(j++)] = 0;
        if (j == m) break;
      }
    }
  } else {
    const std::uint64_t trials = mode.trials ? mode.trials : limits().sampled_trials;
    Rng rng(mode.seed, 0);
    for (std::uint64_t t = 0; t < trials; ++t) {
      std::vector<int> x(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k)
        x[static_cast<std::size_t>(k)] = static_cast<int>(rng.uniform_int(2));
      std::vector<int> tape(static_cast<std::size_t>(m));
      for (int j = 0; j < m; ++j)
        tape[static_cast<std::size_t>(j)] =
            static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(p)));
      ok = detail::clean_case(prog, truth, x, tape, cert) && ok;
    }
  }
  cert.passed = ok;
  return cert;
}

/// Image-count reversibility check: for fixed inputs, the whole program must
/// permute the p^m register space.
inline bool is_tape_bijection(const RegisterProgram& prog, const std::vector<int>& x) {
  const int m = prog.num_registers();
  const int p = prog.modulus();
  const double size = std::pow(static_cast<double>(p), m);
  require(size <= 1e5, "image counting capped at p^m <= 1e5");
  std::vector<bool> seen(static_cast<std::size_t>(size), false);
  std::uint64_t distinct = 0;
  std::vector<int> tape(static_cast<std::size_t>(m), 0);
  while (true) {
    std::vector<int> out = execute(prog, x, tape);
    std::uint64_t code = 0;
    for (int j = m - 1; j >= 0; --j)
      code = code * static_cast<std::uint64_t>(p) +
             static_cast<std::uint64_t>(out[static_cast<std::size_t>(j)]);
    if (!seen[code]) {
      seen[code] = true;
      ++distinct;
    }
    int j = 0;
    while (j < m && ++tape[static_cast<std::size_t>(j)] == p)
      tape[static_cast<std::size_t>(j++)] = 0;
    if (j == m) break;
  }
  return distinct == static_cast<std::uint64_t>(size);
}

// --- Gate and circuit constructions -----------------------------------------

enum class GateKind { Not, And, Or, Xor, Threshold };

inline std::string to_string(GateKind k) {
  switch (k) {
    case GateKind::Not: return "NOT";
    case GateKind::And: return "AND";
    case GateKind::Or: return "OR";
    case GateKind::Xor: return "XOR";
    case GateKind::Threshold: return "TH";
  }
  return "?";
}

inline std::vector<int> gate_truth_table(GateKind kind, int fan_in, int threshold_k = 0) {
  require(fan_in >= 1 && fan_in <= 5, "fan-in must be between 1 and 5");
  if (kind == GateKind::Not) require(fan_in == 1, "NOT takes one input");
  if (kind == GateKind::Threshold)
    require(threshold_k >= 0 && threshold_k <= fan_in, "threshold out of range");
  std::vector<int> truth(1ull << fan_in);
  for (std::uint64_t mask = 0; mask < truth.size(); ++mask) {
    const int ones = __builtin_popcountll(mask);
    switch (kind) {
      case GateKind::Not: truth[mask] = ones == 0 ? 1 : 0; break;
      case GateKind::And: truth[mask] = ones == fan_in ? 1 : 0; break;
      case GateKind::Or: truth[mask] = ones > 0 ? 1 : 0; break;
      case GateKind::Xor: truth[mask] = ones & 1; break;
      case GateKind::Threshold: truth[mask] = ones >= threshold_k ? 1 : 0; break;
    }
  }
  return truth;
}

/// Coefficients of the unique multilinear polynomial matching a truth table
/// on {0,1} inputs, by Moebius inversion; index = subset mask. The identity
/// f(x) = sum_S c_S prod_{i in S} x_i holds over the integers, so it holds
/// mod every prime.
inline std::vector<int> multilinear_coefficients(const std::vector<int>& truth, int p) {
  std::vector<long long> c(truth.begin(), truth.end());
  int f = 0;
  while ((1ull << f) < truth.size()) ++f;
  require(truth.size() == (1ull << f), "truth table size must be a power of two");
  for (int i = 0; i < f; ++i)
    for (std::size_t mask = 0; mask < c.size(); ++mask)
      if (mask & (1ull << i)) c[mask] -= c[mask ^ (1ull << i)];
  std::vector<int> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = mod_reduce(c[i], p);
  return out;
}

namespace detail {

/// Emits the product gadget: target += sign * c * prod_{i in S} x_{inputs[i]}
/// using one scratch register per factor. Subsets of loaded factors are
/// walked in Gray-code order, adding
///   c * prod x_i = sum_{T subset S} (-1)^{|S|-|T|} c * prod_j (tau_j + [j in T] x_j)
/// term by term; the identity holds over any ring, so every prime works.
inline void emit_product_gadget(int target, int coeff, const std::vector<int>& factors,
                                const std::vector<int>& scratch, int sign, int p,
                                std::vector<Instruction>& out) {
  const int d = static_cast<int>(factors.size());
  if (d == 0) {
    Polynomial constant{{Monomial{coeff, {}}}};
    out.push_back(add_poly(target, std::move(constant), sign));
    return;
  }
  if (d == 1) {
    // c * x_k needs no scratch: repeat the input addition, going the short
    // way around Z_p (c times forward or p - c times backward).
    const int forward = mod_reduce(coeff, p);
    const int reps = std::min(forward, p - forward);
    const int dir = forward <= p - forward ? 1 : -1;
    for (int r = 0; r < reps; ++r) out.push_back(add_input(target, factors[0], sign * dir));
    return;
  }
  Monomial prod;
  prod.coeff = coeff;
  for (int i = 0; i < d; ++i) prod.powers.push_back({scratch[static_cast<std::size_t>(i)], 1});
  std::uint64_t prev = 0;
  for (std::uint64_t k = 0; k < (1ull << d); ++k) {
    const std::uint64_t code = k ^ (k >> 1);
    if (k > 0) {
      const std::uint64_t toggled = code ^ prev;
      const int bit = __builtin_ctzll(toggled);
      const bool now_set = (code >> bit) & 1;
      out.push_back(add_input(scratch[static_cast<std::size_t>(bit)],
                              factors[static_cast<std::size_t>(bit)], now_set ? 1 : -1));
    }
    const int term_sign = ((d - __builtin_popcountll(code)) % 2 == 0) ? 1 : -1;
    out.push_back(add_poly(target, Polynomial{{prod}}, sign * term_sign));
    prev = code;
  }
  // The Gray walk ends with only the top factor loaded.
  out.push_back(add_input(scratch[static_cast<std::size_t>(d - 1)],
                          factors[static_cast<std::size_t>(d - 1)], -1));
}

}  // namespace detail

/// Program computing the multilinear polynomial with the given subset
/// coefficients over inputs x_1..x_n; register 0 is the target, registers
/// 1..maxdeg are scratch.
inline RegisterProgram multilinear_program(int p, int n, const std::vector<int>& coeffs) {
  require(coeffs.size() == (1ull << n), "need one coefficient per subset");
  int scratch_need = 0;
  for (std::size_t mask = 0; mask < coeffs.size(); ++mask) {
    const int d = __builtin_popcountll(mask);
    if (coeffs[mask] % p != 0 && d >= 2) scratch_need = std::max(scratch_need, d);
  }
  std::vector<Instruction> ins;
  for (std::size_t mask = 0; mask < coeffs.size(); ++mask) {
    const int c = mod_reduce(coeffs[mask], p);
    if (c == 0) continue;
    std::vector<int> factors, scratch;
    for (int i = 0; i < n; ++i)
      if (mask & (1ull << i)) {
        factors.push_back(i);
        scratch.push_back(1 + static_cast<int>(scratch.size()));
      }
    detail::emit_product_gadget(0, c, factors, scratch, 1, p, ins);
  }
  return RegisterProgram(p, 1 + scratch_need, n, std::move(ins));
}

/// Working modulus when nothing pins one: 5 for fan-in up to 3, 7 above.
inline int default_modulus(int fan_in) { return fan_in <= 3 ? 5 : 7; }

/// Clean program for a single named gate. The stated working range is
/// p > fan-in, matching the usual faithful-arithmetic requirement; the
/// multilinear route is in fact exact over any prime (coefficients are
/// integers and inputs are 0/1), which verify_clean confirms, so smaller
/// primes are accepted too.
inline RegisterProgram gate_program(GateKind kind, int fan_in, int p, int threshold_k = 0) {
  require(is_prime(p), "modulus must be prime");
  std::vector<int> truth = gate_truth_table(kind, fan_in, threshold_k);
  return multilinear_program(p, fan_in, multilinear_coefficients(truth, p));
}

/// Threshold gate via the symmetric-polynomial route: f depends on t = sum x_i
/// only, so interpolate f(t) on t = 0..n and realize each power t^d with the
/// finite-difference identity d! t^d = sum_j (-1)^(d-j) C(d,j) (tau + j t)^d
/// on a single scratch register. Needs p > n for distinct points and
/// invertible factorials; uses two registers total.
inline RegisterProgram threshold_program(int n, int k, int p) {
  require(is_prime(p), "modulus must be prime");
  require(n >= 1, "need at least one input");
  require(p > n, "symmetric route needs p > n");
  require(k >= 0 && k <= n, "threshold out of range");

  // Interpolate f(t) = [t >= k] on points 0..n by Gaussian elimination.
  const int rows = n + 1;
  std::vector<std::vector<long long>> aug(static_cast<std::size_t>(rows),
                                          std::vector<long long>(static_cast<std::size_t>(rows + 1)));
  for (int t = 0; t < rows; ++t) {
    for (int d = 0; d < rows; ++d)
      aug[static_cast<std::size_t>(t)][static_cast<std::size_t>(d)] = mod_pow(t, d, p);
    aug[static_cast<std::size_t>(t)][static_cast<std::size_t>(rows)] = t >= k ? 1 : 0;
  }
  for (int col = 0; col < rows; ++col) {
    int pivot = col;
    while (pivot < rows && aug[static_cast<std::size_t>(pivot)][static_cast<std::size_t>(col)] % p == 0)
      ++pivot;
    require(pivot < rows, "singular interpolation system");
    std::swap(aug[static_cast<std::size_t>(col)], aug[static_cast<std::size_t>(pivot)]);
    const long long inv = mod_inverse(
        mod_reduce(aug[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)], p), p);
    for (int j = col; j <= rows; ++j)
      aug[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)] =
          mod_reduce(aug[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)] * inv, p);
    for (int r = 0; r < rows; ++r) {
      if (r == col) continue;
      const long long factor =
          mod_reduce(aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)], p);
      if (factor == 0) continue;
      for (int j = col; j <= rows; ++j)
        aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] = mod_reduce(
            aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] -
                factor * aug[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)],
            p);
    }
  }
  std::vector<int> a(static_cast<std::size_t>(rows));
  for (int d = 0; d < rows; ++d)
    a[static_cast<std::size_t>(d)] =
        mod_reduce(aug[static_cast<std::size_t>(d)][static_cast<std::size_t>(rows)], p);

  // Pascal triangle for C(d, j) mod p.
  std::vector<std::vector<int>> binom(static_cast<std::size_t>(rows),
                                      std::vector<int>(static_cast<std::size_t>(rows), 0));
  for (int d = 0; d < rows; ++d) {
    binom[static_cast<std::size_t>(d)][0] = 1;
    for (int j = 1; j <= d; ++j)
      binom[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)] =
          mod_reduce(binom[static_cast<std::size_t>(d - 1)][static_cast<std::size_t>(j - 1)] +
                         binom[static_cast<std::size_t>(d - 1)][static_cast<std::size_t>(j)],
                     p);
  }

  std::vector<Instruction> ins;
  if (a[0] != 0) ins.push_back(add_poly(0, Polynomial{{Monomial{a[0], {}}}}, 1));
  const int scratch = 1;
  auto ramp = [&](int steps, int sign) {
    for (int step = 0; step < steps; ++step)
      for (int i = 0; i < n; ++i) ins.push_back(add_input(scratch, i, sign));
  };
  for (int d = 1; d < rows; ++d) {
    if (a[static_cast<std::size_t>(d)] == 0) continue;
    int factorial = 1;
    for (int j = 2; j <= d; ++j) factorial = mod_reduce(static_cast<long long>(factorial) * j, p);
    const int scale =
        mod_reduce(static_cast<long long>(a[static_cast<std::size_t>(d)]) * mod_inverse(factorial, p), p);
    for (int j = 0; j <= d; ++j) {
      if (j > 0) ramp(1, 1);  // scratch = tau + j*t
      const int coeff =
          mod_reduce(static_cast<long long>(scale) * binom[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)], p);
      const int sign = ((d - j) % 2 == 0) ? 1 : -1;
      ins.push_back(add_poly(0, Polynomial{{Monomial{coeff, {{scratch, d}}}}}, sign));
    }
    ramp(d, -1);  // restore the scratch register
  }
  return RegisterProgram(p, 2, n, std::move(ins));
}

// --- Gate DAGs ---------------------------------------------------------------

/// Acyclic gate circuit: node arguments refer to inputs (0..n-1) or earlier
/// nodes (n + node index), so the structure cannot form a cycle.
struct GateCircuit {
  struct Node {
    GateKind kind = GateKind::And;
    int threshold_k = 0;
    std::vector<int> args;
  };
  int num_inputs = 0;
  std::vector<Node> nodes;
  int output = -1;  // node index; defaults to the last node

  int output_node() const {
    require(!nodes.empty(), "circuit has no gates");
    return output < 0 ? static_cast<int>(nodes.size()) - 1 : output;
  }

  void validate() const {
    require(num_inputs >= 0, "negative input count");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Node& node = nodes[i];
      require(!node.args.empty() && node.args.size() <= 5, "fan-in must be between 1 and 5");
      for (int a : node.args)
        require(a >= 0 && a < num_inputs + static_cast<int>(i),
                "argument must reference an input or an earlier node");
      gate_truth_table(node.kind, static_cast<int>(node.args.size()), node.threshold_k);
    }
    require(output_node() >= 0 && output_node() < static_cast<int>(nodes.size()),
            "output node out of range");
  }
};

/// Classical evaluator, the oracle the composed programs are checked against.
inline int eval_gate_circuit(const GateCircuit& circuit, const std::vector<int>& x) {
  circuit.validate();
  require(static_cast<int>(x.size()) == circuit.num_inputs, "input vector has wrong length");
  std::vector<int> value(circuit.nodes.size());
  for (std::size_t i = 0; i < circuit.nodes.size(); ++i) {
    const auto& node = circuit.nodes[i];
    std::uint64_t mask = 0;
    for (std::size_t j = 0; j < node.args.size(); ++j) {
      const int a = node.args[j];
      const int v = a < circuit.num_inputs ? x[static_cast<std::size_t>(a)]
                                           : value[static_cast<std::size_t>(a - circuit.num_inputs)];
      if (v) mask |= (1ull << j);
    }
    value[i] =
        gate_truth_table(node.kind, static_cast<int>(node.args.size()), node.threshold_k)[mask];
  }
  return value[static_cast<std::size_t>(circuit.output_node())];
}

namespace detail {

struct DagEmitter {
  const GateCircuit& circuit;
  int p;
  int bank_width;
  int max_depth;
  std::size_t instruction_cap;
  int deepest_level = 0;

  // Adds sign * value(ref) to target. Scratch for this call comes from the
  // per-level register bank, so recursive emissions never collide.
  void emit(int ref, int target, int level, int sign, std::vector<Instruction>& out) {
    require(level <= max_depth, "gate DAG exceeds the configured depth bound");
    require(out.size() < instruction_cap, "composed program exceeds the instruction cap");
    if (ref < circuit.num_inputs) {
      out.push_back(add_input(target, ref, sign));
      return;
    }
    if (sign < 0) {
      std::vector<Instruction> block;
      emit(ref, target, level, 1, block);
      for (auto it = block.rbegin(); it != block.rend(); ++it) {
        Instruction flipped = *it;
        flipped.sign = -flipped.sign;
        out.push_back(std::move(flipped));
      }
      return;
    }
    const auto& node = circuit.nodes[static_cast<std::size_t>(ref - circuit.num_inputs)];
    const int f = static_cast<int>(node.args.size());
    const std::vector<int> coeffs =
        multilinear_coefficients(gate_truth_table(node.kind, f, node.threshold_k), p);
    const int bank_base = 1 + level * bank_width;
    deepest_level = std::max(deepest_level, level);
    for (std::size_t mask = 0; mask < coeffs.size(); ++mask) {
      const int c = coeffs[mask];
      if (c == 0) continue;
      const int d = __builtin_popcountll(mask);
      if (d == 0) {
        out.push_back(add_poly(target, Polynomial{{Monomial{c, {}}}}, 1));
        continue;
      }
      // Same Gray-code walk as emit_product_gadget, but a factor toggle
      // recurses into the argument node.
      std::vector<int> members, scratch;
      for (int i = 0; i < f; ++i)
        if (mask & (1ull << i)) {
          members.push_back(node.args[static_cast<std::size_t>(i)]);
          scratch.push_back(bank_base + static_cast<int>(scratch.size()));
        }
      Monomial prod;
      prod.coeff = c;
      for (int r : scratch) prod.powers.push_back({r, 1});
      std::uint64_t prev = 0;
      for (std::uint64_t kk = 0; kk < (1ull << d); ++kk) {
        const std::uint64_t code = kk ^ (kk >> 1);
        if (kk > 0) {
          const int bit = __builtin_ctzll(code ^ prev);
          const bool now_set = (code >> bit) & 1;
          emit(members[static_cast<std::size_t>(bit)], scratch[static_cast<std::size_t>(bit)],
               level + 1, now_set ? 1 : -1, out);
        }
        const int term_sign = ((d - __builtin_popcountll(code)) % 2 == 0) ? 1 : -1;
        out.push_back(add_poly(target, Polynomial{{prod}}, term_sign));
        prev = code;
      }
      emit(members[static_cast<std::size_t>(d - 1)], scratch[static_cast<std::size_t>(d - 1)],
           level + 1, -1, out);
    }
  }
};

}  // namespace detail

/// Composes gate programs along the DAG with compute/copy/uncompute so every
/// intermediate register is restored; register count is at most
/// (1 + max fan-in) * (depth + 1).
inline RegisterProgram circuit_to_program(const GateCircuit& circuit, int p,
                                          int max_depth = 8) {
  circuit.validate();
  require(is_prime(p), "modulus must be prime");
  int bank_width = 1;
  for (const auto& node : circuit.nodes)
    bank_width = std::max(bank_width, static_cast<int>(node.args.size()));
  detail::DagEmitter emitter{circuit, p, bank_width, max_depth, 1u << 20, 0};
  std::vector<Instruction> ins;
  emitter.emit(circuit.num_inputs + circuit.output_node(), 0, 0, 1, ins);
  const int m = 1 + (emitter.deepest_level + 1) * bank_width;
  return RegisterProgram(p, m, circuit.num_inputs, std::move(ins));
}

}  // namespace qclab
