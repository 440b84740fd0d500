#pragma once

// Plain-text circuit files.
//
//   # comment (blank lines ignored)
//   WORK 2
//   CAT 1
//   OUTPUT 0
//   GATE H 0
//   GATE CNOT 0 2
//   PERM adder.perm 0 1 2
//   MEASURE 1
//
// WORK and CAT must precede the first step; OUTPUT defaults to qubit 0.
// A MEASURE line puts the whole circuit in general (channel) mode.
// PERM loads a permutation side file, path relative to the circuit file:
//
//   DIM 8
//   0 1
//   1 0
//
// listing "from to" pairs; unlisted points stay fixed. Parsers report
// file:line on every complaint.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qclab/circuit.hpp"
#include "qclab/regprog.hpp"

namespace qclab {

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& file, int line, const std::string& what) {
  throw std::invalid_argument(file + ":" + std::to_string(line) + ": " + what);
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return in;
}

inline bool blank_or_comment(const std::string& line) {
  for (char ch : line) {
    if (ch == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(ch))) return false;
  }
  return true;
}

}  // namespace detail

inline std::vector<std::uint64_t> read_permutation(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  std::string line;
  int lineno = 0;
  std::vector<std::uint64_t> perm;
  std::vector<bool> assigned;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank_or_comment(line)) continue;
    std::istringstream ss(line);
    std::string head;
    ss >> head;
    if (head == "DIM") {
      std::uint64_t d = 0;
      if (!(ss >> d) || d == 0) detail::parse_fail(path, lineno, "DIM needs a positive size");
      if (!perm.empty()) detail::parse_fail(path, lineno, "duplicate DIM");
      perm.resize(d);
      assigned.assign(d, false);
      for (std::uint64_t i = 0; i < d; ++i) perm[i] = i;
      continue;
    }
    if (perm.empty()) detail::parse_fail(path, lineno, "DIM must come first");
    std::uint64_t from = 0, to = 0;
    std::istringstream pair(line);
    if (!(pair >> from >> to)) detail::parse_fail(path, lineno, "expected 'from to' pair");
    if (from >= perm.size() || to >= perm.size())
      detail::parse_fail(path, lineno, "index out of range");
    if (assigned[from]) detail::parse_fail(path, lineno, "point mapped twice");
    assigned[from] = true;
    perm[from] = to;
  }
  if (perm.empty()) throw std::invalid_argument(path + ": missing DIM header");
  return perm;
}

inline void write_permutation(const std::vector<std::uint64_t>& perm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << "DIM " << perm.size() << "\n";
  for (std::uint64_t i = 0; i < perm.size(); ++i)
    if (perm[i] != i) out << i << " " << perm[i] << "\n";
}

inline CatalyticCircuit read_circuit(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();
  std::string line;
  int lineno = 0;
  int work = -1, cat = -1, output = 0;
  CircuitMode mode = CircuitMode::Unitary;
  std::vector<CircuitStep> steps;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank_or_comment(line)) continue;
    std::istringstream ss(line);
    std::string head;
    ss >> head;
    auto read_qubits = [&]() {
      std::vector<int> qs;
      int q;
      while (ss >> q) qs.push_back(q);
      if (qs.empty()) detail::parse_fail(path, lineno, head + " needs qubit operands");
      return qs;
    };
    try {
      if (head == "WORK" || head == "CAT" || head == "OUTPUT") {
        int v = -1;
        if (!(ss >> v) || v < 0) detail::parse_fail(path, lineno, head + " needs a count");
        if (head == "WORK") work = v;
        else if (head == "CAT") cat = v;
        else output = v;
      } else if (head == "GATE") {
        std::string name;
        if (!(ss >> name)) detail::parse_fail(path, lineno, "GATE needs a name");
        steps.push_back(make_gate(name, read_qubits()));
      } else if (head == "PERM") {
        std::string file;
        if (!(ss >> file)) detail::parse_fail(path, lineno, "PERM needs a side file");
        std::vector<int> qs = read_qubits();
        std::vector<std::uint64_t> perm = read_permutation((dir / file).string());
        if (perm.size() != dim_of(static_cast<int>(qs.size())))
          detail::parse_fail(path, lineno, "permutation size does not match qubit count");
        steps.push_back(make_perm(qs, perm));
      } else if (head == "MEASURE") {
        std::vector<int> qs = read_qubits();
        if (qs.size() != 1) detail::parse_fail(path, lineno, "MEASURE takes one qubit");
        mode = CircuitMode::General;
        steps.push_back(make_measure(qs[0]));
      } else {
        detail::parse_fail(path, lineno, "unknown directive " + head);
      }
    } catch (const std::invalid_argument& err) {
      std::string what = err.what();
      if (what.rfind(path, 0) == 0) throw;
      detail::parse_fail(path, lineno, what);
    }
  }
  if (work < 0 || cat < 0) throw std::invalid_argument(path + ": missing WORK or CAT header");
  return CatalyticCircuit(work, cat, output, std::move(steps), mode);
}

// --- Register program text format --------------------------------------------
//
//   MODULUS 5
//   REGISTERS 2
//   INPUTS 3
//   ADD r1 x1
//   SUB r2 x3
//   ADDPOLY r1 2*r2^2 + 3 + 1*r2
//
// Registers and inputs are 1-based in the text, 0-based in memory.

namespace detail {

inline int parse_ref(const std::string& token, char prefix, const std::string& file, int line) {
  if (token.size() < 2 || token[0] != prefix)
    parse_fail(file, line, "expected " + std::string(1, prefix) + "<index>, got " + token);
  int idx = 0;
  for (std::size_t i = 1; i < token.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(token[i])))
      parse_fail(file, line, "bad index in " + token);
    idx = idx * 10 + (token[i] - '0');
  }
  if (idx < 1) parse_fail(file, line, "indices are 1-based");
  return idx - 1;
}

inline Polynomial parse_polynomial(const std::string& text, const std::string& file, int line) {
  Polynomial poly;
  std::string term;
  std::istringstream terms(text);
  // Terms are separated by standalone '+' tokens.
  std::vector<std::string> factors;
  auto flush_term = [&]() {
    if (factors.empty()) parse_fail(file, line, "empty polynomial term");
    Monomial mono;
    mono.coeff = 1;
    bool saw_coeff = false;
    for (const std::string& f : factors) {
      if (f[0] == 'r') {
        const std::size_t caret = f.find('^');
        const std::string reg_tok = caret == std::string::npos ? f : f.substr(0, caret);
        int exp = 1;
        if (caret != std::string::npos) {
          try {
            exp = std::stoi(f.substr(caret + 1));
          } catch (...) {
            parse_fail(file, line, "bad exponent in " + f);
          }
        }
        mono.powers.push_back({parse_ref(reg_tok, 'r', file, line), exp});
      } else {
        int c = 0;
        try {
          c = std::stoi(f);
        } catch (...) {
          parse_fail(file, line, "bad coefficient " + f);
        }
        if (saw_coeff) parse_fail(file, line, "two coefficients in one term");
        saw_coeff = true;
        mono.coeff = c;
      }
    }
    poly.terms.push_back(std::move(mono));
    factors.clear();
  };
  std::string tok;
  while (terms >> tok) {
    if (tok == "+") {
      flush_term();
      continue;
    }
    std::string piece;
    std::istringstream stars(tok);
    while (std::getline(stars, piece, '*')) {
      if (piece.empty()) parse_fail(file, line, "empty factor in term");
      factors.push_back(piece);
    }
  }
  flush_term();
  return poly;
}

}  // namespace detail

inline RegisterProgram read_program(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  std::string line;
  int lineno = 0;
  int modulus = -1, registers = -1, inputs = -1;
  std::vector<Instruction> ins;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank_or_comment(line)) continue;
    std::istringstream ss(line);
    std::string head;
    ss >> head;
    if (head == "MODULUS" || head == "REGISTERS" || head == "INPUTS") {
      int v = -1;
      if (!(ss >> v) || v < 0) detail::parse_fail(path, lineno, head + " needs a count");
      (head == "MODULUS" ? modulus : head == "REGISTERS" ? registers : inputs) = v;
    } else if (head == "ADD" || head == "SUB") {
      std::string reg_tok, input_tok;
      if (!(ss >> reg_tok >> input_tok))
        detail::parse_fail(path, lineno, head + " needs a register and an input");
      ins.push_back(add_input(detail::parse_ref(reg_tok, 'r', path, lineno),
                              detail::parse_ref(input_tok, 'x', path, lineno),
                              head == "ADD" ? 1 : -1));
    } else if (head == "ADDPOLY" || head == "SUBPOLY") {
      std::string reg_tok;
      if (!(ss >> reg_tok)) detail::parse_fail(path, lineno, head + " needs a register");
      std::string rest;
      std::getline(ss, rest);
      ins.push_back(add_poly(detail::parse_ref(reg_tok, 'r', path, lineno),
                             detail::parse_polynomial(rest, path, lineno),
                             head == "ADDPOLY" ? 1 : -1));
    } else {
      detail::parse_fail(path, lineno, "unknown directive " + head);
    }
  }
  if (modulus < 0 || registers < 0 || inputs < 0)
    throw std::invalid_argument(path + ": missing MODULUS, REGISTERS, or INPUTS header");
  try {
    return RegisterProgram(modulus, registers, inputs, std::move(ins));
  } catch (const std::invalid_argument& err) {
    throw std::invalid_argument(path + ": " + err.what());
  }
}

/// Canonical text form; write_program stores exactly this, and compiled
/// artifacts hash it to tie a circuit back to its source program.
inline std::string program_to_text(const RegisterProgram& prog) {
  std::ostringstream out;
  out << "MODULUS " << prog.modulus() << "\n";
  out << "REGISTERS " << prog.num_registers() << "\n";
  out << "INPUTS " << prog.num_inputs() << "\n";
  for (const Instruction& ins : prog.instructions()) {
    if (ins.kind == Instruction::Kind::AddInput) {
      out << (ins.sign > 0 ? "ADD" : "SUB") << " r" << ins.target + 1 << " x" << ins.input + 1
          << "\n";
      continue;
    }
    out << (ins.sign > 0 ? "ADDPOLY" : "SUBPOLY") << " r" << ins.target + 1 << " ";
    for (std::size_t t = 0; t < ins.poly.terms.size(); ++t) {
      const Monomial& mono = ins.poly.terms[t];
      if (t) out << " + ";
      out << mono.coeff;
      for (const auto& [reg, exp] : mono.powers) {
        out << "*r" << reg + 1;
        if (exp > 1) out << "^" << exp;
      }
    }
    out << "\n";
  }
  return out.str();
}

inline void write_program(const RegisterProgram& prog, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << program_to_text(prog);
}

inline void write_circuit(const CatalyticCircuit& circuit, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  const std::filesystem::path p(path);
  const std::filesystem::path dir = p.parent_path();
  const std::string stem = p.stem().string();
  out << "WORK " << circuit.work_width() << "\n";
  out << "CAT " << circuit.catalytic_width() << "\n";
  out << "OUTPUT " << circuit.output_qubit() << "\n";
  int perm_index = 0;
  for (const CircuitStep& step : circuit.steps()) {
    switch (step.kind) {
      case StepKind::Unitary: {
        out << "GATE " << step.name;
        for (int q : step.targets) out << " " << q;
        out << "\n";
        break;
      }
      case StepKind::Permutation: {
        const std::string side = stem + ".perm" + std::to_string(perm_index++);
        write_permutation(step.perm, (dir / side).string());
        out << "PERM " << side;
        for (int q : step.targets) out << " " << q;
        out << "\n";
        break;
      }
      case StepKind::Measurement:
        out << "MEASURE " << step.targets[0] << "\n";
        break;
    }
  }
}

}  // namespace qclab
