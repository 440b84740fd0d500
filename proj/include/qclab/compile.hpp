#pragma once

// Lowers clean register programs onto a catalytic bit-tape.
//
// Register 0 of the program is realized on the clean work register (the W
// block, w = ceil(log2 p) bits); every other register lives on the catalytic
// tape as a w-bit block. Tape blocks holding a value >= p cannot represent a
// residue, so the stream opens with a flip pass: one sweep counts the valid
// blocks, a work bit b records whether the whole tape must be complemented,
// and b is applied, later unapplied, and finally uncomputed. Catalytic
// register j is addressed as the j-th valid block of the (possibly flipped)
// tape; invalid blocks are frozen and never written.
//
// The step stream is a fixed function of (program, layout): one step per
// instruction between the two flip brackets. Each step is a bijection of the
// (work + tape) bit-space whose action is conditioned on, but identical for,
// all tape contents. Two circuit backends share the step semantics: one
// permutation gate per step (ground truth), or a Toffoli/CNOT/X decomposition
// with clean ancillas appended after the work bits.
//
// cycle_wrap repeats a program in self-cleaning cycles with an output latch
// and a counter counting to 2l, so any prefix of the stream leaves the output
// bit correct or undetermined, never wrong.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qclab/circuit.hpp"
#include "qclab/io.hpp"
#include "qclab/regprog.hpp"

namespace qclab {

// --- Tape layout --------------------------------------------------------------
//
// Work register:  [ W value block: w bits ][ flip bit ][ input bits ]
// Catalytic tape: [ block 0: w bits ][ block 1: w bits ] ...
// Blocks store values MSB-first, so the work output qubit (W's low bit) is
// qubit w-1 and holds f(x) for decision programs.

struct TapeLayout {
  int p = 2;
  int w = 1;            // bits per register block
  int m_cat = 0;        // catalytic registers (program registers minus W)
  int block_count = 1;  // tape blocks; spares absorb invalid initial values
  int num_inputs = 0;

  int work_width() const { return w + 1 + num_inputs; }
  int flip_bit() const { return w; }
  int input_bit(int k) const { return w + 1 + k; }
  int output_qubit() const { return w - 1; }
  int catalytic_width() const { return block_count * w; }
  int total_width() const { return work_width() + catalytic_width(); }
  int block_bit(int block, int j) const { return block * w + j; }  // tape offset
};

/// Layout for a program. The default block count doubles the catalytic
/// register count when p is not a power of two: complementing turns any
/// invalid block valid, so with 2*m_cat blocks either the tape or its
/// complement always carries enough valid registers and no tape is rejected.
/// A caller may pass a smaller block_count (>= m_cat, >= 1) to shrink the
/// tape at the price of possible per-tape rejection in embed().
inline TapeLayout make_layout(const RegisterProgram& prog, int block_count = -1) {
  TapeLayout lay;
  lay.p = prog.modulus();
  lay.w = 1;
  while ((1 << lay.w) < lay.p) ++lay.w;
  lay.m_cat = prog.num_registers() - 1;
  lay.num_inputs = prog.num_inputs();
  const bool power_of_two = (1 << lay.w) == lay.p;
  if (block_count < 0) block_count = std::max(1, power_of_two ? lay.m_cat : 2 * lay.m_cat);
  require(block_count >= 1, "layout needs at least one tape block");
  require(block_count >= lay.m_cat, "layout needs a block per catalytic register");
  lay.block_count = block_count;
  return lay;
}

namespace detail {

inline int block_value(const TapeLayout& lay, const std::vector<int>& tape, int block) {
  int v = 0;
  for (int j = 0; j < lay.w; ++j) v = (v << 1) | tape[static_cast<size_t>(lay.block_bit(block, j))];
  return v;
}

inline void set_block_value(const TapeLayout& lay, std::vector<int>& tape, int block, int v) {
  for (int j = 0; j < lay.w; ++j)
    tape[static_cast<size_t>(lay.block_bit(block, j))] = (v >> (lay.w - 1 - j)) & 1;
}

inline int work_value(const TapeLayout& lay, const std::vector<int>& work) {
  int v = 0;
  for (int j = 0; j < lay.w; ++j) v = (v << 1) | work[static_cast<size_t>(j)];
  return v;
}

inline void set_work_value(const TapeLayout& lay, std::vector<int>& work, int v) {
  for (int j = 0; j < lay.w; ++j) work[static_cast<size_t>(j)] = (v >> (lay.w - 1 - j)) & 1;
}

inline int valid_block_count(const TapeLayout& lay, const std::vector<int>& tape) {
  int n = 0;
  for (int i = 0; i < lay.block_count; ++i) n += block_value(lay, tape, i) < lay.p;
  return n;
}

/// Index of the j-th valid block (j 0-based), or -1 when absent.
inline int nth_valid_block(const TapeLayout& lay, const std::vector<int>& tape, int j) {
  for (int i = 0; i < lay.block_count; ++i)
    if (block_value(lay, tape, i) < lay.p && j-- == 0) return i;
  return -1;
}

}  // namespace detail

// --- Embedding ----------------------------------------------------------------

struct Embedding {
  TapeLayout layout;
  std::vector<int> normalized_tape;   // raw tape after the flip pass
  int flip = 0;                       // 1 iff the tape was complemented
  std::vector<int> register_to_block; // catalytic register j -> block index
  std::vector<int> block_valid;       // per block, 1 iff it carries a register value
};

/// Preprocesses a raw tape: blocks with value >= p cannot hold a residue, so
/// when fewer than m_cat blocks are valid the whole tape is complemented
/// (every invalid block has a valid complement). Registers map to valid
/// blocks in tape order. Rejects tapes that stay short of registers, which
/// cannot happen at the default block count.
inline Embedding embed(const RegisterProgram& prog, const std::vector<int>& raw_tape,
                       int block_count = -1) {
  Embedding e;
  e.layout = make_layout(prog, block_count);
  require(static_cast<int>(raw_tape.size()) == e.layout.catalytic_width(),
          "raw tape must supply block_count * w bits");
  for (int b : raw_tape) require(b == 0 || b == 1, "tape bits must be 0 or 1");
  e.normalized_tape = raw_tape;
  e.flip = detail::valid_block_count(e.layout, e.normalized_tape) < e.layout.m_cat ? 1 : 0;
  if (e.flip)
    for (int& b : e.normalized_tape) b ^= 1;
  for (int i = 0; i < e.layout.block_count; ++i)
    e.block_valid.push_back(detail::block_value(e.layout, e.normalized_tape, i) < e.layout.p);
  for (int i = 0; i < e.layout.block_count; ++i)
    if (e.block_valid[static_cast<size_t>(i)] &&
        static_cast<int>(e.register_to_block.size()) < e.layout.m_cat)
      e.register_to_block.push_back(i);
  if (static_cast<int>(e.register_to_block.size()) < e.layout.m_cat)
    throw std::invalid_argument(
        "tape carries " + std::to_string(detail::valid_block_count(e.layout, e.normalized_tape)) +
        " valid blocks but the program needs " + std::to_string(e.layout.m_cat) +
        "; use a larger block_count");
  return e;
}

// --- Oblivious steps ----------------------------------------------------------

struct ObliviousStep {
  enum class Kind {
    FlipCompute,    // flip bit ^= [fewer than m_cat valid blocks]
    FlipApply,      // if flip bit: complement every tape bit
    FlipUncompute,  // same action as FlipCompute, placed after the restore
    Instruction,    // one register-program instruction
    Latch,          // cycled machines: bump counter, capture output once
    CounterInc      // cycled machines: bump counter
  };
  Kind kind = Kind::Instruction;
  int time = 0;
  Instruction ins;          // Kind::Instruction
  int output_bit = -1;      // Kind::Latch
  int determined_bit = -1;  // Kind::Latch
  int counter_offset = -1;  // Kind::Latch / CounterInc, work bit of counter MSB
  int counter_bits = 0;
};

/// Fixed step stream for a program: flip pass in, one step per instruction,
/// flip pass out. Depends only on (prog, layout), never on tape contents.
inline std::vector<ObliviousStep> lower_to_steps(const RegisterProgram& prog,
                                                 const TapeLayout& layout) {
  (void)layout;
  std::vector<ObliviousStep> stream;
  auto push = [&](ObliviousStep::Kind kind) {
    ObliviousStep s;
    s.kind = kind;
    s.time = static_cast<int>(stream.size());
    stream.push_back(std::move(s));
  };
  push(ObliviousStep::Kind::FlipCompute);
  push(ObliviousStep::Kind::FlipApply);
  for (const Instruction& ins : prog.instructions()) {
    ObliviousStep s;
    s.kind = ObliviousStep::Kind::Instruction;
    s.ins = ins;
    s.time = static_cast<int>(stream.size());
    stream.push_back(std::move(s));
  }
  push(ObliviousStep::Kind::FlipApply);
  push(ObliviousStep::Kind::FlipUncompute);
  return stream;
}

namespace detail {

struct StepFlags {
  bool addressing_ok = true;  // every referenced register resolved
  bool frozen_ok = true;      // no instruction wrote an invalid block
};

/// One step as a bijection on classical (work, tape) bits. Both backends and
/// the replay oracle go through this single definition. An instruction acts
/// only when its target and every source register resolve (W below p, j-th
/// valid block present); otherwise it is the identity, which keeps the action
/// a bijection on every validity class.
inline void apply_step_semantics(const ObliviousStep& step, const TapeLayout& lay,
                                 std::vector<int>& work, std::vector<int>& tape,
                                 StepFlags* flags = nullptr) {
  using Kind = ObliviousStep::Kind;
  switch (step.kind) {
    case Kind::FlipCompute:
    case Kind::FlipUncompute:
      if (valid_block_count(lay, tape) < lay.m_cat)
        work[static_cast<size_t>(lay.flip_bit())] ^= 1;
      return;
    case Kind::FlipApply:
      if (work[static_cast<size_t>(lay.flip_bit())])
        for (int& b : tape) b ^= 1;
      return;
    case Kind::CounterInc:
    case Kind::Latch: {
      int ctr = 0;
      for (int j = 0; j < step.counter_bits; ++j)
        ctr = (ctr << 1) | work[static_cast<size_t>(step.counter_offset + j)];
      ctr = (ctr + 1) & ((1 << step.counter_bits) - 1);
      for (int j = 0; j < step.counter_bits; ++j)
        work[static_cast<size_t>(step.counter_offset + j)] = (ctr >> (step.counter_bits - 1 - j)) & 1;
      if (step.kind == Kind::Latch && ctr == 1) {
        work[static_cast<size_t>(step.output_bit)] ^= work[static_cast<size_t>(lay.output_qubit())];
        work[static_cast<size_t>(step.determined_bit)] ^= 1;
      }
      return;
    }
    case Kind::Instruction:
      break;
  }
  const Instruction& ins = step.ins;
  bool ok = true;
  int target_block = -1;
  if (ins.target == 0) {
    if (work_value(lay, work) >= lay.p) ok = false;
  } else {
    target_block = nth_valid_block(lay, tape, ins.target - 1);
    if (target_block < 0) ok = false;
  }
  int delta = 0;
  if (ins.kind == Instruction::Kind::AddInput) {
    delta = ins.sign * work[static_cast<size_t>(lay.input_bit(ins.input))];
  } else {
    std::vector<int> values(static_cast<size_t>(lay.m_cat) + 1, 0);
    for (const Monomial& mono : ins.poly.terms)
      for (const auto& [reg, exp] : mono.powers) {
        (void)exp;
        if (reg == 0) {
          if (work_value(lay, work) >= lay.p) ok = false;
          values[0] = ok ? work_value(lay, work) : 0;
        } else {
          const int b = nth_valid_block(lay, tape, reg - 1);
          if (b < 0) ok = false;
          values[static_cast<size_t>(reg)] = b < 0 ? 0 : block_value(lay, tape, b);
        }
      }
    delta = ins.sign * eval_polynomial(ins.poly, values, lay.p);
  }
  if (!ok) {
    if (flags) flags->addressing_ok = false;
    return;
  }
  if (ins.target == 0)
    set_work_value(lay, work, mod_reduce(work_value(lay, work) + delta, lay.p));
  else
    set_block_value(lay, tape, target_block,
                    mod_reduce(block_value(lay, tape, target_block) + delta, lay.p));
}

/// Qubits a step may read or write. When p is a power of two every block is
/// valid whatever its bits, addressing is static, and an instruction touches
/// only the blocks it names; otherwise block addressing consults the whole
/// tape. work_width is the circuit's work width (cycled machines extend it).
inline std::vector<int> step_support(const ObliviousStep& step, const TapeLayout& lay,
                                     int work_width) {
  using Kind = ObliviousStep::Kind;
  std::vector<int> qs;
  auto add_tape = [&] {
    for (int t = 0; t < lay.catalytic_width(); ++t) qs.push_back(work_width + t);
  };
  auto add_block = [&](int block) {
    for (int j = 0; j < lay.w; ++j) qs.push_back(work_width + lay.block_bit(block, j));
  };
  auto add_w = [&] {
    for (int j = 0; j < lay.w; ++j) qs.push_back(j);
  };
  const bool dynamic = (1 << lay.w) != lay.p;
  switch (step.kind) {
    case Kind::FlipCompute:
    case Kind::FlipApply:
    case Kind::FlipUncompute:
      qs.push_back(lay.flip_bit());
      add_tape();
      break;
    case Kind::CounterInc:
    case Kind::Latch:
      for (int j = 0; j < step.counter_bits; ++j) qs.push_back(step.counter_offset + j);
      if (step.kind == Kind::Latch) {
        qs.push_back(step.output_bit);
        qs.push_back(step.determined_bit);
        qs.push_back(lay.output_qubit());
      }
      break;
    case Kind::Instruction: {
      const Instruction& ins = step.ins;
      auto add_register = [&](int reg) {
        if (reg == 0) add_w();
        else if (dynamic) add_tape();
        else add_block(reg - 1);
      };
      add_register(ins.target);
      if (ins.kind == Instruction::Kind::AddInput) {
        qs.push_back(lay.input_bit(ins.input));
      } else {
        for (const Monomial& mono : ins.poly.terms)
          for (const auto& [reg, exp] : mono.powers) {
            (void)exp;
            add_register(reg);
          }
      }
      break;
    }
  }
  std::sort(qs.begin(), qs.end());
  qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
  return qs;
}

}  // namespace detail

// --- Classical replay ---------------------------------------------------------

struct ReplayResult {
  std::vector<int> work_bits;
  std::vector<int> tape_bits;
  int output_value = 0;      // W block value after the stream
  bool addressing_ok = true;
  bool frozen_ok = true;
};

/// Runs a step stream on classical bits: work clear except the stamped input
/// bits, tape as given. Checks on the fly that every register access resolved
/// and that no instruction wrote an invalid block.
inline ReplayResult replay_steps(const std::vector<ObliviousStep>& stream, const TapeLayout& layout,
                                 const std::vector<int>& x, const std::vector<int>& raw_tape,
                                 int work_width = -1) {
  if (work_width < 0) work_width = layout.work_width();
  require(static_cast<int>(x.size()) == layout.num_inputs, "input length must match the program");
  require(static_cast<int>(raw_tape.size()) == layout.catalytic_width(),
          "raw tape must supply block_count * w bits");
  ReplayResult r;
  r.work_bits.assign(static_cast<size_t>(work_width), 0);
  for (int k = 0; k < layout.num_inputs; ++k) {
    require(x[static_cast<size_t>(k)] == 0 || x[static_cast<size_t>(k)] == 1,
            "inputs must be bits");
    r.work_bits[static_cast<size_t>(layout.input_bit(k))] = x[static_cast<size_t>(k)];
  }
  r.tape_bits = raw_tape;
  detail::StepFlags flags;
  std::vector<std::pair<int, int>> frozen;  // (block, value) snapshots
  for (const ObliviousStep& step : stream) {
    const bool instruction = step.kind == ObliviousStep::Kind::Instruction;
    if (instruction) {
      frozen.clear();
      for (int i = 0; i < layout.block_count; ++i) {
        const int v = detail::block_value(layout, r.tape_bits, i);
        if (v >= layout.p) frozen.push_back({i, v});
      }
    }
    detail::apply_step_semantics(step, layout, r.work_bits, r.tape_bits, &flags);
    if (instruction)
      for (const auto& [block, value] : frozen)
        if (detail::block_value(layout, r.tape_bits, block) != value) flags.frozen_ok = false;
  }
  r.output_value = detail::work_value(layout, r.work_bits);
  r.addressing_ok = flags.addressing_ok;
  r.frozen_ok = flags.frozen_ok;
  return r;
}

// --- Circuit backends ---------------------------------------------------------

enum class Backend { Perm, Toffoli };

inline std::string to_string(Backend b) { return b == Backend::Perm ? "perm" : "toffoli"; }

inline Backend backend_from_string(const std::string& name) {
  if (name == "perm") return Backend::Perm;
  if (name == "toffoli") return Backend::Toffoli;
  throw std::invalid_argument("unknown backend " + name + " (expected perm or toffoli)");
}

namespace detail {

/// One permutation gate realizing a step on its support qubits, built by
/// running the shared step semantics over every local assignment.
inline CircuitStep perm_step_gate(const ObliviousStep& step, const TapeLayout& lay,
                                  int work_width) {
  const std::vector<int> qs = step_support(step, lay, work_width);
  const int k = static_cast<int>(qs.size());
  if (k > 16)
    throw budget_error("permutation gate support exceeds 16 qubits; shrink block_count");
  const std::uint64_t dim = 1ull << k;
  std::vector<std::uint64_t> perm(dim);
  std::vector<int> work(static_cast<size_t>(work_width));
  std::vector<int> tape(static_cast<size_t>(lay.catalytic_width()));
  for (std::uint64_t a = 0; a < dim; ++a) {
    std::fill(work.begin(), work.end(), 0);
    std::fill(tape.begin(), tape.end(), 0);
    for (int j = 0; j < k; ++j) {
      const int bit = static_cast<int>((a >> (k - 1 - j)) & 1ull);
      if (qs[static_cast<size_t>(j)] < work_width) work[static_cast<size_t>(qs[static_cast<size_t>(j)])] = bit;
      else tape[static_cast<size_t>(qs[static_cast<size_t>(j)] - work_width)] = bit;
    }
    apply_step_semantics(step, lay, work, tape);
    std::uint64_t b = 0;
    for (int j = 0; j < k; ++j) {
      const int q = qs[static_cast<size_t>(j)];
      const int bit = q < work_width ? work[static_cast<size_t>(q)]
                                     : tape[static_cast<size_t>(q - work_width)];
      b = (b << 1) | static_cast<std::uint64_t>(bit);
    }
    perm[a] = b;
  }
  return make_perm(qs, perm);
}

/// Toffoli/CNOT/X lowering. Supported shapes: p = 2 (static block addressing,
/// plain XOR algebra), or at most one catalytic register for general p (the
/// valid-block scan fits in one flag ancilla per block). Anything wider would
/// need a materialized valid counter, which is past this backend's ancilla
/// budget; the perm backend has no such limit.
struct ToffoliEmitter {
  const TapeLayout& lay;
  bool dynamic;     // p not a power of two: addressing scans validity
  int val_base = 0; // per-block validity flags (dynamic only)
  int act_base = 0; // per-block "this block is register 1" flags
  int pool_base = 0;
  int pool_size = 0;
  int ancillas = 0;
  int cat_base = 0;
  std::vector<CircuitStep> steps;

  explicit ToffoliEmitter(const TapeLayout& layout) : lay(layout) {
    dynamic = (1 << lay.w) != lay.p;
    if (lay.p != 2 && lay.m_cat > 1)
      throw std::invalid_argument(
          "toffoli backend handles p = 2 or a single catalytic register; p = " +
          std::to_string(lay.p) + " with " + std::to_string(lay.m_cat) +
          " catalytic registers exceeds its ancilla budget, use the perm backend");
    int max_controls = 2;
    int flag_count = 0;
    if (dynamic && lay.m_cat == 1) {
      flag_count = 2 * lay.block_count;  // one validity and one act flag per block
      max_controls = std::max({max_controls, lay.block_count, 2 * lay.w});
    } else if (dynamic) {  // m_cat == 0: only adds on W, at most one input control
      max_controls = std::max(max_controls, lay.w);
    } else {  // p == 2: one control per distinct monomial source
      max_controls = std::max(max_controls, lay.m_cat);
    }
    val_base = lay.work_width();
    act_base = val_base + flag_count / 2;
    pool_base = act_base + flag_count / 2;
    pool_size = std::max(0, max_controls - 2);
    ancillas = flag_count + pool_size;
    cat_base = lay.work_width() + ancillas;
  }

  int tape_qubit(int offset) const { return cat_base + offset; }
  int block_qubit(int block, int j) const { return cat_base + lay.block_bit(block, j); }
  int w_qubit(int j) const { return j; }

  void x(int q) { steps.push_back(make_gate("X", {q})); }
  void cnot(int c, int t) { steps.push_back(make_gate("CNOT", {c, t})); }
  void toffoli(int a, int b, int t) { steps.push_back(make_gate("TOFFOLI", {a, b, t})); }

  /// X on target under multiple (qubit, required value) controls; zero
  /// polarities are conjugated with X, three or more controls run down a
  /// V-chain of borrowed-clean pool ancillas.
  void mcx(const std::vector<std::pair<int, int>>& controls, int target) {
    for (const auto& [q, pol] : controls)
      if (pol == 0) x(q);
    const int k = static_cast<int>(controls.size());
    if (k == 0) {
      x(target);
    } else if (k == 1) {
      cnot(controls[0].first, target);
    } else if (k == 2) {
      toffoli(controls[0].first, controls[1].first, target);
    } else {
      require(k - 2 <= pool_size, "toffoli ancilla pool undersized");
      std::vector<int> chain;
      toffoli(controls[0].first, controls[1].first, pool_base);
      chain.push_back(pool_base);
      for (int i = 2; i < k - 1; ++i) {
        toffoli(chain.back(), controls[static_cast<size_t>(i)].first, pool_base + i - 1);
        chain.push_back(pool_base + i - 1);
      }
      toffoli(chain.back(), controls[static_cast<size_t>(k - 1)].first, target);
      for (int i = k - 2; i >= 2; --i)
        toffoli(chain[static_cast<size_t>(i - 2)], controls[static_cast<size_t>(i)].first,
                pool_base + i - 1);
      toffoli(controls[0].first, controls[1].first, pool_base);
    }
    for (const auto& [q, pol] : controls)
      if (pol == 0) x(q);
  }

  /// Value permutation on one block under external controls, synthesized as a
  /// product of transpositions. Each transposition conjugates away all but
  /// one differing bit with control-free self-inverse CNOTs, then applies one
  /// multi-controlled X; the external controls attach only to that X, so when
  /// they are off the conjugation cancels and nothing moves.
  void controlled_value_perm(const std::vector<int>& bits, const std::vector<int>& table,
                             const std::vector<std::pair<int, int>>& ext) {
    const int width = static_cast<int>(bits.size());
    std::vector<bool> seen(table.size(), false);
    for (std::size_t start = 0; start < table.size(); ++start) {
      if (seen[start] || table[start] == static_cast<int>(start)) {
        seen[start] = true;
        continue;
      }
      std::vector<int> cycle;
      for (int v = static_cast<int>(start); !seen[static_cast<size_t>(v)];
           v = table[static_cast<size_t>(v)]) {
        seen[static_cast<size_t>(v)] = true;
        cycle.push_back(v);
      }
      for (std::size_t i = 1; i < cycle.size(); ++i)
        transposition(bits, width, cycle[0], cycle[i], ext);
    }
  }

  void transposition(const std::vector<int>& bits, int width, int u, int v,
                     const std::vector<std::pair<int, int>>& ext) {
    const int diff = u ^ v;
    int d = 0;
    while (!((diff >> d) & 1)) ++d;
    const int d_qubit = bits[static_cast<size_t>(width - 1 - d)];
    int pattern = u;
    if ((u >> d) & 1) pattern ^= diff & ~(1 << d);
    std::vector<int> conj;
    for (int j = 0; j < width; ++j)
      if (j != d && ((diff >> j) & 1)) conj.push_back(bits[static_cast<size_t>(width - 1 - j)]);
    for (int q : conj) cnot(d_qubit, q);
    std::vector<std::pair<int, int>> controls = ext;
    for (int j = 0; j < width; ++j)
      if (j != d)
        controls.push_back({bits[static_cast<size_t>(width - 1 - j)], (pattern >> j) & 1});
    mcx(controls, d_qubit);
    for (int q : conj) cnot(d_qubit, q);
  }

  std::vector<int> w_bits() const {
    std::vector<int> bits;
    for (int j = 0; j < lay.w; ++j) bits.push_back(w_qubit(j));
    return bits;
  }

  std::vector<int> block_bits(int block) const {
    std::vector<int> bits;
    for (int j = 0; j < lay.w; ++j) bits.push_back(block_qubit(block, j));
    return bits;
  }

  /// Table adding d mod p on the valid range, fixing v >= p.
  std::vector<int> add_table(int d) const {
    std::vector<int> table(1ull << lay.w);
    for (int v = 0; v < static_cast<int>(table.size()); ++v)
      table[static_cast<size_t>(v)] = v < lay.p ? mod_reduce(v + d, lay.p) : v;
    return table;
  }

  std::vector<std::pair<int, int>> value_pattern(const std::vector<int>& bits, int value) const {
    std::vector<std::pair<int, int>> controls;
    for (int j = 0; j < lay.w; ++j)
      controls.push_back({bits[static_cast<size_t>(j)], (value >> (lay.w - 1 - j)) & 1});
    return controls;
  }

  // Flag toggles are involutions: the same sequence computes and uncomputes.
  // Instructions preserve block validity, so flags stay in sync across the
  // controlled adds sandwiched between toggle pairs.
  void toggle_validity_flags() {
    for (int i = 0; i < lay.block_count; ++i)
      for (int v = 0; v < lay.p; ++v)
        mcx(value_pattern(block_bits(i), v), val_base + i);
  }

  void toggle_act_flags() {
    for (int i = 0; i < lay.block_count; ++i) {
      std::vector<std::pair<int, int>> controls;
      for (int j = 0; j < i; ++j) controls.push_back({val_base + j, 0});
      controls.push_back({val_base + i, 1});
      mcx(controls, act_base + i);
    }
  }

  void emit_flip_compute() {
    if (lay.m_cat == 0 || !dynamic) return;  // the predicate is constant false
    toggle_validity_flags();
    std::vector<std::pair<int, int>> controls;
    for (int i = 0; i < lay.block_count; ++i) controls.push_back({val_base + i, 0});
    mcx(controls, lay.flip_bit());
    toggle_validity_flags();
  }

  void emit_flip_apply() {
    for (int t = 0; t < lay.catalytic_width(); ++t) cnot(lay.flip_bit(), tape_qubit(t));
  }

  /// Evaluates ins.poly with register reg pinned to value, other registers 0.
  int poly_at(const Instruction& ins, int reg, int value) const {
    std::vector<int> values(static_cast<size_t>(lay.m_cat) + 1, 0);
    if (reg >= 0) values[static_cast<size_t>(reg)] = value;
    return mod_reduce(static_cast<long long>(ins.sign) *
                          eval_polynomial(ins.poly, values, lay.p),
                      lay.p);
  }

  int poly_source(const Instruction& ins) const {
    int source = -1;
    for (const Monomial& mono : ins.poly.terms)
      for (const auto& [reg, exp] : mono.powers) {
        (void)exp;
        require(source < 0 || source == reg, "toffoli backend found a second poly source");
        source = reg;
      }
    return source;
  }

  void emit_instruction_static(const Instruction& ins) {
    // p = 2: registers are single bits at fixed positions, additions are XORs.
    auto register_bit = [&](int reg) {
      return reg == 0 ? w_qubit(lay.w - 1) : block_qubit(reg - 1, 0);
    };
    const int target = register_bit(ins.target);
    if (ins.kind == Instruction::Kind::AddInput) {
      cnot(lay.input_bit(ins.input), target);
      return;
    }
    for (const Monomial& mono : ins.poly.terms) {
      if (mod_reduce(mono.coeff, 2) == 0) continue;
      std::vector<std::pair<int, int>> controls;
      for (const auto& [reg, exp] : mono.powers) {
        (void)exp;
        controls.push_back({register_bit(reg), 1});
      }
      std::sort(controls.begin(), controls.end());
      controls.erase(std::unique(controls.begin(), controls.end()), controls.end());
      mcx(controls, target);
    }
  }

  void emit_instruction_dynamic(const Instruction& ins) {
    const bool needs_flags =
        ins.target != 0 || (ins.kind == Instruction::Kind::AddPoly && poly_source(ins) > 0);
    if (needs_flags) {
      toggle_validity_flags();
      toggle_act_flags();
    }
    if (ins.target == 0) {
      if (ins.kind == Instruction::Kind::AddInput) {
        controlled_value_perm(w_bits(), add_table(ins.sign),
                              {{lay.input_bit(ins.input), 1}});
      } else {
        const int source = poly_source(ins);
        if (source < 0) {
          controlled_value_perm(w_bits(), add_table(poly_at(ins, -1, 0)), {});
        } else {
          for (int i = 0; i < lay.block_count; ++i)
            for (int sigma = 0; sigma < lay.p; ++sigma) {
              const int d = poly_at(ins, source, sigma);
              if (d == 0) continue;
              std::vector<std::pair<int, int>> ext = {{act_base + i, 1}};
              const auto pattern = value_pattern(block_bits(i), sigma);
              ext.insert(ext.end(), pattern.begin(), pattern.end());
              controlled_value_perm(w_bits(), add_table(d), ext);
            }
        }
      }
    } else {
      for (int i = 0; i < lay.block_count; ++i) {
        if (ins.kind == Instruction::Kind::AddInput) {
          controlled_value_perm(block_bits(i), add_table(ins.sign),
                                {{act_base + i, 1}, {lay.input_bit(ins.input), 1}});
          continue;
        }
        const int source = poly_source(ins);
        if (source < 0) {
          controlled_value_perm(block_bits(i), add_table(poly_at(ins, -1, 0)),
                                {{act_base + i, 1}});
        } else {
          for (int sigma = 0; sigma < lay.p; ++sigma) {
            const int d = poly_at(ins, source, sigma);
            if (d == 0) continue;
            std::vector<std::pair<int, int>> ext = {{act_base + i, 1}};
            const auto pattern = value_pattern(w_bits(), sigma);
            ext.insert(ext.end(), pattern.begin(), pattern.end());
            controlled_value_perm(block_bits(i), add_table(d), ext);
          }
        }
      }
    }
    if (needs_flags) {
      toggle_act_flags();
      toggle_validity_flags();
    }
  }

  void emit(const ObliviousStep& step) {
    using Kind = ObliviousStep::Kind;
    switch (step.kind) {
      case Kind::FlipCompute:
      case Kind::FlipUncompute:
        emit_flip_compute();
        return;
      case Kind::FlipApply:
        emit_flip_apply();
        return;
      case Kind::Instruction:
        if (dynamic) emit_instruction_dynamic(step.ins);
        else emit_instruction_static(step.ins);
        return;
      case Kind::Latch:
      case Kind::CounterInc:
        throw std::invalid_argument(
            "toffoli backend does not lower cycled streams; use the perm backend");
    }
  }
};

}  // namespace detail

/// Emits a catalytic circuit for a step stream. The perm backend produces
/// exactly one permutation gate per step; the toffoli backend decomposes into
/// X/CNOT/TOFFOLI with clean ancillas appended after the work bits (ancillas
/// start and end at 0, widening the work register and shifting the tape).
inline CatalyticCircuit lower_to_circuit(const std::vector<ObliviousStep>& stream,
                                         const TapeLayout& layout, Backend backend,
                                         int work_width = -1) {
  if (work_width < 0) work_width = layout.work_width();
  if (backend == Backend::Perm) {
    std::vector<CircuitStep> steps;
    steps.reserve(stream.size());
    for (const ObliviousStep& step : stream)
      steps.push_back(detail::perm_step_gate(step, layout, work_width));
    return CatalyticCircuit(work_width, layout.catalytic_width(), layout.output_qubit(),
                            std::move(steps));
  }
  require(work_width == layout.work_width(),
          "toffoli backend does not lower cycled streams; use the perm backend");
  detail::ToffoliEmitter emitter(layout);
  for (const ObliviousStep& step : stream) emitter.emit(step);
  return CatalyticCircuit(layout.work_width() + emitter.ancillas, layout.catalytic_width(),
                          layout.output_qubit(), std::move(emitter.steps));
}

namespace detail {

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

// --- Compiled artifacts -------------------------------------------------------

struct CompiledArtifact {
  RegisterProgram program;
  std::uint64_t source_hash;  // FNV-1a over the program's text form
  TapeLayout layout;
  std::vector<ObliviousStep> stream;
  Backend backend;
  CatalyticCircuit circuit;
  int output_qubit;
};

inline CompiledArtifact compile_program(const RegisterProgram& prog,
                                        Backend backend = Backend::Perm, int block_count = -1) {
  TapeLayout layout = make_layout(prog, block_count);
  std::vector<ObliviousStep> stream = lower_to_steps(prog, layout);
  CatalyticCircuit circuit = lower_to_circuit(stream, layout, backend);
  return CompiledArtifact{prog,
                          detail::fnv1a64(program_to_text(prog)),
                          layout,
                          std::move(stream),
                          backend,
                          std::move(circuit),
                          layout.output_qubit()};
}

/// Stamps an input assignment by prepending X gates on the input work bits.
inline CatalyticCircuit with_input(const CatalyticCircuit& circuit, const TapeLayout& layout,
                                   const std::vector<int>& x) {
  require(static_cast<int>(x.size()) == layout.num_inputs, "input length must match the program");
  std::vector<CircuitStep> steps;
  for (int k = 0; k < layout.num_inputs; ++k) {
    require(x[static_cast<size_t>(k)] == 0 || x[static_cast<size_t>(k)] == 1,
            "inputs must be bits");
    if (x[static_cast<size_t>(k)]) steps.push_back(make_gate("X", {layout.input_bit(k)}));
  }
  steps.insert(steps.end(), circuit.steps().begin(), circuit.steps().end());
  return CatalyticCircuit(circuit.work_width(), circuit.catalytic_width(), circuit.output_qubit(),
                          std::move(steps), circuit.mode());
}

inline CatalyticCircuit with_input(const CompiledArtifact& artifact, const std::vector<int>& x) {
  return with_input(artifact.circuit, artifact.layout, x);
}

// --- Cycled machines ----------------------------------------------------------

struct CycledMachine {
  RegisterProgram program;
  TapeLayout layout;
  int cycles = 1;
  int cycle_length = 0;
  std::vector<ObliviousStep> stream;
  int output_bit = -1;
  int determined_bit = -1;
  int counter_offset = -1;
  int counter_bits = 0;
  int work_width = 0;
};

/// Repeats a program in l self-cleaning cycles. Each cycle runs the program
/// forward, latches the answer the first time around, runs it backward, and
/// restores the tape; the counter gains two per cycle, so it counts to 2l and
/// never beyond. The latch fires exactly once, so any prefix of the stream
/// leaves the output bit correct or untouched, never wrong.
inline CycledMachine cycle_wrap(const RegisterProgram& prog, int cycles, int block_count = -1) {
  require(cycles >= 1, "need at least one cycle");
  CycledMachine m{prog, make_layout(prog, block_count), cycles, 0, {}, 0, 0, 0, 0, 0};
  m.counter_bits = 1;
  while ((1 << m.counter_bits) < 2 * cycles + 1) ++m.counter_bits;
  m.output_bit = m.layout.work_width();
  m.determined_bit = m.output_bit + 1;
  m.counter_offset = m.determined_bit + 1;
  m.work_width = m.counter_offset + m.counter_bits;
  const RegisterProgram rev = reverse(prog);
  auto push = [&](ObliviousStep s) {
    s.time = static_cast<int>(m.stream.size());
    m.stream.push_back(std::move(s));
  };
  auto plain = [](ObliviousStep::Kind kind) {
    ObliviousStep s;
    s.kind = kind;
    return s;
  };
  auto counting = [&](ObliviousStep::Kind kind) {
    ObliviousStep s;
    s.kind = kind;
    s.output_bit = m.output_bit;
    s.determined_bit = m.determined_bit;
    s.counter_offset = m.counter_offset;
    s.counter_bits = m.counter_bits;
    return s;
  };
  auto instruction = [](const Instruction& ins) {
    ObliviousStep s;
    s.kind = ObliviousStep::Kind::Instruction;
    s.ins = ins;
    return s;
  };
  for (int cycle = 0; cycle < cycles; ++cycle) {
    push(plain(ObliviousStep::Kind::FlipCompute));
    push(plain(ObliviousStep::Kind::FlipApply));
    for (const Instruction& ins : prog.instructions()) push(instruction(ins));
    push(counting(ObliviousStep::Kind::Latch));
    for (const Instruction& ins : rev.instructions()) push(instruction(ins));
    push(plain(ObliviousStep::Kind::FlipApply));
    push(plain(ObliviousStep::Kind::FlipUncompute));
    push(counting(ObliviousStep::Kind::CounterInc));
  }
  m.cycle_length = static_cast<int>(m.stream.size()) / cycles;
  return m;
}

/// Fixed-length prefix of a cycled stream: the shape run inside DQC1.
inline std::vector<ObliviousStep> truncate_at(const CycledMachine& machine, std::size_t t) {
  require(t <= machine.stream.size(), "truncation point past the stream length");
  return std::vector<ObliviousStep>(machine.stream.begin(),
                                    machine.stream.begin() + static_cast<std::ptrdiff_t>(t));
}

struct CycledReplay {
  int determined = 0;
  int output = 0;
  std::vector<int> work_bits;
  std::vector<int> tape_bits;
  bool addressing_ok = true;
  bool frozen_ok = true;
};

inline CycledReplay replay_cycled(const CycledMachine& machine, const std::vector<int>& x,
                                  const std::vector<int>& raw_tape, std::size_t t) {
  ReplayResult r = replay_steps(truncate_at(machine, t), machine.layout, x, raw_tape,
                                machine.work_width);
  CycledReplay out;
  out.determined = r.work_bits[static_cast<size_t>(machine.determined_bit)];
  out.output = r.work_bits[static_cast<size_t>(machine.output_bit)];
  out.work_bits = std::move(r.work_bits);
  out.tape_bits = std::move(r.tape_bits);
  out.addressing_ok = r.addressing_ok;
  out.frozen_ok = r.frozen_ok;
  return out;
}

inline CatalyticCircuit lower_cycled_to_circuit(const CycledMachine& machine, std::size_t t,
                                                Backend backend = Backend::Perm) {
  require(backend == Backend::Perm,
          "toffoli backend does not lower cycled streams; use the perm backend");
  return lower_to_circuit(truncate_at(machine, t), machine.layout, backend, machine.work_width);
}

inline CatalyticCircuit lower_cycled_to_circuit(const CycledMachine& machine,
                                                Backend backend = Backend::Perm) {
  return lower_cycled_to_circuit(machine, machine.stream.size(), backend);
}

}  // namespace qclab
