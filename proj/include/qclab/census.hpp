#pragma once

// Runtime census over reversible catalytic automata. A machine here is a
// bijection on packed (state, clean, catalytic) configurations plus a halt
// predicate; the census runs it from the zero state and zero clean memory on
// every catalytic tape, measures T(tau), and checks the counting argument
// that powers the average-runtime bound: pre-halt configurations across all
// tapes and times are pairwise distinct, so the runtimes sum to at most the
// size of the configuration space and the mean is at most that size / 2^c.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qclab/common.hpp"

namespace qclab {

/// Configs pack as state | clean | catalytic, catalytic in the low bits.
struct CatalyticAutomaton {
  std::string name;
  int state_bits = 0;
  int clean_bits = 1;
  int catalytic_bits = 1;
  std::function<std::uint64_t(std::uint64_t)> transition;
  std::function<bool(std::uint64_t)> halts;

  int config_bits() const { return state_bits + clean_bits + catalytic_bits; }
  std::uint64_t config_count() const { return 1ull << config_bits(); }
  std::uint64_t catalytic_part(std::uint64_t config) const {
    return config & (dim_of(catalytic_bits) - 1);
  }
  std::uint64_t clean_part(std::uint64_t config) const {
    return (config >> catalytic_bits) & (dim_of(clean_bits) - 1);
  }
  std::uint64_t state_part(std::uint64_t config) const {
    return config >> (catalytic_bits + clean_bits);
  }
};

struct CensusReport {
  std::uint64_t tape_count = 0;
  std::vector<std::uint64_t> runtimes;     // T(tau), indexed by tape value
  std::uint64_t sum_runtimes = 0;
  double mean_runtime = 0.0;
  std::uint64_t max_runtime = 0;
  std::uint64_t configuration_count = 0;   // full (state, clean, catalytic) space
  std::uint64_t distinct_visited = 0;      // configurations seen before halting
  bool trajectories_disjoint = true;
  bool bound_holds = true;                 // sum_runtimes <= configuration_count
  bool tapes_restored = true;              // halting config carries tau unchanged
};

/// Exhaustive census. Rejects non-reversible machines up front (the image of
/// the transition must be a permutation) and machines that fail to halt
/// within one pass of the configuration space, which a reversible machine can
/// only do by looping forever.
inline CensusReport runtime_census(const CatalyticAutomaton& automaton) {
  require(automaton.state_bits >= 0 && automaton.clean_bits >= 1 && automaton.catalytic_bits >= 1,
          "automaton needs clean and catalytic bits");
  require(static_cast<bool>(automaton.transition) && static_cast<bool>(automaton.halts),
          "automaton needs a transition and a halt predicate");
  if (automaton.catalytic_bits > 22)
    throw budget_error("census enumerates 2^c tapes; c exceeds 22");
  if (automaton.config_count() > limits().census_max_configs)
    throw budget_error("census exceeds census_max_configs; raise qclab::limits()");

  const std::uint64_t configs = automaton.config_count();
  std::vector<bool> image(configs, false);
  for (std::uint64_t cfg = 0; cfg < configs; ++cfg) {
    const std::uint64_t next = automaton.transition(cfg);
    require(next < configs, "transition left the configuration space");
    require(!image[next], "transition is not reversible: two configurations collide");
    image[next] = true;
  }

  CensusReport report;
  report.tape_count = dim_of(automaton.catalytic_bits);
  report.configuration_count = configs;
  report.runtimes.reserve(report.tape_count);
  std::vector<bool> visited(configs, false);
  for (std::uint64_t tau = 0; tau < report.tape_count; ++tau) {
    std::uint64_t cfg = tau;  // zero state, zero clean memory
    std::uint64_t steps = 0;
    while (!automaton.halts(cfg)) {
      if (visited[cfg])
        report.trajectories_disjoint = false;
      else {
        visited[cfg] = true;
        ++report.distinct_visited;
      }
      cfg = automaton.transition(cfg);
      if (++steps > configs)
        throw std::invalid_argument("automaton does not halt from tape " + std::to_string(tau));
    }
    if (automaton.catalytic_part(cfg) != tau) report.tapes_restored = false;
    report.runtimes.push_back(steps);
    report.sum_runtimes += steps;
    if (steps > report.max_runtime) report.max_runtime = steps;
  }
  report.mean_runtime =
      static_cast<double>(report.sum_runtimes) / static_cast<double>(report.tape_count);
  report.bound_holds = report.sum_runtimes <= report.configuration_count;
  return report;
}

namespace detail {

inline int position_bits(int catalytic_bits) {
  int bits = 1;
  while ((1 << bits) < catalytic_bits) ++bits;
  return bits;
}

}  // namespace detail

/// Halts before the first step on every tape.
inline CatalyticAutomaton immediate_halt_automaton(int catalytic_bits) {
  CatalyticAutomaton a;
  a.name = "immediate-halt";
  a.clean_bits = 1;
  a.catalytic_bits = catalytic_bits;
  a.transition = [](std::uint64_t cfg) { return cfg; };
  a.halts = [](std::uint64_t) { return true; };
  return a;
}

/// Scans the tape left to right until the first 0 bit (or the last cell).
/// The clean register holds the scan position; each step increments it, so a
/// trajectory never repeats a configuration and distinct tapes never meet.
/// Expected runtime over uniform tapes is below 2 (geometric series).
inline CatalyticAutomaton bit_scan_walker(int catalytic_bits) {
  CatalyticAutomaton a;
  a.name = "bit-scan-walker";
  a.clean_bits = detail::position_bits(catalytic_bits);
  a.catalytic_bits = catalytic_bits;
  const int c = catalytic_bits;
  const int s = a.clean_bits;
  a.transition = [c, s](std::uint64_t cfg) {
    const std::uint64_t pos = cfg >> c;
    const std::uint64_t next = (pos + 1) & (dim_of(s) - 1);
    return (cfg & (dim_of(c) - 1)) | (next << c);
  };
  a.halts = [c](std::uint64_t cfg) {
    const std::uint64_t pos = cfg >> c;
    if (pos >= static_cast<std::uint64_t>(c - 1)) return true;
    return ((cfg >> pos) & 1ull) == 0;
  };
  return a;
}

/// Reads a period K = (low two tape bits) + 1, then counts the high part of
/// the tape up for K steps and back down for K steps while a clean counter
/// tracks the time; halts when the counter reaches 2K with the tape restored.
/// The counter equals the elapsed time on every pre-halt configuration, which
/// forces trajectory disjointness, and the next counter value determines the
/// direction of the last tape move, which makes the transition reversible.
inline CatalyticAutomaton modular_counter(int catalytic_bits) {
  require(catalytic_bits >= 2, "the modular counter reads two low tape bits");
  CatalyticAutomaton a;
  a.name = "modular-counter";
  a.clean_bits = 4;  // counts to 2K <= 8 without wrapping
  a.catalytic_bits = catalytic_bits;
  const int high_bits = catalytic_bits - 2;
  const int c = catalytic_bits;
  a.transition = [c, high_bits](std::uint64_t cfg) {
    const std::uint64_t tape = cfg & (dim_of(c) - 1);
    const std::uint64_t counter = (cfg >> c) & 15ull;
    const std::uint64_t k = (tape & 3ull) + 1;
    std::uint64_t high = tape >> 2;
    if (high_bits > 0) {
      const std::uint64_t mod = dim_of(high_bits);
      high = counter < k ? (high + 1) % mod : (high + mod - 1) % mod;
    }
    const std::uint64_t next_counter = (counter + 1) & 15ull;
    return (next_counter << c) | (high << 2) | (tape & 3ull);
  };
  a.halts = [c](std::uint64_t cfg) {
    const std::uint64_t k = ((cfg & (dim_of(c) - 1)) & 3ull) + 1;
    return ((cfg >> c) & 15ull) == 2 * k;
  };
  return a;
}

}  // namespace qclab
