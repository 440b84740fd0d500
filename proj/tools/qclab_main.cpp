// Experiment runner: verification, compilation, DQC1 runs, and the runtime
// census, all emitting JSON reports on stdout (schema catalyst-qlab/1).
// Exit codes: 0 pass, 1 verification failed, 2 input error, 3 budget exceeded.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qclab/census.hpp"
#include "qclab/compile.hpp"
#include "qclab/dqc1.hpp"
#include "qclab/io.hpp"
#include "qclab/report.hpp"
#include "qclab/verify.hpp"

namespace {

using qclab::Json;

constexpr int kExitPass = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitInputError = 2;
constexpr int kExitBudget = 3;

/// Budget spec: comma-separated cap=value pairs (a bare integer sets the
/// exhaustive-enumeration budget). Caps: pure, density, epr, pauliprod,
/// exhaustive, sampled, steps, census, dqc1-mixed, dqc1-total.
void apply_budget_spec(const std::string& spec) {
  if (spec.empty()) return;
  qclab::Limits& caps = qclab::limits();
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    std::string key = eq == std::string::npos ? "exhaustive" : item.substr(0, eq);
    const std::string value = eq == std::string::npos ? item : item.substr(eq + 1);
    std::uint64_t v = 0;
    try {
      v = std::stoull(value);
    } catch (const std::exception&) {
      throw std::invalid_argument("budget spec needs integers, got " + item);
    }
    if (key == "pure") caps.max_pure_qubits = static_cast<int>(v);
    else if (key == "density") caps.max_density_qubits = static_cast<int>(v);
    else if (key == "epr") caps.max_epr_density_qubits = static_cast<int>(v);
    else if (key == "pauliprod") caps.pauliprod_max_catalytic = static_cast<int>(v);
    else if (key == "exhaustive") caps.exhaustive_budget = v;
    else if (key == "sampled") caps.sampled_trials = v;
    else if (key == "steps") caps.max_circuit_steps = v;
    else if (key == "census") caps.census_max_configs = v;
    else if (key == "dqc1-mixed") caps.dqc1_max_mixed_qubits = static_cast<int>(v);
    else if (key == "dqc1-total") caps.dqc1_max_total_qubits = static_cast<int>(v);
    else throw std::invalid_argument("unknown budget cap: " + key);
  }
}

void emit(const Json& report, const std::string& csv_path) {
  qclab::validate_report(report);
  std::cout << report.dump(2) << "\n";
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw std::invalid_argument("cannot open csv output " + csv_path);
    out << qclab::report_to_csv(report);
  }
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream ss;
  ss << std::hex << h;
  return ss.str();
}

bool ends_with(const std::string& text, const std::string& suffix) {
  return text.size() >= suffix.size() &&
         text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<int> parse_input_bits(const std::string& text) {
  std::vector<int> bits;
  for (char ch : text) {
    if (ch != '0' && ch != '1')
      throw std::invalid_argument("--x takes a bit string such as 101");
    bits.push_back(ch - '0');
  }
  return bits;
}

struct VerifyArgs {
  std::string file;
  std::string set = "pauliprod";
  double tol = 1e-9;
  int trials = 100;
  std::uint64_t seed = 0;
  std::string csv;
};

int run_verify(const VerifyArgs& args) {
  qclab::Stopwatch clock;
  const qclab::CatalyticCircuit circuit = qclab::read_circuit(args.file);
  qclab::CatalyticityReport result;
  if (args.set == "pauliprod")
    result = qclab::verify_pauliprod(circuit, args.tol);
  else if (args.set == "epr")
    result = qclab::verify_epr(circuit, args.tol);
  else
    result = qclab::verify_random_density(circuit, args.trials, args.tol, args.seed);

  Json row;
  row["set"] = args.set;
  row["passed"] = result.passed;
  row["max_reset_deviation"] = result.max_reset_deviation;
  row["max_output_deviation"] = result.max_output_deviation;
  row["states_tested"] = result.states_tested;
  row["certificate"] = result.certificate_kind;
  row["worst_state"] = result.worst_state;

  Json config;
  config["file"] = args.file;
  config["set"] = args.set;
  config["tol"] = args.tol;
  config["trials"] = args.trials;

  emit(qclab::make_report("verify-catalytic", std::move(config), Json::array({row}),
                          Json::object({{"passed", result.passed}}), args.seed,
                          clock.elapsed_ms()),
       args.csv);
  return result.passed ? kExitPass : kExitVerifyFailed;
}

struct CompileArgs {
  std::string file;
  std::string backend = "perm";
  int cycles = 0;
  std::int64_t truncate = -1;
  int block_count = -1;
  std::string out;
  std::string csv;
};

int run_compile(const CompileArgs& args) {
  qclab::Stopwatch clock;
  const qclab::RegisterProgram prog = qclab::read_program(args.file);
  const qclab::Backend backend = qclab::backend_from_string(args.backend);
  std::string out = args.out;
  if (out.empty()) {
    const auto slash = args.file.find_last_of('/');
    const std::string base = slash == std::string::npos ? args.file : args.file.substr(slash + 1);
    const auto dot = base.find_last_of('.');
    out = (dot == std::string::npos ? base : base.substr(0, dot)) + ".qc";
  }

  Json row;
  row["source"] = args.file;
  row["backend"] = args.backend;
  if (args.cycles > 0) {
    const qclab::CycledMachine machine = qclab::cycle_wrap(prog, args.cycles, args.block_count);
    const std::size_t t = args.truncate < 0 ? machine.stream.size()
                                            : static_cast<std::size_t>(args.truncate);
    const qclab::CatalyticCircuit circuit = qclab::lower_cycled_to_circuit(machine, t, backend);
    qclab::write_circuit(circuit, out);
    row["cycles"] = args.cycles;
    row["cycle_length"] = machine.cycle_length;
    row["truncated_at"] = t;
    row["work_qubits"] = circuit.work_width();
    row["catalytic_qubits"] = circuit.catalytic_width();
    row["output_qubit"] = circuit.output_qubit();
    row["gates"] = circuit.steps().size();
  } else {
    const qclab::CompiledArtifact art = qclab::compile_program(prog, backend, args.block_count);
    qclab::write_circuit(art.circuit, out);
    row["source_hash"] = hash_hex(art.source_hash);
    row["stream_steps"] = art.stream.size();
    row["work_qubits"] = art.circuit.work_width();
    row["catalytic_qubits"] = art.circuit.catalytic_width();
    row["output_qubit"] = art.circuit.output_qubit();
    row["gates"] = art.circuit.steps().size();
  }
  row["out"] = out;

  Json config;
  config["file"] = args.file;
  config["backend"] = args.backend;
  config["cycles"] = args.cycles;
  config["truncate"] = args.truncate;
  config["block_count"] = args.block_count;
  config["out"] = out;

  emit(qclab::make_report("compile", std::move(config), Json::array({row}),
                          Json::object({{"written", out}}), 0, clock.elapsed_ms()),
       args.csv);
  return kExitPass;
}

struct Dqc1Args {
  std::string file;
  bool exact = false;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  double q_bound = 0.0;
  std::string x_bits;
  int cycles = 4;
  std::int64_t truncate = -1;
  int block_count = -1;
  std::string csv;
};

int run_dqc1(const Dqc1Args& args) {
  qclab::Stopwatch clock;
  Json row;
  Json config;
  config["file"] = args.file;

  std::optional<qclab::DQCkInstance> instance;
  if (ends_with(args.file, ".rp")) {
    const qclab::RegisterProgram prog = qclab::read_program(args.file);
    const std::vector<int> x = parse_input_bits(args.x_bits);
    const qclab::CycledMachine probe = qclab::cycle_wrap(prog, args.cycles, args.block_count);
    const std::size_t t = args.truncate < 0
                              ? static_cast<std::size_t>(probe.cycle_length) + 1
                              : static_cast<std::size_t>(args.truncate);
    const qclab::CLPipelineResult pipe =
        qclab::cl_pipeline(prog, x, args.cycles, t, args.block_count);
    config["x"] = args.x_bits;
    config["cycles"] = args.cycles;
    config["truncate"] = t;
    row["f_value"] = pipe.f_value;
    row["census_success"] = pipe.census_success;
    row["predicted_bound"] = pipe.predicted_bound;
    row["determined_fraction"] = pipe.determined_fraction;
    row["never_wrong"] = pipe.never_wrong;
    row["clean_qubits"] = pipe.instance.clean_count;
    row["mixed_qubits"] = pipe.instance.mixed_count;
    instance.emplace(std::move(pipe.instance));
  } else {
    const qclab::CatalyticCircuit circuit = qclab::read_circuit(args.file);
    instance.emplace(qclab::from_unitary_catalytic(circuit));
    row["clean_qubits"] = instance->clean_count;
    row["mixed_qubits"] = instance->mixed_count;
  }

  const bool sampled = args.shots > 0;
  const qclab::OutcomeEstimate est = sampled
                                         ? qclab::sample(*instance, args.shots, args.seed)
                                         : qclab::exact_probabilities(*instance);
  row["method"] = qclab::to_string(est.method);
  row["p0"] = est.p0;
  row["p1"] = est.p1;
  if (sampled) {
    row["shots"] = est.shots;
    row["standard_error"] = est.standard_error;
  }
  config["mode"] = sampled ? "sampled" : "exact";
  config["shots"] = args.shots;
  config["q_bound"] = args.q_bound;

  Json aggregate;
  if (args.q_bound > 0) {
    const qclab::DecisionOutcome verdict = qclab::decide(est, args.q_bound);
    aggregate["verdict"] = qclab::to_string(verdict.verdict);
    aggregate["margin_bound"] = verdict.margin_bound;
  } else {
    aggregate["verdict"] = "none requested";
  }

  emit(qclab::make_report("run-dqc1", std::move(config), Json::array({row}),
                          std::move(aggregate), args.seed, clock.elapsed_ms()),
       args.csv);
  return kExitPass;
}

struct CensusArgs {
  std::string builtin;
  int cat_bits = 8;
  std::string csv;
};

int run_census(const CensusArgs& args) {
  qclab::Stopwatch clock;
  qclab::CatalyticAutomaton automaton;
  if (args.builtin == "halt")
    automaton = qclab::immediate_halt_automaton(args.cat_bits);
  else if (args.builtin == "walker")
    automaton = qclab::bit_scan_walker(args.cat_bits);
  else
    automaton = qclab::modular_counter(args.cat_bits);
  const qclab::CensusReport census = qclab::runtime_census(automaton);

  std::map<std::uint64_t, std::uint64_t> histogram;
  for (std::uint64_t t : census.runtimes) ++histogram[t];
  Json rows = Json::array();
  for (const auto& [runtime, tapes] : histogram)
    rows.push_back(Json{{"runtime", runtime}, {"tapes", tapes}});

  const bool passed =
      census.trajectories_disjoint && census.bound_holds && census.tapes_restored;
  Json aggregate;
  aggregate["tape_count"] = census.tape_count;
  aggregate["mean_runtime"] = census.mean_runtime;
  aggregate["max_runtime"] = census.max_runtime;
  aggregate["sum_runtimes"] = census.sum_runtimes;
  aggregate["configuration_count"] = census.configuration_count;
  aggregate["distinct_visited"] = census.distinct_visited;
  aggregate["trajectories_disjoint"] = census.trajectories_disjoint;
  aggregate["bound_holds"] = census.bound_holds;
  aggregate["tapes_restored"] = census.tapes_restored;
  aggregate["passed"] = passed;

  Json config;
  config["builtin"] = automaton.name;
  config["cat_bits"] = args.cat_bits;

  emit(qclab::make_report("census", std::move(config), std::move(rows), std::move(aggregate), 0,
                          clock.elapsed_ms()),
       args.csv);
  return passed ? kExitPass : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale laboratory for quantum catalytic space"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file mirroring the flags (sections per subcommand)");
  std::string budget;
  app.add_option("--budget", budget,
                 "budget caps, e.g. 'pure=14,exhaustive=5000000' (bare integer = exhaustive)")
      ->envname("QCLAB_BUDGET");

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify-catalytic", "check a circuit's reset guarantee");
  verify->fallthrough();
  verify->add_option("file", verify_args.file, "circuit file (.qc)")->required();
  verify->add_option("--set", verify_args.set, "catalytic set to quantify over")
      ->check(CLI::IsMember({"pauliprod", "epr", "random"}));
  verify->add_option("--tol", verify_args.tol, "deviation tolerance");
  verify->add_option("--trials", verify_args.trials, "random-set trials");
  verify->add_option("--seed", verify_args.seed, "random-set seed");
  verify->add_option("--csv", verify_args.csv, "also write results as CSV");

  CompileArgs compile_args;
  CLI::App* compile = app.add_subcommand("compile", "lower a register program to a circuit");
  compile->fallthrough();
  compile->add_option("file", compile_args.file, "program file (.rp)")->required();
  compile->add_option("--backend", compile_args.backend, "perm or toffoli")
      ->check(CLI::IsMember({"perm", "toffoli"}));
  compile->add_option("--cycles", compile_args.cycles, "wrap in self-cleaning cycles");
  compile->add_option("--truncate", compile_args.truncate, "cut the cycled stream after t steps");
  compile->add_option("--block-count", compile_args.block_count, "tape blocks (default 2 per register)");
  compile->add_option("--out", compile_args.out, "output circuit file");
  compile->add_option("--csv", compile_args.csv, "also write results as CSV");

  Dqc1Args dqc1_args;
  CLI::App* dqc1 = app.add_subcommand("run-dqc1", "one-clean-qubit run of a circuit or pipeline");
  dqc1->fallthrough();
  dqc1->add_option("file", dqc1_args.file, "circuit (.qc) or clean program (.rp)")->required();
  dqc1->add_flag("--exact", dqc1_args.exact, "exact probabilities (default)");
  dqc1->add_option("--shots", dqc1_args.shots, "sample instead of exact");
  dqc1->add_option("--seed", dqc1_args.seed, "sampling seed");
  dqc1->add_option("--q-bound", dqc1_args.q_bound, "decide with margin 1/q");
  dqc1->add_option("--x", dqc1_args.x_bits, "input bits for .rp pipelines, e.g. 101");
  dqc1->add_option("--cycles", dqc1_args.cycles, "pipeline cycles (default 4)");
  dqc1->add_option("--truncate", dqc1_args.truncate,
                   "pipeline prefix length (default one cycle + 1)");
  dqc1->add_option("--block-count", dqc1_args.block_count, "pipeline tape blocks");
  dqc1->add_option("--csv", dqc1_args.csv, "also write results as CSV");

  CensusArgs census_args;
  CLI::App* census = app.add_subcommand("census", "runtime census of a built-in automaton");
  census->fallthrough();
  census->add_option("builtin", census_args.builtin, "halt, walker, or counter")
      ->required()
      ->check(CLI::IsMember({"halt", "walker", "counter"}));
  census->add_option("--cat-bits", census_args.cat_bits, "catalytic tape width");
  census->add_option("--csv", census_args.csv, "also write results as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }

  try {
    apply_budget_spec(budget);
    if (verify->parsed()) return run_verify(verify_args);
    if (compile->parsed()) return run_compile(compile_args);
    if (dqc1->parsed()) return run_dqc1(dqc1_args);
    return run_census(census_args);
  } catch (const qclab::budget_error& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}
