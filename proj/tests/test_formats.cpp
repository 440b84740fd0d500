#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "corpus.hpp"
#include "qclab/io.hpp"
#include "qclab/report.hpp"

using namespace qclab;

namespace {

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "qclab_format_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("circuit files round-trip through write and read", "[formats]") {
  for (const auto& entry : qclab_testing::verification_corpus()) {
    auto path = scratch_dir() / (entry.name + ".qc");
    write_circuit(entry.circuit, path.string());
    CatalyticCircuit loaded = read_circuit(path.string());
    CHECK(loaded.work_width() == entry.circuit.work_width());
    CHECK(loaded.catalytic_width() == entry.circuit.catalytic_width());
    CHECK(loaded.output_qubit() == entry.circuit.output_qubit());
    CHECK(loaded.mode() == entry.circuit.mode());
    REQUIRE(loaded.steps().size() == entry.circuit.steps().size());
    const int n = loaded.work_width() + loaded.catalytic_width();
    if (loaded.mode() == CircuitMode::Unitary && n <= 6) {
      // Behavioral equality on a generic state.
      Rng rng(3, 0);
      Vec amp = random_statevector(static_cast<Eigen::Index>(dim_of(n - loaded.work_width())), rng);
      PureState cat(n - loaded.work_width(), amp);
      RunResult a = run(entry.circuit, cat);
      RunResult b = run(loaded, cat);
      const Vec& va = std::get<PureState>(a.joint).amplitudes();
      const Vec& vb = std::get<PureState>(b.joint).amplitudes();
      CHECK((va - vb).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("parse errors carry file and line", "[formats]") {
  auto path = scratch_dir() / "broken.qc";
  write_text(path, "WORK 1\nCAT 1\nGATE NOPE 0\n");
  CHECK_THROWS_WITH(read_circuit(path.string()),
                    Catch::Matchers::ContainsSubstring("broken.qc:3"));

  write_text(path, "WORK 1\nGATE X 0\n");
  CHECK_THROWS_WITH(read_circuit(path.string()),
                    Catch::Matchers::ContainsSubstring("missing WORK or CAT"));

  write_text(path, "WORK 1\nCAT 1\nFROB 1\n");
  CHECK_THROWS_WITH(read_circuit(path.string()),
                    Catch::Matchers::ContainsSubstring("unknown directive"));

  CHECK_THROWS_WITH(read_circuit((scratch_dir() / "absent.qc").string()),
                    Catch::Matchers::ContainsSubstring("cannot open"));
}

TEST_CASE("measure lines switch the circuit into general mode", "[formats]") {
  auto path = scratch_dir() / "general.qc";
  write_text(path, "WORK 1\nCAT 1\nGATE H 0\nMEASURE 0\n");
  CatalyticCircuit circuit = read_circuit(path.string());
  CHECK(circuit.mode() == CircuitMode::General);
  CHECK(circuit.steps().size() == 2);
}

TEST_CASE("permutation side files default unlisted points to fixed", "[formats]") {
  auto dir = scratch_dir();
  write_text(dir / "cycle.perm", "# top three states cycle\nDIM 4\n1 2\n2 3\n3 1\n");
  write_text(dir / "perm.qc", "WORK 1\nCAT 2\nOUTPUT 0\nPERM cycle.perm 1 2\n");
  CatalyticCircuit circuit = read_circuit((dir / "perm.qc").string());
  REQUIRE(circuit.steps().size() == 1);
  const auto& perm = circuit.steps()[0].perm;
  CHECK(perm == std::vector<std::uint64_t>{0, 2, 3, 1});

  write_text(dir / "bad.perm", "DIM 4\n1 2\n1 3\n");
  write_text(dir / "bad.qc", "WORK 1\nCAT 2\nPERM bad.perm 1 2\n");
  CHECK_THROWS_WITH(read_circuit((dir / "bad.qc").string()),
                    Catch::Matchers::ContainsSubstring("mapped twice"));

  write_text(dir / "nodim.perm", "0 1\n");
  write_text(dir / "nodim.qc", "WORK 1\nCAT 2\nPERM nodim.perm 1 2\n");
  CHECK_THROWS_WITH(read_circuit((dir / "nodim.qc").string()),
                    Catch::Matchers::ContainsSubstring("DIM"));
}

TEST_CASE("register programs round-trip through write and read", "[formats]") {
  const RegisterProgram progs[] = {threshold_program(3, 2, 5),
                                   gate_program(GateKind::Threshold, 3, 2, 2),
                                   gate_program(GateKind::Xor, 2, 5)};
  for (const RegisterProgram& prog : progs) {
    auto path = scratch_dir() / "roundtrip.rp";
    write_program(prog, path.string());
    const RegisterProgram loaded = read_program(path.string());
    CHECK(program_to_text(loaded) == program_to_text(prog));
  }
}

TEST_CASE("reports obey the fixed schema", "[report]") {
  const Json report = make_report("demo", Json::object({{"tol", 1e-9}}),
                                  Json::array({Json{{"item", 1}, {"passed", true}}}),
                                  Json::object({{"passed", true}}), 7, 12);
  CHECK_NOTHROW(validate_report(report));
  CHECK(report["schema"] == "catalyst-qlab/1");

  Json extra = report;
  extra["surprise"] = 1;
  CHECK_THROWS_WITH(validate_report(extra), Catch::Matchers::ContainsSubstring("outside"));

  Json missing = report;
  missing.erase("seed");
  CHECK_THROWS_WITH(validate_report(missing), Catch::Matchers::ContainsSubstring("seed"));

  Json wrong = report;
  wrong["schema"] = "catalyst-qlab/2";
  CHECK_THROWS_AS(validate_report(wrong), std::invalid_argument);

  Json negative = report;
  negative["elapsed_ms"] = -4;
  CHECK_THROWS_AS(validate_report(negative), std::invalid_argument);
}

TEST_CASE("reports with equal content serialize byte for byte", "[report]") {
  auto build = [] {
    return make_report("census", Json::object({{"cat_bits", 4}, {"builtin", "walker"}}),
                       Json::array({Json{{"runtime", 0}, {"tapes", 8}},
                                    Json{{"runtime", 1}, {"tapes", 4}}}),
                       Json::object({{"mean", 0.75}}), 3, 0);
  };
  CHECK(build().dump(2) == build().dump(2));

  Json later = build();
  later["elapsed_ms"] = 17;  // the one field allowed to differ between runs
  Json normalized = later;
  normalized["elapsed_ms"] = 0;
  CHECK(normalized.dump(2) == build().dump(2));
}

TEST_CASE("matrices serialize as nested re/im pairs", "[report]") {
  Mat m(2, 2);
  m << cplx(1, 0), cplx(0, -2), cplx(0.5, 0.25), cplx(0, 0);
  const Json j = matrix_to_json(m);
  CHECK(j[0][0] == Json::array({1.0, 0.0}));
  CHECK(j[0][1] == Json::array({0.0, -2.0}));
  CHECK(j[1][0] == Json::array({0.5, 0.25}));
}

TEST_CASE("csv export follows the first row's column order", "[report]") {
  const Json report = make_report(
      "verify", Json::object(),
      Json::array({Json{{"set", "pauliprod"}, {"passed", true}, {"deviation", 0.0}},
                   Json{{"set", "epr, wide"}, {"passed", false}, {"deviation", 0.25}}}),
      Json::object(), 0, 0);
  const std::string csv = report_to_csv(report);
  CHECK(csv ==
        "set,passed,deviation\n"
        "pauliprod,true,0.0\n"
        "\"epr, wide\",false,0.25\n");

  const Json empty = make_report("verify", Json::object(), Json::array(), Json::object(), 0, 0);
  CHECK(report_to_csv(empty).empty());
}
