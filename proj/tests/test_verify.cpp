#include <catch2/catch_amalgamated.hpp>

#include "corpus.hpp"
#include "qclab/verify.hpp"

using namespace qclab;
using qclab_testing::verification_corpus;

TEST_CASE("all three verifiers agree with corpus ground truth", "[verify]") {
  for (const auto& entry : verification_corpus()) {
    INFO(entry.name);
    CatalyticityReport pp = verify_pauliprod(entry.circuit, 1e-9);
    CatalyticityReport ep = verify_epr(entry.circuit, 1e-9);
    CatalyticityReport rd = verify_random_density(entry.circuit, 8, 1e-9, 17);
    CHECK(pp.passed == entry.catalytic);
    CHECK(ep.passed == entry.catalytic);
    CHECK(rd.passed == entry.catalytic);
    CHECK(pp.states_tested == pauliprod_count(entry.circuit.catalytic_width()));
    CHECK(ep.states_tested == 1);
    CHECK(rd.states_tested == 8);
  }
}

TEST_CASE("identity circuit verifies exactly", "[verify]") {
  CatalyticCircuit circuit(1, 1, 0, {});
  CatalyticityReport report = verify_pauliprod(circuit);
  CHECK(report.passed);
  CHECK(report.max_reset_deviation <= 1e-12);
  CHECK(report.max_output_deviation <= 1e-12);
  CHECK(report.states_tested == 6);
  REQUIRE(report.eta.has_value());
  CHECK(std::abs(report.eta->matrix()(0, 0) - 1.0) <= 1e-12);
}

TEST_CASE("eta reflects the work output", "[verify]") {
  CatalyticCircuit circuit(1, 1, 0, {make_gate("H", {0})});
  CatalyticityReport report = verify_epr(circuit);
  REQUIRE(report.passed);
  REQUIRE(report.eta.has_value());
  const Mat& m = report.eta->matrix();
  CHECK(std::abs(m(0, 0) - 0.5) <= 1e-12);
  CHECK(std::abs(m(0, 1) - 0.5) <= 1e-12);
  CHECK(std::abs(m(1, 0) - 0.5) <= 1e-12);
  CHECK(std::abs(m(1, 1) - 0.5) <= 1e-12);
}

TEST_CASE("phase kickback passes on basis states but fails the full check", "[verify]") {
  CatalyticCircuit circuit(1, 1, 0,
                           {make_gate("CNOT", {1, 0}), make_gate("Z", {0}),
                            make_gate("CNOT", {1, 0})});
  // Both computational basis states come back exactly...
  for (std::uint64_t b : {0ull, 1ull}) {
    RunResult r = run(circuit, PureState::basis(1, b));
    CHECK(trace_distance(r.catalytic_marginal, to_density(PureState::basis(1, b))) <= 1e-12);
  }
  // ...yet the circuit is not catalytic; conjugate eigenstates expose it.
  CatalyticityReport pp = verify_pauliprod(circuit);
  CHECK_FALSE(pp.passed);
  CHECK(pp.max_reset_deviation >= 0.9);
  CHECK((pp.worst_state.find('X') != std::string::npos ||
         pp.worst_state.find('Y') != std::string::npos));
  CHECK_FALSE(verify_epr(circuit).passed);
}

TEST_CASE("product-state enumeration respects its budget", "[verify]") {
  CatalyticCircuit wide(1, 6, 0, {});
  CHECK_THROWS_AS(verify_pauliprod(wide), budget_error);
  CHECK_THROWS_WITH(verify_pauliprod(wide),
                    Catch::Matchers::ContainsSubstring("verify_epr"));
  CHECK_THROWS_AS(verify_epr(wide), budget_error);  // 13 qubits beats the pure cap too

  // One entangled-pair run covers what 7776 product-state runs would.
  CatalyticCircuit five(1, 5, 0, {});
  CHECK(verify_epr(five).passed);
}

TEST_CASE("entangled-pair verification is exact for reversible cancellations", "[verify]") {
  CatalyticCircuit circuit(1, 1, 0,
                           {make_gate("CNOT", {1, 0}), make_gate("CNOT", {1, 0})});
  CatalyticityReport report = verify_epr(circuit);
  CHECK(report.passed);
  CHECK(report.max_reset_deviation <= 1e-12);
  CHECK(report.certificate_kind == "epr-choi");
}

TEST_CASE("x on the catalytic register moves an eigenstate all the way", "[verify]") {
  CatalyticCircuit circuit(1, 1, 0, {make_gate("X", {1})});
  CatalyticityReport report = verify_pauliprod(circuit);
  CHECK_FALSE(report.passed);
  CHECK(report.max_reset_deviation >= 1.0 - 1e-9);
  CHECK_FALSE(report.worst_state.empty());
}

TEST_CASE("random-density verification is deterministic in its seed", "[verify]") {
  CatalyticCircuit circuit(1, 2, 0,
                           {make_gate("CZ", {1, 2}), make_gate("CZ", {1, 2})});
  CatalyticityReport a = verify_random_density(circuit, 10, 1e-9, 5);
  CatalyticityReport b = verify_random_density(circuit, 10, 1e-9, 5);
  CHECK(a.max_reset_deviation == b.max_reset_deviation);
  CHECK(a.max_output_deviation == b.max_output_deviation);
  CHECK(a.worst_state == b.worst_state);
  CHECK(a.passed);
}

TEST_CASE("effective channel split of a catalytic circuit", "[verify]") {
  CatalyticCircuit circuit(1, 1, 0, {make_gate("H", {0})});
  EffectiveChannels split = effective_channels(circuit);

  Mat xi_choi = choi(split.xi);
  Mat id_choi = choi(identity_channel(1));
  CHECK((xi_choi - id_choi).cwiseAbs().maxCoeff() <= 1e-9);

  // Gamma maps any work input to eta.
  Rng rng(42, 0);
  Mat arbitrary = random_density_matrix(2, rng);
  Mat out = Mat::Zero(2, 2);
  for (const Mat& k : split.gamma.kraus()) out += k * arbitrary * dagger(k);
  CHECK((out - split.eta.matrix()).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(std::abs(split.eta.matrix()(0, 1).real() - 0.5) <= 1e-12);
}

TEST_CASE("effective channel split refuses non-catalytic circuits", "[verify]") {
  CatalyticCircuit circuit(1, 1, 0, {make_gate("CNOT", {1, 0})});
  CHECK_THROWS_AS(effective_channels(circuit), std::invalid_argument);
}

TEST_CASE("general-mode circuits verify through the density path", "[verify]") {
  CatalyticCircuit circuit(1, 1, 0, {make_gate("H", {0}), make_measure(0)},
                           CircuitMode::General);
  CatalyticityReport pp = verify_pauliprod(circuit);
  CHECK(pp.passed);
  REQUIRE(pp.eta.has_value());
  CHECK(std::abs(pp.eta->matrix()(0, 0) - 0.5) <= 1e-12);
  CHECK(std::abs(pp.eta->matrix()(0, 1)) <= 1e-12);
  CHECK(verify_epr(circuit).passed);
}
