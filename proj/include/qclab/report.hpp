#pragma once

// Experiment reports with a fixed shape so downstream tooling can rely on
// field names: {"schema": "catalyst-qlab/1", "experiment", "config",
// "results", "aggregate", "seed", "elapsed_ms"}. Key order is the insertion
// order above, so a report serializes byte-identically for identical content;
// elapsed_ms is the one wall-clock field and the only part that may differ
// between repeated runs.

#include <chrono>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qclab/common.hpp"

namespace qclab {

using Json = nlohmann::ordered_json;

inline constexpr const char* report_schema = "catalyst-qlab/1";

inline Json make_report(const std::string& experiment, Json config, Json results, Json aggregate,
                        std::uint64_t seed, std::int64_t elapsed_ms) {
  Json report;
  report["schema"] = report_schema;
  report["experiment"] = experiment;
  report["config"] = std::move(config);
  report["results"] = std::move(results);
  report["aggregate"] = std::move(aggregate);
  report["seed"] = seed;
  report["elapsed_ms"] = elapsed_ms;
  return report;
}

/// Shape check for the fixed schema; throws with the offending field name.
inline void validate_report(const Json& report) {
  require(report.is_object(), "report must be a JSON object");
  const std::vector<std::string> keys = {"schema", "experiment", "config",
                                         "results", "aggregate", "seed", "elapsed_ms"};
  for (const std::string& key : keys)
    require(report.contains(key), "report is missing the field " + key);
  require(report.size() == keys.size(), "report carries fields outside the schema");
  require(report["schema"].is_string() && report["schema"] == report_schema,
          "schema must be " + std::string(report_schema));
  require(report["experiment"].is_string(), "experiment must be a string");
  require(report["config"].is_object(), "config must be an object");
  require(report["results"].is_array(), "results must be an array");
  require(report["aggregate"].is_object(), "aggregate must be an object");
  require(report["seed"].is_number_unsigned() || report["seed"].is_number_integer(),
          "seed must be an integer");
  require(report["elapsed_ms"].is_number_integer() && report["elapsed_ms"].get<std::int64_t>() >= 0,
          "elapsed_ms must be a nonnegative integer");
}

inline Json complex_to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

/// Row-major nested arrays of [re, im] pairs.
inline Json matrix_to_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace detail {

inline std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char ch : field) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  return quoted;
}

inline std::string csv_cell(const Json& value) {
  if (value.is_string()) return csv_quote(value.get<std::string>());
  return csv_quote(value.dump());
}

}  // namespace detail

/// CSV view of a report's results array. Columns follow the key order of the
/// first result row (reports insert keys in a fixed order, so the column
/// order is part of each experiment's documented output); rows missing a
/// column emit an empty cell, nested values serialize as JSON text.
inline std::string report_to_csv(const Json& report) {
  validate_report(report);
  const Json& results = report["results"];
  std::ostringstream out;
  if (results.empty()) return out.str();
  std::vector<std::string> columns;
  for (const auto& item : results.front().items()) columns.push_back(item.key());
  for (std::size_t i = 0; i < columns.size(); ++i)
    out << (i ? "," : "") << detail::csv_quote(columns[i]);
  out << "\n";
  for (const Json& row : results) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out << (i ? "," : "");
      if (row.contains(columns[i])) out << detail::csv_cell(row[columns[i]]);
    }
    out << "\n";
  }
  return out.str();
}

/// Wall-clock for the elapsed_ms field.
class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  std::int64_t elapsed_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace qclab
