#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace equisym {

/// Result table and summary of one experiment run.
struct Report {
  std::string experiment;
  nlohmann::json config = nlohmann::json::object();
  bool passed = true;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  nlohmann::json metrics = nlohmann::json::object();
  std::vector<std::string> failures;

  void add_row(std::vector<std::string> row);
  /// Records a failed check; the run's exit code becomes nonzero.
  void fail(const std::string& what);
  nlohmann::json summary() const;
};

/// Shortest form that reads back to the same double.
std::string format_double(double v);

/// RFC 4180 quoting for cells containing commas, quotes or newlines.
std::string csv_escape(const std::string& cell);

std::string to_csv(const Report& report);

/// Writes <dir>/<experiment>.csv and <dir>/<experiment>.json (LF endings).
void report_emit(const Report& report, const std::string& dir);

} // namespace equisym
