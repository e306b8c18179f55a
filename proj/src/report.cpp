#include "equisym/report.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>

#include "equisym/errors.hpp"

namespace equisym {

void Report::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size())
    throw ShapeError("Report: row has " + std::to_string(row.size()) + " cells for " +
                     std::to_string(columns.size()) + " columns");
  rows.push_back(std::move(row));
}

void Report::fail(const std::string& what) {
  passed = false;
  failures.push_back(what);
}

nlohmann::json Report::summary() const {
  return {{"experiment", experiment}, {"config", config},       {"passed", passed},
          {"metrics", metrics},       {"failures", failures},   {"rows", rows.size()}};
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string to_csv(const Report& report) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_escape(cells[i]);
    out += '\n';
  };
  line(report.columns);
  for (const auto& row : report.rows) line(row);
  return out;
}

void report_emit(const Report& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path base = fs::path(dir) / report.experiment;
  auto write = [](const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os || !(os << text)) throw Error("report_emit: cannot write '" + path.string() + "'");
  };
  write(base.string() + ".csv", to_csv(report));
  write(base.string() + ".json", report.summary().dump(2) + "\n");
}

} // namespace equisym
