#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ptq {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kEngineVersion = "ptq 1.0.0";

/// Empty cells (e.g. a dip position that does not exist) hold monostate.
using Cell = std::variant<std::monostate, double, std::string>;

struct ResidualCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed() const { return value < threshold; }
};

struct Provenance {
  std::string command;
  std::string config_hash;
  std::string engine_version = kEngineVersion;
  std::vector<ResidualCheck> residuals;
  /// Free-form annotations, e.g. parameter values or reference numbers.
  std::map<std::string, std::string> notes;
  std::map<std::string, std::string> metadata;

  bool passed() const;
};

struct PlotMarker {
  double x = 0.0;
  std::string label;
};

/// How a table renders as a line plot. Kept in the JSON output so the plot can
/// be regenerated from the data file alone.
struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::string x_column;
  std::vector<std::string> y_columns;
  std::vector<PlotMarker> markers;
  std::optional<std::pair<double, double>> shade;
};

struct ResultTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  Provenance provenance;
  std::optional<PlotSpec> plot;

  std::size_t column_index(const std::string& column) const;
  /// Numeric values of one column; empty and text cells become NaN.
  std::vector<double> numeric_column(const std::string& column) const;
};

std::string to_csv(const ResultTable& table);
nlohmann::json to_json(const ResultTable& table);
ResultTable table_from_json(const nlohmann::json& doc);

/// Writes <dir>/<name>.<ext> for each requested format among csv, json, svg
/// (svg only when the table has a plot spec). Returns the written paths.
std::vector<std::filesystem::path> write_table(const ResultTable& table, const std::filesystem::path& dir,
                                               const std::vector<std::string>& formats);

}  // namespace ptq
