#include "ptq/result_table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "ptq/errors.hpp"
#include "ptq/svg_plot.hpp"

namespace ptq {
namespace {

std::string csv_cell(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "";
        } else if constexpr (std::is_same_v<T, double>) {
          return fmt::format("{}", v);
        } else {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string quoted = "\"";
          for (char c : v) {
            if (c == '"') quoted += '"';
            quoted += c;
          }
          return quoted + "\"";
        }
      },
      cell);
}

nlohmann::json cell_json(const Cell& cell) {
  if (std::holds_alternative<double>(cell)) return std::get<double>(cell);
  if (std::holds_alternative<std::string>(cell)) return std::get<std::string>(cell);
  return nullptr;
}

Cell cell_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  return std::monostate{};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

bool Provenance::passed() const {
  return std::all_of(residuals.begin(), residuals.end(), [](const auto& r) { return r.passed(); });
}

std::size_t ResultTable::column_index(const std::string& column) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw std::invalid_argument("table '" + name + "' has no column '" + column + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> ResultTable::numeric_column(const std::string& column) const {
  const auto idx = column_index(column);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    const auto* v = std::get_if<double>(&row[idx]);
    out.push_back(v ? *v : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

std::string to_csv(const ResultTable& table) {
  const auto& p = table.provenance;
  std::string out;
  out += fmt::format("# table: {}\n", table.name);
  out += fmt::format("# schema_version: {}\n", kSchemaVersion);
  out += fmt::format("# command: {}\n", p.command);
  out += fmt::format("# engine_version: {}\n", p.engine_version);
  out += fmt::format("# config_hash: {}\n", p.config_hash);
  out += fmt::format("# status: {}\n", p.passed() ? "ok" : "failed");
  for (const auto& r : p.residuals) {
    out += fmt::format("# residual.{}: {} (threshold {}, {})\n", r.name, r.value, r.threshold,
                       r.passed() ? "pass" : "FAIL");
  }
  for (const auto& [k, v] : p.notes) out += fmt::format("# note.{}: {}\n", k, v);
  for (const auto& [k, v] : p.metadata) out += fmt::format("# metadata.{}: {}\n", k, v);

  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += csv_cell(row[c]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const ResultTable& table) {
  const auto& p = table.provenance;
  nlohmann::json residuals = nlohmann::json::array();
  for (const auto& r : p.residuals) {
    residuals.push_back({{"name", r.name}, {"value", r.value}, {"threshold", r.threshold}, {"passed", r.passed()}});
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& cell : row) jr.push_back(cell_json(cell));
    rows.push_back(std::move(jr));
  }
  nlohmann::json doc{
      {"schema_version", kSchemaVersion},
      {"name", table.name},
      {"columns", table.columns},
      {"rows", std::move(rows)},
      {"provenance",
       {{"command", p.command},
        {"config_hash", p.config_hash},
        {"engine_version", p.engine_version},
        {"status", p.passed() ? "ok" : "failed"},
        {"residuals", std::move(residuals)},
        {"notes", p.notes},
        {"metadata", p.metadata}}},
  };
  if (table.plot) {
    const auto& s = *table.plot;
    nlohmann::json markers = nlohmann::json::array();
    for (const auto& m : s.markers) markers.push_back({{"x", m.x}, {"label", m.label}});
    doc["plot"] = {{"title", s.title},         {"x_label", s.x_label},     {"y_label", s.y_label},
                   {"x_column", s.x_column},   {"y_columns", s.y_columns}, {"markers", std::move(markers)}};
    doc["plot"]["shade"] = s.shade ? nlohmann::json::array({s.shade->first, s.shade->second}) : nlohmann::json(nullptr);
  }
  return doc;
}

ResultTable table_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("schema_version", 0) != kSchemaVersion) {
    throw ConfigError("result JSON: missing or unsupported schema_version");
  }
  try {
    ResultTable table;
    table.name = doc.at("name").get<std::string>();
    table.columns = doc.at("columns").get<std::vector<std::string>>();
    for (const auto& jr : doc.at("rows")) {
      std::vector<Cell> row;
      for (const auto& cell : jr) row.push_back(cell_from_json(cell));
      table.rows.push_back(std::move(row));
    }
    const auto& jp = doc.at("provenance");
    auto& p = table.provenance;
    p.command = jp.at("command").get<std::string>();
    p.config_hash = jp.at("config_hash").get<std::string>();
    p.engine_version = jp.at("engine_version").get<std::string>();
    for (const auto& r : jp.at("residuals")) {
      p.residuals.push_back({r.at("name").get<std::string>(), r.at("value").get<double>(), r.at("threshold").get<double>()});
    }
    p.notes = jp.at("notes").get<std::map<std::string, std::string>>();
    p.metadata = jp.at("metadata").get<std::map<std::string, std::string>>();
    if (doc.contains("plot")) {
      const auto& js = doc.at("plot");
      PlotSpec s;
      s.title = js.at("title").get<std::string>();
      s.x_label = js.at("x_label").get<std::string>();
      s.y_label = js.at("y_label").get<std::string>();
      s.x_column = js.at("x_column").get<std::string>();
      s.y_columns = js.at("y_columns").get<std::vector<std::string>>();
      for (const auto& m : js.at("markers")) s.markers.push_back({m.at("x").get<double>(), m.at("label").get<std::string>()});
      if (js.at("shade").is_array()) s.shade = std::make_pair(js.at("shade")[0].get<double>(), js.at("shade")[1].get<double>());
      table.plot = std::move(s);
    }
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("result JSON: ") + e.what());
  }
}

std::vector<std::filesystem::path> write_table(const ResultTable& table, const std::filesystem::path& dir,
                                               const std::vector<std::string>& formats) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& f : formats) {
    const auto path = dir / (table.name + "." + f);
    if (f == "csv") {
      write_file(path, to_csv(table));
    } else if (f == "json") {
      write_file(path, to_json(table).dump(2) + "\n");
    } else if (f == "svg") {
      if (!table.plot) continue;
      write_file(path, render_svg(table));
    } else {
      continue;
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace ptq
