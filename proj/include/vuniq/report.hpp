// vuniq/report.hpp

// Copyright 2026  The vuniq Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef VUNIQ_REPORT_HPP_
#define VUNIQ_REPORT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vuniq/common.hpp"

namespace vuniq {

// One table cell: the value (absent for unsatisfiable sweep cells) plus the
// configuration tuple that produced it, so every number stays traceable.
struct ReportCell {
  std::optional<double> value;
  int bits = 0;
  long long n_speakers = 0;
  long long k_samples = 0;
  uint64_t seed = 0;

  bool operator==(const ReportCell &) const = default;
};

struct ReportRow {
  std::string label;
  std::vector<ReportCell> cells;

  bool operator==(const ReportRow &) const = default;
};

struct ReportTable {
  std::string caption;
  std::string units;
  std::string row_header;  // header of the label column
  std::vector<std::string> columns;
  std::vector<ReportRow> rows;

  bool operator==(const ReportTable &) const = default;

  void Validate() const {
    for (const auto &row : rows)
      if (row.cells.size() != columns.size())
        throw ValidationError(
            Strf("report table '%s': row '%s' has %zu cells, expected %zu",
                 caption.c_str(), row.label.c_str(), row.cells.size(),
                 columns.size()));
  }
};

enum class RenderFormat { kCsv, kMarkdown, kJson };

inline RenderFormat RenderFormatFromName(const std::string &s) {
  if (s == "csv") return RenderFormat::kCsv;
  if (s == "markdown") return RenderFormat::kMarkdown;
  if (s == "json") return RenderFormat::kJson;
  throw ConfigError(Strf("unknown render format '%s'", s.c_str()));
}

namespace detail {

// Table text uses two decimal places; JSON keeps full precision.
inline std::string CellText(const ReportCell &cell) {
  if (!cell.value) return "—";
  return Strf("%.2f", *cell.value);
}

}  // namespace detail

inline std::string RenderCsv(const ReportTable &table) {
  table.Validate();
  std::string out;
  out += table.row_header;
  for (const auto &col : table.columns) out += "," + col;
  out += "\n";
  for (const auto &row : table.rows) {
    out += row.label;
    for (const auto &cell : row.cells) out += "," + detail::CellText(cell);
    out += "\n";
  }
  return out;
}

inline std::string RenderMarkdown(const ReportTable &table) {
  table.Validate();
  std::string out;
  if (!table.caption.empty()) out += "**" + table.caption + "**\n\n";
  out += "| " + table.row_header;
  for (const auto &col : table.columns) out += " | " + col;
  out += " |\n|";
  for (std::size_t i = 0; i < table.columns.size() + 1; ++i) out += " --- |";
  out += "\n";
  for (const auto &row : table.rows) {
    out += "| " + row.label;
    for (const auto &cell : row.cells) out += " | " + detail::CellText(cell);
    out += " |\n";
  }
  return out;
}

inline nlohmann::json CellToJson(const ReportCell &cell) {
  nlohmann::json j;
  j["value"] = cell.value ? nlohmann::json(*cell.value) : nlohmann::json();
  j["bits"] = cell.bits;
  j["n_speakers"] = cell.n_speakers;
  j["k_samples"] = cell.k_samples;
  j["seed"] = cell.seed;
  return j;
}

inline nlohmann::json TableToJson(const ReportTable &table) {
  table.Validate();
  nlohmann::json j;
  j["caption"] = table.caption;
  j["units"] = table.units;
  j["row_header"] = table.row_header;
  j["columns"] = table.columns;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto &row : table.rows) {
    nlohmann::json r;
    r["label"] = row.label;
    nlohmann::json cells = nlohmann::json::array();
    for (const auto &cell : row.cells) cells.push_back(CellToJson(cell));
    r["cells"] = std::move(cells);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

inline ReportTable TableFromJson(const nlohmann::json &j) {
  ReportTable table;
  try {
    table.caption = j.at("caption").get<std::string>();
    table.units = j.at("units").get<std::string>();
    table.row_header = j.at("row_header").get<std::string>();
    table.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto &r : j.at("rows")) {
      ReportRow row;
      row.label = r.at("label").get<std::string>();
      for (const auto &c : r.at("cells")) {
        ReportCell cell;
        if (!c.at("value").is_null()) cell.value = c.at("value").get<double>();
        cell.bits = c.at("bits").get<int>();
        cell.n_speakers = c.at("n_speakers").get<long long>();
        cell.k_samples = c.at("k_samples").get<long long>();
        cell.seed = c.at("seed").get<uint64_t>();
        row.cells.push_back(cell);
      }
      table.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(Strf("bad report table JSON: %s", e.what()));
  }
  table.Validate();
  return table;
}

inline std::string Render(const ReportTable &table, RenderFormat format) {
  switch (format) {
    case RenderFormat::kCsv: return RenderCsv(table);
    case RenderFormat::kMarkdown: return RenderMarkdown(table);
    case RenderFormat::kJson: return TableToJson(table).dump(2) + "\n";
  }
  throw ConfigError("unhandled render format");
}

}  // namespace vuniq

#endif  // VUNIQ_REPORT_HPP_
