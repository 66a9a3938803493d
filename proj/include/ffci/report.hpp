// Copyright 2026 The FFCI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ffci/error.hpp"
#include "ffci/layer_selection.hpp"

namespace ffci {

inline const std::vector<std::string>& baseline_columns() {
  static const std::vector<std::string> cols = {"R-1", "R-2", "R-L"};
  return cols;
}

inline const std::vector<std::string>& aspect_columns() {
  static const std::vector<std::string> cols = {"Fa", "Fo", "C", "IC"};
  return cols;
}

struct ReportRow {
  std::string system_name;
  std::size_t instances = 0;
  std::vector<std::optional<double>> values;  // per column, unscaled means
};

// Leaderboard: one row per system, columns are lexical baselines followed by
// Fa, Fo, C, IC. Values are mean per-instance scores in [0,1]; rendering
// scales them by 100.
struct FfciReport {
  std::vector<std::string> columns;
  std::vector<ReportRow> rows;  // ordered by system name
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<std::string> warnings;
};

// round(100 * value, 1) with one decimal, or "---" for absent values.
inline std::string format_cell(const std::optional<double>& v) {
  if (!v) return "---";
  double scaled = std::round(*v * 1000.0) / 10.0;
  if (scaled == 0.0) scaled = 0.0;  // no "-0.0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", scaled);
  return buf;
}

enum class TableFormat { markdown, csv };

inline TableFormat parse_table_format(std::string_view s) {
  if (s == "markdown" || s == "md") return TableFormat::markdown;
  if (s == "csv") return TableFormat::csv;
  throw UsageError("unknown table format '" + std::string(s) + "'");
}

inline std::string render_table(const FfciReport& report, TableFormat format) {
  std::ostringstream out;
  if (format == TableFormat::csv) {
    out << "system";
    for (const auto& c : report.columns) out << ',' << c;
    out << '\n';
    for (const auto& row : report.rows) {
      out << row.system_name;
      for (const auto& v : row.values) out << ',' << format_cell(v);
      out << '\n';
    }
    return out.str();
  }
  out << "| System |";
  for (const auto& c : report.columns) out << ' ' << c << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < report.columns.size(); ++i) out << "---:|";
  out << '\n';
  for (const auto& row : report.rows) {
    out << "| " << row.system_name << " |";
    for (const auto& v : row.values) out << ' ' << format_cell(v) << " |";
    out << '\n';
  }
  return out.str();
}

inline nlohmann::json to_json(const FfciReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json values = nlohmann::json::object();
    for (std::size_t i = 0; i < r.columns.size(); ++i)
      values[r.columns[i]] = row.values[i] ? nlohmann::json(*row.values[i])
                                           : nlohmann::json(nullptr);
    rows.push_back({{"system", row.system_name},
                    {"instances", row.instances},
                    {"scores", values}});
  }
  return {{"columns", r.columns},
          {"rows", rows},
          {"metadata", r.metadata},
          {"warnings", r.warnings}};
}

inline FfciReport report_from_json(const nlohmann::json& j) {
  FfciReport r;
  try {
    r.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& row : j.at("rows")) {
      ReportRow rr;
      rr.system_name = row.at("system").get<std::string>();
      rr.instances = row.at("instances").get<std::size_t>();
      for (const auto& c : r.columns) {
        const auto& v = row.at("scores").at(c);
        rr.values.push_back(v.is_null() ? std::nullopt
                                        : std::optional<double>(v.get<double>()));
      }
      r.rows.push_back(std::move(rr));
    }
    if (j.contains("metadata")) r.metadata = j["metadata"];
    if (j.contains("warnings"))
      r.warnings = j["warnings"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("malformed report: ") + ex.what());
  }
  return r;
}

// Plot data for one model's layer curve: header "kind,layer,<pair ids>",
// one "data" row per layer, then a "selected" row for the layer chosen by
// average rank within the model.
inline std::string emit_layer_curve(const CorrelationTable& table,
                                    const std::string& model_id) {
  auto slice = table.for_model(model_id);
  if (slice.empty())
    throw DataError("no correlations for model '" + model_id + "'");
  const auto pairs = slice.pair_ids();
  std::set<int> layers;
  for (const auto& c : slice.candidates()) layers.insert(c.layer);
  const auto selected = select_by_average_rank(slice);

  auto row = [&](const char* kind, int layer) {
    std::ostringstream out;
    out << kind << ',' << layer;
    for (const auto& p : pairs) {
      out << ',';
      if (auto v = slice.get(model_id, layer, p)) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", *v);
        out << buf;
      }
    }
    out << '\n';
    return out.str();
  };

  std::ostringstream out;
  out << "kind,layer";
  for (const auto& p : pairs) out << ',' << p;
  out << '\n';
  for (int layer : layers) out << row("data", layer);
  out << row("selected", selected.layer);
  return out.str();
}

}  // namespace ffci
