// Copyright 2026 the dpbench authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "dpbench/dataset.hpp"

namespace dpbench {

struct DatasetMeta {
  std::vector<ColumnMeta> columns;
  std::optional<std::string> target;
};

/// Column metadata document: {"columns": [...], "target": "name"}.
/// Each column object carries name/kind plus bounds (continuous) or
/// categories (categorical). Unknown fields are rejected.
inline DatasetMeta meta_from_json(const nlohmann::json& j) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "columns" && key != "target") {
      throw std::runtime_error("metadata: unknown field '" + key + "'");
    }
  }
  DatasetMeta meta;
  for (const auto& jc : j.at("columns")) {
    const std::string name = jc.at("name");
    const std::string kind = jc.at("kind");
    if (kind == "continuous") {
      for (const auto& [key, value] : jc.items()) {
        (void)value;
        if (key != "name" && key != "kind" && key != "lower" &&
            key != "upper") {
          throw std::runtime_error("metadata: unknown field '" + key +
                                   "' in continuous column '" + name + "'");
        }
      }
      meta.columns.push_back(
          ColumnMeta::continuous(name, jc.at("lower"), jc.at("upper")));
    } else if (kind == "categorical") {
      for (const auto& [key, value] : jc.items()) {
        (void)value;
        if (key != "name" && key != "kind" && key != "categories") {
          throw std::runtime_error("metadata: unknown field '" + key +
                                   "' in categorical column '" + name + "'");
        }
      }
      meta.columns.push_back(ColumnMeta::categorical(
          name, jc.at("categories").get<std::vector<std::string>>()));
    } else {
      throw std::runtime_error("metadata: column '" + name +
                               "' has unknown kind '" + kind + "'");
    }
  }
  if (j.contains("target")) meta.target = j.at("target").get<std::string>();
  return meta;
}

inline DatasetMeta load_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_meta: cannot open '" + path + "'");
  }
  nlohmann::json j;
  in >> j;
  return meta_from_json(j);
}

/// Writes a dataset back out as CSV + metadata, used by the synthetic
/// generator CLI path.
inline void save_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_csv: cannot write '" + path + "'");
  }
  for (std::size_t c = 0; c < d.columns().size(); ++c) {
    out << (c ? "," : "") << d.columns()[c].name;
  }
  out << '\n';
  out.precision(17);
  for (const auto& row : d.rows()) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      if (std::holds_alternative<double>(row[c])) {
        out << std::get<double>(row[c]);
      } else {
        out << std::get<std::string>(row[c]);
      }
    }
    out << '\n';
  }
}

inline void save_meta(const Dataset& d, const std::string& path) {
  nlohmann::json j;
  j["columns"] = nlohmann::json::array();
  for (const auto& c : d.columns()) {
    nlohmann::json jc;
    jc["name"] = c.name;
    if (c.kind == ColumnKind::kContinuous) {
      jc["kind"] = "continuous";
      jc["lower"] = c.lower;
      jc["upper"] = c.upper;
    } else {
      jc["kind"] = "categorical";
      jc["categories"] = c.categories;
    }
    j["columns"].push_back(jc);
  }
  if (d.target()) j["target"] = *d.target();
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_meta: cannot write '" + path + "'");
  }
  out << j.dump(2) << '\n';
}

}  // namespace dpbench
