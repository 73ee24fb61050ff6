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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "dpbench/mechanisms.hpp"
#include "dpbench/random.hpp"

namespace dpbench {

enum class ColumnKind { kCategorical, kContinuous };

/// Per-column privacy metadata. Bounds and categories are public knowledge
/// supplied by the data owner, never computed from the data itself.
struct ColumnMeta {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
  double lower = 0.0;  // continuous only
  double upper = 0.0;  // continuous only
  std::vector<std::string> categories;  // categorical only

  static ColumnMeta continuous(std::string name, double lower, double upper) {
    ColumnMeta m;
    m.name = std::move(name);
    m.kind = ColumnKind::kContinuous;
    m.lower = lower;
    m.upper = upper;
    m.check();
    return m;
  }

  static ColumnMeta categorical(std::string name,
                                std::vector<std::string> categories) {
    ColumnMeta m;
    m.name = std::move(name);
    m.kind = ColumnKind::kCategorical;
    m.categories = std::move(categories);
    m.check();
    return m;
  }

  void check() const {
    if (name.empty()) {
      throw std::invalid_argument("ColumnMeta: empty column name");
    }
    if (kind == ColumnKind::kContinuous) {
      if (!(lower < upper)) {
        throw std::invalid_argument("ColumnMeta '" + name +
                                    "': requires lower < upper");
      }
      if (!categories.empty()) {
        throw std::invalid_argument("ColumnMeta '" + name +
                                    "': continuous column with categories");
      }
    } else {
      if (categories.empty()) {
        throw std::invalid_argument("ColumnMeta '" + name +
                                    "': categorical column needs categories");
      }
      std::unordered_set<std::string> seen(categories.begin(),
                                           categories.end());
      if (seen.size() != categories.size()) {
        throw std::invalid_argument("ColumnMeta '" + name +
                                    "': duplicate category labels");
      }
    }
  }
};

using Cell = std::variant<double, std::string>;
using Row = std::vector<Cell>;

/// An immutable table of typed columns. Rows are validated against the
/// column metadata at construction and never mutated afterwards.
class Dataset {
 public:
  Dataset(std::vector<ColumnMeta> columns, std::vector<Row> rows,
          std::optional<std::string> target = std::nullopt)
      : columns_(std::move(columns)),
        rows_(std::move(rows)),
        target_(std::move(target)) {
    for (const auto& c : columns_) c.check();
    if (target_ && !has_column(*target_)) {
      throw std::invalid_argument("Dataset: target column '" + *target_ +
                                  "' not found");
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      validate_row(rows_[r], r);
    }
  }

  std::size_t size() const { return rows_.size(); }
  const std::vector<ColumnMeta>& columns() const { return columns_; }
  const std::vector<Row>& rows() const { return rows_; }
  const std::optional<std::string>& target() const { return target_; }

  bool has_column(const std::string& name) const {
    return std::any_of(columns_.begin(), columns_.end(),
                       [&](const ColumnMeta& c) { return c.name == name; });
  }

  std::size_t column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (columns_[i].name == name) return i;
    }
    throw std::invalid_argument("Dataset: unknown column '" + name + "'");
  }

  const ColumnMeta& column_meta(const std::string& name) const {
    return columns_[column_index(name)];
  }

  double numeric_at(std::size_t row, std::size_t col) const {
    return std::get<double>(rows_[row][col]);
  }

  /// Zero if every cell satisfies its column metadata. Exposed so tests can
  /// re-check the construction invariant independently.
  std::size_t count_violations() const {
    std::size_t violations = 0;
    for (const auto& row : rows_) {
      if (row.size() != columns_.size()) {
        ++violations;
        continue;
      }
      for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (!cell_valid(row[c], columns_[c])) ++violations;
      }
    }
    return violations;
  }

  void validate_row(const Row& row, std::size_t row_index) const {
    if (row.size() != columns_.size()) {
      throw std::invalid_argument("Dataset: row " + std::to_string(row_index) +
                                  " has " + std::to_string(row.size()) +
                                  " cells, expected " +
                                  std::to_string(columns_.size()));
    }
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (!cell_valid(row[c], columns_[c])) {
        throw std::invalid_argument("Dataset: row " + std::to_string(row_index) +
                                    ", column '" + columns_[c].name +
                                    "': cell violates column metadata");
      }
    }
  }

 private:
  static bool cell_valid(const Cell& cell, const ColumnMeta& meta) {
    if (meta.kind == ColumnKind::kContinuous) {
      return std::holds_alternative<double>(cell) &&
             std::isfinite(std::get<double>(cell));
    }
    if (!std::holds_alternative<std::string>(cell)) return false;
    const auto& label = std::get<std::string>(cell);
    return std::find(meta.categories.begin(), meta.categories.end(), label) !=
           meta.categories.end();
  }

  std::vector<ColumnMeta> columns_;
  std::vector<Row> rows_;
  std::optional<std::string> target_;
};

/// Parses a comma-separated file whose header must match the metadata
/// column names exactly, in order.
inline Dataset load_csv(const std::string& path,
                        const std::vector<ColumnMeta>& meta,
                        std::optional<std::string> target = std::nullopt) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_csv: cannot open '" + path + "'");
  }
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  };

  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("load_csv: '" + path + "' is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() != meta.size()) {
    throw std::runtime_error("load_csv: header has " +
                             std::to_string(header.size()) +
                             " columns, metadata declares " +
                             std::to_string(meta.size()));
  }
  for (std::size_t i = 0; i < meta.size(); ++i) {
    if (header[i] != meta[i].name) {
      throw std::runtime_error("load_csv: header column " + std::to_string(i) +
                               " is '" + header[i] + "', expected '" +
                               meta[i].name + "'");
    }
  }

  std::vector<Row> rows;
  std::size_t line_no = 1;  // header was line 1
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != meta.size()) {
      throw std::runtime_error("load_csv: line " + std::to_string(line_no) +
                               " has " + std::to_string(fields.size()) +
                               " fields, expected " +
                               std::to_string(meta.size()));
    }
    Row row;
    row.reserve(meta.size());
    for (std::size_t c = 0; c < meta.size(); ++c) {
      if (meta[c].kind == ColumnKind::kContinuous) {
        try {
          std::size_t pos = 0;
          const double v = std::stod(fields[c], &pos);
          if (pos != fields[c].size()) throw std::invalid_argument("trailing");
          row.emplace_back(v);
        } catch (const std::exception&) {
          throw std::runtime_error("load_csv: line " + std::to_string(line_no) +
                                   ", column '" + meta[c].name +
                                   "': cannot parse '" + fields[c] +
                                   "' as a real number");
        }
      } else {
        const auto& cats = meta[c].categories;
        if (std::find(cats.begin(), cats.end(), fields[c]) == cats.end()) {
          throw std::runtime_error("load_csv: line " + std::to_string(line_no) +
                                   ", column '" + meta[c].name +
                                   "': unknown category label '" + fields[c] +
                                   "'");
        }
        row.emplace_back(fields[c]);
      }
    }
    rows.push_back(std::move(row));
  }
  return Dataset(meta, std::move(rows), std::move(target));
}

/// Uniform sample of n rows without replacement, deterministic under seed.
/// Surviving rows keep their original relative order.
inline Dataset subsample(const Dataset& d, std::size_t n, std::uint64_t seed) {
  if (n < 1 || n > d.size()) {
    throw std::invalid_argument("subsample: n=" + std::to_string(n) +
                                " out of range [1, " +
                                std::to_string(d.size()) + "]");
  }
  std::vector<std::size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  RandomStream rng(seed);
  // Partial Fisher-Yates: the first n slots are a uniform sample.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.next_u64() % (idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  std::vector<Row> rows;
  rows.reserve(n);
  for (std::size_t i : idx) rows.push_back(d.rows()[i]);
  return Dataset(d.columns(), std::move(rows), d.target());
}

/// Disjoint train/test partition with |train| = round(fraction * size).
inline std::pair<Dataset, Dataset> split(const Dataset& d,
                                         double train_fraction,
                                         std::uint64_t seed) {
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
    throw std::invalid_argument("split: train_fraction must be in (0, 1)");
  }
  std::vector<std::size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  RandomStream rng(seed);
  for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
    const std::size_t j = i + rng.next_u64() % (idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(d.size())));
  std::vector<Row> train_rows, test_rows;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    (i < n_train ? train_rows : test_rows).push_back(d.rows()[idx[i]]);
  }
  return {Dataset(d.columns(), std::move(train_rows), d.target()),
          Dataset(d.columns(), std::move(test_rows), d.target())};
}

enum class NeighborMode { kRemove, kAdd };

/// Neighboring dataset under the add/remove-one-record relation.
inline Dataset neighbor(const Dataset& d, NeighborMode mode,
                        std::size_t remove_index = 0,
                        const Row* add_row = nullptr) {
  std::vector<Row> rows = d.rows();
  if (mode == NeighborMode::kRemove) {
    if (remove_index >= rows.size()) {
      throw std::invalid_argument("neighbor: remove index " +
                                  std::to_string(remove_index) +
                                  " out of range");
    }
    rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(remove_index));
  } else {
    if (add_row == nullptr) {
      throw std::invalid_argument("neighbor: add mode requires a row");
    }
    rows.push_back(*add_row);  // validated by the Dataset constructor
  }
  return Dataset(d.columns(), std::move(rows), d.target());
}

/// Synthetic linear-regression data: features uniform on [-1, 1],
/// target = w.x + Gaussian(0, noise_std^2). The declared target bounds are
/// [-sum|w| - 6*noise_std, +sum|w| + 6*noise_std]; noise draws are clamped
/// to 6 sigma so every row satisfies its metadata.
inline Dataset synth_regression(std::size_t n, std::size_t d,
                                const std::vector<double>& weights,
                                double noise_std, std::uint64_t seed) {
  if (n == 0 || d == 0) {
    throw std::invalid_argument("synth_regression: n and d must be positive");
  }
  if (weights.size() != d) {
    throw std::invalid_argument(
        "synth_regression: |weights| must equal feature count");
  }
  if (!(noise_std >= 0.0)) {
    throw std::invalid_argument("synth_regression: noise_std must be >= 0");
  }
  double abs_w_sum = 0.0;
  for (double w : weights) abs_w_sum += std::abs(w);
  const double target_bound = abs_w_sum + 6.0 * noise_std;

  std::vector<ColumnMeta> columns;
  columns.reserve(d + 1);
  for (std::size_t i = 0; i < d; ++i) {
    columns.push_back(
        ColumnMeta::continuous("x" + std::to_string(i), -1.0, 1.0));
  }
  // Bounds must straddle zero even for the all-zero-weight noiseless case.
  columns.push_back(ColumnMeta::continuous(
      "y", -std::max(target_bound, 1e-9), std::max(target_bound, 1e-9)));

  RandomStream rng(seed);
  std::vector<Row> rows;
  rows.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    Row row;
    row.reserve(d + 1);
    double y = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double x = 2.0 * rng.uniform01() - 1.0;
      y += weights[i] * x;
      row.emplace_back(x);
    }
    if (noise_std > 0.0) {
      const double noise = noise_std * rng.standard_normal();
      y += clamp(noise, -6.0 * noise_std, 6.0 * noise_std);
    }
    row.emplace_back(y);
    rows.push_back(std::move(row));
  }
  return Dataset(std::move(columns), std::move(rows), "y");
}

}  // namespace dpbench
