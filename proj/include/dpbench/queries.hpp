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

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "dpbench/dataset.hpp"
#include "dpbench/mechanisms.hpp"

namespace dpbench {

enum class QueryKind { kSum, kCount, kAvg, kHistogram };

inline std::string to_string(QueryKind k) {
  switch (k) {
    case QueryKind::kSum: return "sum";
    case QueryKind::kCount: return "count";
    case QueryKind::kAvg: return "avg";
    case QueryKind::kHistogram: return "histogram";
  }
  throw std::logic_error("unknown QueryKind");
}

inline QueryKind query_kind_from_string(const std::string& s) {
  if (s == "sum") return QueryKind::kSum;
  if (s == "count") return QueryKind::kCount;
  if (s == "avg") return QueryKind::kAvg;
  if (s == "histogram") return QueryKind::kHistogram;
  throw std::invalid_argument("unknown query kind '" + s + "'");
}

struct QueryResult {
  QueryKind kind = QueryKind::kCount;
  std::optional<double> scalar;
  std::optional<std::map<std::string, double>> bins;
  double epsilon_spent = 0.0;
  double delta_spent = 0.0;
};

namespace detail {

inline const ColumnMeta& continuous_column(const Dataset& d,
                                           const std::string& column) {
  const auto& meta = d.column_meta(column);
  if (meta.kind != ColumnKind::kContinuous) {
    throw std::invalid_argument("query: column '" + column +
                                "' is not continuous");
  }
  return meta;
}

inline double clamped_sum(const Dataset& d, const std::string& column) {
  const auto& meta = continuous_column(d, column);
  const std::size_t col = d.column_index(column);
  double sum = 0.0;
  for (std::size_t r = 0; r < d.size(); ++r) {
    sum += clamp(d.numeric_at(r, col), meta.lower, meta.upper);
  }
  return sum;
}

inline std::map<std::string, double> true_histogram(const Dataset& d,
                                                    const std::string& column) {
  const auto& meta = d.column_meta(column);
  if (meta.kind != ColumnKind::kCategorical) {
    throw std::invalid_argument(
        "histogram: column '" + column +
        "' is continuous; histograms require categorical columns");
  }
  const std::size_t col = d.column_index(column);
  std::map<std::string, double> bins;
  for (const auto& label : meta.categories) bins[label] = 0.0;
  for (std::size_t r = 0; r < d.size(); ++r) {
    bins[std::get<std::string>(d.rows()[r][col])] += 1.0;
  }
  return bins;
}

}  // namespace detail

/// Exact (non-private) aggregate; spends no budget.
inline QueryResult np_query(QueryKind kind, const Dataset& d,
                            const std::string& column) {
  QueryResult res;
  res.kind = kind;
  switch (kind) {
    case QueryKind::kCount:
      d.column_index(column);  // column must exist
      res.scalar = static_cast<double>(d.size());
      break;
    case QueryKind::kSum:
      res.scalar = detail::clamped_sum(d, column);
      break;
    case QueryKind::kAvg: {
      detail::continuous_column(d, column);
      if (d.size() == 0) {
        throw std::invalid_argument("avg: empty dataset");
      }
      res.scalar =
          detail::clamped_sum(d, column) / static_cast<double>(d.size());
      break;
    }
    case QueryKind::kHistogram:
      res.bins = detail::true_histogram(d, column);
      break;
  }
  return res;
}

/// Noisy count, sensitivity 1.
inline QueryResult dp_count(const Dataset& d, const std::string& column,
                            const PrivacyParams& budget, BudgetLedger& ledger,
                            NoiseSource& noise) {
  d.column_index(column);
  QueryResult res;
  res.kind = QueryKind::kCount;
  res.scalar = laplace_mechanism(static_cast<double>(d.size()), 1.0, budget,
                                 ledger, noise, "count");
  res.epsilon_spent = budget.epsilon;
  return res;
}

/// Noisy sum over a bounded continuous column. Values are clamped to the
/// metadata bounds; sensitivity is max(|L|, |U|).
inline QueryResult dp_sum(const Dataset& d, const std::string& column,
                          const PrivacyParams& budget, BudgetLedger& ledger,
                          NoiseSource& noise) {
  const auto& meta = detail::continuous_column(d, column);
  const double sensitivity = std::max(std::abs(meta.lower),
                                      std::abs(meta.upper));
  QueryResult res;
  res.kind = QueryKind::kSum;
  res.scalar = laplace_mechanism(detail::clamped_sum(d, column), sensitivity,
                                 budget, ledger, noise, "sum");
  res.epsilon_spent = budget.epsilon;
  return res;
}

/// Noisy average: noisy clamped sum at eps/2 divided by a noisy count at
/// eps/2, denominator floored at 1.
inline QueryResult dp_avg(const Dataset& d, const std::string& column,
                          const PrivacyParams& budget, BudgetLedger& ledger,
                          NoiseSource& noise) {
  if (d.size() < 1) {
    throw std::invalid_argument("dp_avg: empty dataset");
  }
  const auto& meta = detail::continuous_column(d, column);
  const double sensitivity = std::max(std::abs(meta.lower),
                                      std::abs(meta.upper));
  const PrivacyParams half(budget.epsilon / 2.0, 0.0);
  const double noisy_sum =
      laplace_mechanism(detail::clamped_sum(d, column), sensitivity, half,
                        ledger, noise, "avg/sum");
  const double noisy_count = laplace_mechanism(
      static_cast<double>(d.size()), 1.0, half, ledger, noise, "avg/count");
  QueryResult res;
  res.kind = QueryKind::kAvg;
  res.scalar = noisy_sum / std::max(1.0, noisy_count);
  res.epsilon_spent = budget.epsilon;
  return res;
}

/// Noisy histogram over a categorical column. Bins are disjoint, so each
/// bin gets Laplace(1/eps) at the full budget (parallel composition) and
/// the ledger is charged once.
inline QueryResult dp_histogram(const Dataset& d, const std::string& column,
                                const PrivacyParams& budget,
                                BudgetLedger& ledger, NoiseSource& noise) {
  auto bins = detail::true_histogram(d, column);
  if (budget.delta != 0.0) {
    throw std::invalid_argument("dp_histogram: requires delta = 0");
  }
  ledger.charge("histogram", budget.epsilon, 0.0);
  for (auto& [label, count] : bins) {
    count += noise.laplace(1.0 / budget.epsilon);
  }
  QueryResult res;
  res.kind = QueryKind::kHistogram;
  res.bins = std::move(bins);
  res.epsilon_spent = budget.epsilon;
  return res;
}

/// Dispatch by kind; the DP twin of np_query.
inline QueryResult dp_query(QueryKind kind, const Dataset& d,
                            const std::string& column,
                            const PrivacyParams& budget, BudgetLedger& ledger,
                            NoiseSource& noise) {
  switch (kind) {
    case QueryKind::kCount: return dp_count(d, column, budget, ledger, noise);
    case QueryKind::kSum: return dp_sum(d, column, budget, ledger, noise);
    case QueryKind::kAvg: return dp_avg(d, column, budget, ledger, noise);
    case QueryKind::kHistogram:
      return dp_histogram(d, column, budget, ledger, noise);
  }
  throw std::logic_error("unknown QueryKind");
}

}  // namespace dpbench
