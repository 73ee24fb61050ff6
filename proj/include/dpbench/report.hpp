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
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "dpbench/harness.hpp"
#include "dpbench/metrics.hpp"

namespace dpbench {

/// One (task, epsilon, size) cell of the sweep. NaN percentages mean the
/// metric could not be computed for the cell; `usable` mirrors the paper's
/// blank contour regions (too few surviving repetitions).
struct MetricSummary {
  std::string task;
  double epsilon = 0.0;
  std::size_t size = 0;
  double utility_rmspe = std::numeric_limits<double>::quiet_NaN();
  double runtime_rmspe = std::numeric_limits<double>::quiet_NaN();
  double memory_delta = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  std::size_t n_used = 0;  // repetitions surviving the trim
  bool usable = false;
};

enum class Metric { kUtility, kRuntime, kMemory };
enum class PlotShape { kGrid, kLines };

inline Metric metric_from_string(const std::string& s) {
  if (s == "utility") return Metric::kUtility;
  if (s == "runtime") return Metric::kRuntime;
  if (s == "memory") return Metric::kMemory;
  throw std::invalid_argument("unknown metric '" + s + "'");
}

inline PlotShape plot_shape_from_string(const std::string& s) {
  if (s == "grid") return PlotShape::kGrid;
  if (s == "lines") return PlotShape::kLines;
  throw std::invalid_argument("unknown plot shape '" + s + "'");
}

namespace detail {

struct CellData {
  std::vector<const RunRecord*> ok;
  std::size_t n_failed = 0;
};

/// Per-repetition signed error used to rank repetitions for trimming.
/// Scalars use dp - np; histograms use the mean per-bin dp - np.
inline double rep_error(const RunRecord& r) {
  if (r.np_value && r.dp_value) return *r.dp_value - *r.np_value;
  if (r.np_bins && r.dp_bins) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [label, np] : *r.np_bins) {
      sum += r.dp_bins->at(label) - np;
      ++n;
    }
    return n > 0 ? sum / static_cast<double>(n) : 0.0;
  }
  return 0.0;
}

/// Eq.-1 pairs for one repetition: one per scalar, one per histogram bin.
/// Pairs with a zero NP value are excluded (the ratio is undefined).
inline void append_pairs(const RunRecord& r, std::vector<PairedSample>& out) {
  if (r.np_value && r.dp_value) {
    if (*r.np_value != 0.0) out.push_back({*r.np_value, *r.dp_value});
    return;
  }
  if (r.np_bins && r.dp_bins) {
    for (const auto& [label, np] : *r.np_bins) {
      if (np != 0.0) out.push_back({np, r.dp_bins->at(label)});
    }
  }
}

}  // namespace detail

/// Groups records by (task, epsilon, size) and applies the paper's
/// trim-then-average protocol: the repetition with the smallest and the
/// repetition with the largest DP - NP error are dropped from each tail
/// before the RMSPE; memory uses the worst-case peak on each side.
inline std::vector<MetricSummary> aggregate(
    const std::vector<RunRecord>& records, std::size_t trim = 1) {
  std::map<std::tuple<std::string, double, std::size_t>, detail::CellData>
      cells;
  for (const auto& r : records) {
    auto& cell = cells[{r.task, r.epsilon, r.size}];
    if (r.status == RunStatus::kOk) {
      cell.ok.push_back(&r);
    } else {
      ++cell.n_failed;
    }
  }

  std::vector<MetricSummary> summaries;
  summaries.reserve(cells.size());
  for (const auto& [key, cell] : cells) {
    MetricSummary s;
    s.task = std::get<0>(key);
    s.epsilon = std::get<1>(key);
    s.size = std::get<2>(key);
    s.n_ok = cell.ok.size();
    s.n_failed = cell.n_failed;
    s.usable = s.n_ok > 2 * trim;
    if (!s.usable) {
      summaries.push_back(std::move(s));
      continue;
    }

    // Utility: trim whole repetitions by signed error, then Eq. 1 over the
    // survivors' pairs.
    std::vector<double> errors;
    errors.reserve(cell.ok.size());
    for (const auto* r : cell.ok) errors.push_back(detail::rep_error(*r));
    const auto keep = surviving_indices(errors, trim, trim);
    s.n_used = keep.size();
    std::vector<PairedSample> utility_pairs;
    for (std::size_t i : keep) detail::append_pairs(*cell.ok[i], utility_pairs);
    if (!utility_pairs.empty()) s.utility_rmspe = rmspe(utility_pairs);

    // Runtime: same protocol with NP/DP durations as the pairs.
    std::vector<double> time_errors;
    std::vector<PairedSample> time_pairs_all;
    for (const auto* r : cell.ok) {
      time_errors.push_back(static_cast<double>(r->dp_time_ns) -
                            static_cast<double>(r->np_time_ns));
      time_pairs_all.push_back({static_cast<double>(r->np_time_ns),
                                static_cast<double>(r->dp_time_ns)});
    }
    const auto keep_time = surviving_indices(time_errors, trim, trim);
    std::vector<PairedSample> time_pairs;
    for (std::size_t i : keep_time) {
      if (time_pairs_all[i].np_value > 0.0) {
        time_pairs.push_back(time_pairs_all[i]);
      }
    }
    if (!time_pairs.empty()) s.runtime_rmspe = rmspe(time_pairs);

    // Memory: worst-case peak on each side across repetitions.
    double np_peak = -1.0, dp_peak = -1.0;
    for (const auto* r : cell.ok) {
      if (r->np_peak_bytes && r->dp_peak_bytes) {
        np_peak = std::max(np_peak, static_cast<double>(*r->np_peak_bytes));
        dp_peak = std::max(dp_peak, static_cast<double>(*r->dp_peak_bytes));
      }
    }
    if (np_peak > 0.0) {
      s.memory_delta = overhead_percent(dp_peak, np_peak);
    } else if (np_peak == 0.0 && dp_peak == 0.0) {
      s.memory_delta = 0.0;  // both peaks below probe resolution
    }
    summaries.push_back(std::move(s));
  }
  return summaries;
}

// ---------------------------------------------------------------------------
// Summary persistence (line-delimited, mirrors the records file)

inline nlohmann::json summary_to_json(const MetricSummary& s) {
  nlohmann::json j;
  j["v"] = RunRecord::kSchemaVersion;
  j["task"] = s.task;
  j["epsilon"] = s.epsilon;
  j["size"] = s.size;
  if (std::isfinite(s.utility_rmspe)) j["utility_rmspe"] = s.utility_rmspe;
  if (std::isfinite(s.runtime_rmspe)) j["runtime_rmspe"] = s.runtime_rmspe;
  if (std::isfinite(s.memory_delta)) j["memory_delta"] = s.memory_delta;
  j["n_ok"] = s.n_ok;
  j["n_failed"] = s.n_failed;
  j["n_used"] = s.n_used;
  j["usable"] = s.usable;
  return j;
}

inline MetricSummary summary_from_json(const nlohmann::json& j) {
  MetricSummary s;
  s.task = j.at("task");
  s.epsilon = j.at("epsilon");
  s.size = j.at("size");
  if (j.contains("utility_rmspe")) s.utility_rmspe = j.at("utility_rmspe");
  if (j.contains("runtime_rmspe")) s.runtime_rmspe = j.at("runtime_rmspe");
  if (j.contains("memory_delta")) s.memory_delta = j.at("memory_delta");
  s.n_ok = j.at("n_ok");
  s.n_failed = j.at("n_failed");
  s.n_used = j.at("n_used");
  s.usable = j.at("usable");
  return s;
}

inline void persist_summaries(const std::vector<MetricSummary>& summaries,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("persist_summaries: cannot write '" + path + "'");
  }
  for (const auto& s : summaries) out << summary_to_json(s).dump() << '\n';
}

inline std::vector<MetricSummary> load_summaries(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_summaries: cannot open '" + path + "'");
  }
  std::vector<MetricSummary> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(summary_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("load_summaries: malformed line " +
                               std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Plot data

inline constexpr const char* kUnusableMarker = "unusable";

namespace detail {

inline double metric_value(const MetricSummary& s, Metric metric) {
  switch (metric) {
    case Metric::kUtility: return s.utility_rmspe;
    case Metric::kRuntime: return s.runtime_rmspe;
    case Metric::kMemory: return s.memory_delta;
  }
  throw std::logic_error("unknown Metric");
}

inline std::string format_cell(const MetricSummary& s, Metric metric) {
  const double v = metric_value(s, metric);
  if (!s.usable || !std::isfinite(v)) return kUnusableMarker;
  std::ostringstream ss;
  ss << std::setprecision(12) << v;
  return ss.str();
}

}  // namespace detail

/// Writes plot-ready delimited text. Grid shape: one (task, epsilon, size,
/// value) row per cell, epsilon then size ascending; lines shape: one series
/// per (task, size) with one column per epsilon. Unusable cells carry an
/// explicit marker, never an empty field.
inline void emit_plot_data(const std::vector<MetricSummary>& summaries,
                           Metric metric, PlotShape shape,
                           const std::string& path) {
  if (summaries.empty()) {
    throw std::invalid_argument("emit_plot_data: no summaries");
  }
  auto sorted = summaries;
  std::sort(sorted.begin(), sorted.end(),
            [](const MetricSummary& a, const MetricSummary& b) {
              return std::tie(a.task, a.epsilon, a.size) <
                     std::tie(b.task, b.epsilon, b.size);
            });

  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("emit_plot_data: cannot write '" + path + "'");
  }
  if (shape == PlotShape::kGrid) {
    out << "task\tepsilon\tsize\tvalue\n";
    for (const auto& s : sorted) {
      out << s.task << '\t' << s.epsilon << '\t' << s.size << '\t'
          << detail::format_cell(s, metric) << '\n';
    }
  } else {
    std::set<double> eps_set;
    for (const auto& s : sorted) eps_set.insert(s.epsilon);
    out << "task\tsize";
    for (double e : eps_set) out << "\teps=" << e;
    out << '\n';
    std::map<std::pair<std::string, std::size_t>,
             std::map<double, std::string>>
        series;
    for (const auto& s : sorted) {
      series[{s.task, s.size}][s.epsilon] = detail::format_cell(s, metric);
    }
    for (const auto& [key, by_eps] : series) {
      out << key.first << '\t' << key.second;
      for (double e : eps_set) {
        auto it = by_eps.find(e);
        out << '\t' << (it == by_eps.end() ? kUnusableMarker : it->second);
      }
      out << '\n';
    }
  }
  if (!out) {
    throw std::runtime_error("emit_plot_data: write failed for '" + path +
                             "'");
  }
}

}  // namespace dpbench
