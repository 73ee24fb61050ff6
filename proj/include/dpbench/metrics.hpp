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
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpbench {

/// One paired repetition: the noiseless baseline value and its private
/// counterpart.
struct PairedSample {
  double np_value = 0.0;
  double dp_value = 0.0;
};

/// Root mean square percentage error between paired baseline and private
/// results: sqrt(mean(((NP - DP)/NP)^2)) * 100.
inline double rmspe(const std::vector<PairedSample>& pairs) {
  if (pairs.empty()) {
    throw std::invalid_argument("rmspe: empty pair list");
  }
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].np_value == 0.0) {
      throw std::invalid_argument("rmspe: zero NP value at index " +
                                  std::to_string(i));
    }
    const double rel = (pairs[i].np_value - pairs[i].dp_value) /
                       pairs[i].np_value;
    sum_sq += rel * rel;
  }
  return std::sqrt(sum_sq / static_cast<double>(pairs.size())) * 100.0;
}

/// Indices that survive dropping the k_low smallest and k_high largest
/// entries of `keys`, in their original order. Ties break by index.
inline std::vector<std::size_t> surviving_indices(
    const std::vector<double>& keys, std::size_t k_low, std::size_t k_high) {
  if (keys.size() <= k_low + k_high) {
    throw std::invalid_argument(
        "trim: need more than " + std::to_string(k_low + k_high) +
        " values, got " + std::to_string(keys.size()));
  }
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return keys[a] < keys[b];
                   });
  std::vector<bool> drop(keys.size(), false);
  for (std::size_t i = 0; i < k_low; ++i) drop[order[i]] = true;
  for (std::size_t i = 0; i < k_high; ++i) {
    drop[order[order.size() - 1 - i]] = true;
  }
  std::vector<std::size_t> survivors;
  survivors.reserve(keys.size() - k_low - k_high);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!drop[i]) survivors.push_back(i);
  }
  return survivors;
}

/// Trim-then-average protocol: drop the k_low smallest and k_high largest
/// values (the per-run DP - NP errors), preserving the order of survivors.
inline std::vector<double> trim_extremes(const std::vector<double>& values,
                                         std::size_t k_low,
                                         std::size_t k_high) {
  const auto keep = surviving_indices(values, k_low, k_high);
  std::vector<double> out;
  out.reserve(keep.size());
  for (std::size_t i : keep) out.push_back(values[i]);
  return out;
}

/// Percent change of the private peak over the baseline peak; negative
/// values are allowed.
inline double overhead_percent(double dp_peak, double np_peak) {
  if (!(np_peak > 0.0)) {
    throw std::invalid_argument("overhead_percent: NP peak must be positive");
  }
  if (!(dp_peak >= 0.0)) {
    throw std::invalid_argument("overhead_percent: DP peak must be >= 0");
  }
  return (dp_peak - np_peak) / np_peak * 100.0;
}

}  // namespace dpbench
