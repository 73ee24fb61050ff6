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

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpbench/dataset.hpp"
#include "dpbench/mechanisms.hpp"
#include "dpbench/random.hpp"

namespace dpbench {

struct SgdConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
};

/// DP-SGD knobs: per-sample gradients are clipped to clip_norm (C) and the
/// summed batch gradient gets Gaussian noise of stdev noise_multiplier * C
/// per coordinate. noise_multiplier = 0 disables the noise; target is then
/// advisory only.
struct DpSgdParams {
  double clip_norm = 1.0;
  double noise_multiplier = 0.0;
  PrivacyParams target;
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
};

class TrainingDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gradient of 0.5*(w.x + b - y)^2 w.r.t. (w, b): residual * (x, 1).
/// The last entry is the bias component.
inline std::vector<double> per_sample_gradient(const LinearModel& model,
                                               const std::vector<double>& x,
                                               double y) {
  if (x.size() != model.weights.size()) {
    throw std::invalid_argument("per_sample_gradient: dimension mismatch");
  }
  double pred = model.bias;
  for (std::size_t i = 0; i < x.size(); ++i) pred += model.weights[i] * x[i];
  const double residual = pred - y;
  std::vector<double> grad(x.size() + 1);
  for (std::size_t i = 0; i < x.size(); ++i) grad[i] = residual * x[i];
  grad[x.size()] = residual;
  return grad;
}

/// Scales g to L2 norm at most clip_norm; vectors already inside the ball
/// (including the zero vector) pass through unchanged.
inline std::vector<double> clip_l2(std::vector<double> g, double clip_norm) {
  if (!(clip_norm > 0.0)) {
    throw std::invalid_argument("clip_l2: clip_norm must be positive");
  }
  double norm_sq = 0.0;
  for (double v : g) norm_sq += v * v;
  const double norm = std::sqrt(norm_sq);
  if (norm <= clip_norm) return g;
  const double factor = clip_norm / norm;
  for (double& v : g) v *= factor;
  return g;
}

/// Feature matrix (standardized to [-1, 1] via metadata bounds, never via
/// data statistics) and target vector for a regression dataset.
struct RegressionView {
  std::vector<std::vector<double>> features;
  std::vector<double> targets;
};

inline RegressionView regression_view(const Dataset& d) {
  if (!d.target()) {
    throw std::invalid_argument("regression_view: dataset has no target");
  }
  const std::size_t target_col = d.column_index(*d.target());
  if (d.columns()[target_col].kind != ColumnKind::kContinuous) {
    throw std::invalid_argument("regression_view: target must be continuous");
  }
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < d.columns().size(); ++c) {
    if (c != target_col && d.columns()[c].kind == ColumnKind::kContinuous) {
      feature_cols.push_back(c);
    }
  }
  if (feature_cols.empty()) {
    throw std::invalid_argument("regression_view: no continuous features");
  }
  RegressionView view;
  view.features.reserve(d.size());
  view.targets.reserve(d.size());
  for (std::size_t r = 0; r < d.size(); ++r) {
    std::vector<double> x;
    x.reserve(feature_cols.size());
    for (std::size_t c : feature_cols) {
      const auto& meta = d.columns()[c];
      x.push_back(2.0 * (d.numeric_at(r, c) - meta.lower) /
                      (meta.upper - meta.lower) -
                  1.0);
    }
    view.features.push_back(std::move(x));
    view.targets.push_back(d.numeric_at(r, target_col));
  }
  return view;
}

namespace detail {

/// Shared SGD loop for the DP and NP twins. Poisson subsampling at rate
/// q = batch_size/n from a seeded stream, so both twins draw the same
/// batch schedule; noise draws happen only when noise_multiplier > 0, which
/// keeps the stream identical when the DP machinery is switched off.
inline LinearModel train_sgd(const RegressionView& data, const SgdConfig& cfg,
                             const std::optional<DpSgdParams>& dp) {
  const std::size_t n = data.features.size();
  if (n == 0) {
    throw std::invalid_argument("train_sgd: empty training set");
  }
  if (cfg.batch_size == 0 || cfg.batch_size > n) {
    throw std::invalid_argument("train_sgd: batch_size must be in [1, n]");
  }
  if (cfg.epochs < 1) {
    throw std::invalid_argument("train_sgd: epochs must be >= 1");
  }
  const std::size_t dim = data.features[0].size();
  const double q = static_cast<double>(cfg.batch_size) /
                   static_cast<double>(n);
  const std::size_t steps = cfg.epochs * std::max<std::size_t>(1, n / cfg.batch_size);

  LinearModel model;
  model.weights.assign(dim, 0.0);
  RandomStream rng(cfg.seed);
  std::vector<double> grad_sum(dim + 1);

  for (std::size_t step = 0; step < steps; ++step) {
    std::fill(grad_sum.begin(), grad_sum.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.uniform01() >= q) continue;
      auto g = per_sample_gradient(model, data.features[i], data.targets[i]);
      if (dp) g = clip_l2(std::move(g), dp->clip_norm);
      for (std::size_t j = 0; j <= dim; ++j) grad_sum[j] += g[j];
    }
    if (dp && dp->noise_multiplier > 0.0) {
      const double stdev = dp->noise_multiplier * dp->clip_norm;
      for (std::size_t j = 0; j <= dim; ++j) {
        grad_sum[j] += gaussian_sample(stdev, rng);
      }
    }
    const double scale = cfg.learning_rate / static_cast<double>(cfg.batch_size);
    for (std::size_t j = 0; j < dim; ++j) model.weights[j] -= scale * grad_sum[j];
    model.bias -= scale * grad_sum[dim];

    for (double w : model.weights) {
      if (!std::isfinite(w)) {
        throw TrainingDivergedError("training diverged at step " +
                                    std::to_string(step));
      }
    }
    if (!std::isfinite(model.bias)) {
      throw TrainingDivergedError("training diverged at step " +
                                  std::to_string(step));
    }
  }
  return model;
}

}  // namespace detail

inline LinearModel dp_sgd_train(const Dataset& train, const SgdConfig& cfg,
                                const DpSgdParams& dp) {
  return detail::train_sgd(regression_view(train), cfg, dp);
}

inline LinearModel np_sgd_train(const Dataset& train, const SgdConfig& cfg) {
  return detail::train_sgd(regression_view(train), cfg, std::nullopt);
}

inline double predict(const LinearModel& model, const std::vector<double>& x) {
  double pred = model.bias;
  for (std::size_t i = 0; i < x.size(); ++i) pred += model.weights[i] * x[i];
  return pred;
}

/// Root mean squared prediction error on a held-out set.
inline double test_rmse(const LinearModel& model, const Dataset& test) {
  if (test.size() == 0) {
    throw std::invalid_argument("test_rmse: empty test set");
  }
  const auto view = regression_view(test);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < view.features.size(); ++i) {
    const double err = predict(model, view.features[i]) - view.targets[i];
    sum_sq += err * err;
  }
  return std::sqrt(sum_sq / static_cast<double>(view.features.size()));
}

}  // namespace dpbench
