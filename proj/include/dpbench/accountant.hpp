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
#include <stdexcept>
#include <string>
#include <vector>

#include "dpbench/mechanisms.hpp"

namespace dpbench {

/// Renyi-DP guarantee per order: values[i] is the RDP epsilon at
/// orders[i].
struct RdpCurve {
  std::vector<double> orders;
  std::vector<double> values;
};

inline std::vector<double> default_rdp_orders() {
  std::vector<double> orders;
  for (int a = 2; a <= 128; ++a) orders.push_back(static_cast<double>(a));
  return orders;
}

namespace detail {

/// Log of one binomial term of the integer-order subsampled-Gaussian
/// moment bound: C(alpha,k) (1-q)^(alpha-k) q^k exp(k(k-1)/(2 sigma^2)).
inline double log_binomial_term(int alpha, int k, double q, double sigma) {
  double log_comb = std::lgamma(alpha + 1.0) - std::lgamma(k + 1.0) -
                    std::lgamma(alpha - k + 1.0);
  double term = log_comb + k * std::log(q) +
                static_cast<double>(k) * (k - 1) / (2.0 * sigma * sigma);
  if (k < alpha) {
    if (q >= 1.0) return -std::numeric_limits<double>::infinity();
    term += (alpha - k) * std::log1p(-q);
  }
  return term;
}

inline double log_sum_exp(const std::vector<double>& logs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : logs) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : logs) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace detail

/// RDP of `steps` compositions of the Poisson-subsampled Gaussian
/// mechanism at sampling rate q, via the integer-order binomial-expansion
/// bound. Per-order values add across steps.
inline RdpCurve rdp_subsampled_gaussian(double sigma, double q,
                                        std::size_t steps,
                                        const std::vector<double>& orders) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("rdp: sigma must be positive");
  }
  if (!(q > 0.0) || q > 1.0) {
    throw std::invalid_argument("rdp: sampling rate q must be in (0, 1]");
  }
  if (orders.empty()) {
    throw std::invalid_argument("rdp: empty order list");
  }
  RdpCurve curve;
  curve.orders = orders;
  curve.values.reserve(orders.size());
  for (double order : orders) {
    const int alpha = static_cast<int>(order);
    if (order != alpha || alpha < 2) {
      throw std::invalid_argument("rdp: orders must be integers >= 2, got " +
                                  std::to_string(order));
    }
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(alpha) + 1);
    for (int k = 0; k <= alpha; ++k) {
      terms.push_back(detail::log_binomial_term(alpha, k, q, sigma));
    }
    const double one_step = detail::log_sum_exp(terms) / (order - 1.0);
    curve.values.push_back(std::max(0.0, one_step) *
                           static_cast<double>(steps));
  }
  return curve;
}

/// Standard RDP -> (epsilon, delta) conversion:
/// min over orders of RDP(alpha) + log(1/delta)/(alpha - 1).
inline double rdp_to_epsilon(const RdpCurve& curve, double delta) {
  if (curve.orders.empty() || curve.orders.size() != curve.values.size()) {
    throw std::invalid_argument("rdp_to_epsilon: empty or ragged curve");
  }
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("rdp_to_epsilon: delta must be in (0, 1)");
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curve.orders.size(); ++i) {
    best = std::min(best, curve.values[i] +
                              std::log(1.0 / delta) / (curve.orders[i] - 1.0));
  }
  return best;
}

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Smallest noise multiplier sigma in [0.3, 100] whose accounted epsilon
/// lands in [target*(1-tol), target], by bisection on the monotone
/// epsilon(sigma) map.
inline double calibrate_sigma(const PrivacyParams& target, double q,
                              std::size_t steps,
                              const std::vector<double>& orders =
                                  default_rdp_orders(),
                              double tol = 1e-2) {
  if (!(target.delta > 0.0)) {
    throw std::invalid_argument("calibrate_sigma: delta must be in (0, 1)");
  }
  auto accounted = [&](double sigma) {
    return rdp_to_epsilon(rdp_subsampled_gaussian(sigma, q, steps, orders),
                          target.delta);
  };
  double lo = 0.3, hi = 100.0;
  const double eps_lo = accounted(lo);   // most epsilon (least noise)
  const double eps_hi = accounted(hi);   // least epsilon
  if (eps_hi > target.epsilon || eps_lo < target.epsilon * (1.0 - tol)) {
    throw CalibrationError(
        "calibrate_sigma: target epsilon " + std::to_string(target.epsilon) +
        " unreachable in sigma bracket [0.3, 100]; achieved epsilon " +
        std::to_string(eps_lo) + " at sigma=0.3 and " +
        std::to_string(eps_hi) + " at sigma=100");
  }
  if (eps_lo <= target.epsilon) return lo;
  // Invariant: accounted(lo) > target >= accounted(hi).
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double eps_mid = accounted(mid);
    if (eps_mid > target.epsilon) {
      lo = mid;
    } else {
      hi = mid;
      if (eps_mid >= target.epsilon * (1.0 - tol)) return hi;
    }
  }
  return hi;
}

}  // namespace dpbench
