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
#include <stdexcept>
#include <string>
#include <vector>

#include "dpbench/random.hpp"

namespace dpbench {

/// The (epsilon, delta) budget a mechanism may spend. delta = 0 denotes
/// pure epsilon-DP.
struct PrivacyParams {
  double epsilon = 0.0;
  double delta = 0.0;

  PrivacyParams() = default;
  PrivacyParams(double eps, double del) : epsilon(eps), delta(del) {
    if (!(epsilon > 0.0)) {
      throw std::invalid_argument("PrivacyParams: epsilon must be positive");
    }
    if (!(delta >= 0.0) || delta >= 1.0) {
      throw std::invalid_argument("PrivacyParams: delta must be in [0, 1)");
    }
  }
};

class BudgetExhaustedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tracks basic sequential composition: spent epsilon/delta sums must stay
/// within the total. A charge either lands in full or not at all.
class BudgetLedger {
 public:
  struct Entry {
    std::string label;
    double epsilon;
    double delta;
  };

  explicit BudgetLedger(PrivacyParams total) : total_(total) {}

  void charge(const std::string& label, double epsilon, double delta) {
    if (!(epsilon >= 0.0) || !(delta >= 0.0)) {
      throw std::invalid_argument("BudgetLedger: negative charge");
    }
    // Tiny relative slack absorbs rounding from split budgets.
    const double tol = 1e-12;
    if (spent_epsilon_ + epsilon > total_.epsilon * (1.0 + tol) ||
        spent_delta_ + delta > total_.delta + total_.epsilon * tol) {
      throw BudgetExhaustedError(
          "budget exhausted: charge '" + label + "' of epsilon=" +
          std::to_string(epsilon) + " exceeds remaining budget");
    }
    spent_epsilon_ += epsilon;
    spent_delta_ += delta;
    entries_.push_back({label, epsilon, delta});
  }

  double remaining_epsilon() const { return total_.epsilon - spent_epsilon_; }
  double spent_epsilon() const { return spent_epsilon_; }
  double spent_delta() const { return spent_delta_; }
  const PrivacyParams& total() const { return total_; }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  PrivacyParams total_;
  double spent_epsilon_ = 0.0;
  double spent_delta_ = 0.0;
  std::vector<Entry> entries_;
};

enum class NoiseFamily { kLaplace, kGaussian };

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::kLaplace;
  double scale = 0.0;  // Laplace b, or Gaussian sigma

  NoiseSpec() = default;
  NoiseSpec(NoiseFamily f, double s) : family(f), scale(s) {
    if (!(scale > 0.0)) {
      throw std::invalid_argument("NoiseSpec: scale must be positive");
    }
  }
};

inline double clamp(double value, double lower, double upper) {
  if (lower > upper) {
    throw std::invalid_argument("clamp: lower bound exceeds upper bound");
  }
  return std::min(std::max(value, lower), upper);
}

/// Pure-epsilon Laplace mechanism: true_value + Laplace(sensitivity / eps).
/// Records the spend against the ledger before drawing noise.
inline double laplace_mechanism(double true_value, double sensitivity,
                                const PrivacyParams& budget,
                                BudgetLedger& ledger, NoiseSource& noise,
                                const std::string& label = "laplace") {
  if (!(sensitivity > 0.0)) {
    throw std::invalid_argument(
        "laplace_mechanism: sensitivity must be positive");
  }
  if (budget.delta != 0.0) {
    throw std::invalid_argument(
        "laplace_mechanism: requires a pure-epsilon budget (delta = 0)");
  }
  ledger.charge(label, budget.epsilon, 0.0);
  return true_value + noise.laplace(sensitivity / budget.epsilon);
}

}  // namespace dpbench
