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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dpbench/mechanisms.hpp"
#include "dpbench/random.hpp"

using namespace dpbench;

TEST_CASE("laplace_sample matches the analytic distribution") {
  const double scale = 2.0;
  const std::size_t n = 1'000'000;
  RandomStream rng(12345);
  double sum = 0.0, sum_sq = 0.0;
  std::size_t negatives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = laplace_sample(scale, rng);
    sum += x;
    sum_sq += x * x;
    if (x < 0.0) ++negatives;
  }
  const double variance = sum_sq / n - (sum / n) * (sum / n);
  // Var(Laplace(b)) = 2 b^2 = 8.
  CHECK(variance == Catch::Approx(8.0).epsilon(0.02));

  // Symmetry: fraction of negative draws inside the binomial 99% CI of 1/2.
  const double half_width = 2.576 * 0.5 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(static_cast<double>(negatives) / n - 0.5) < half_width);
}

TEST_CASE("laplace_sample rejects non-positive scale") {
  RandomStream rng(1);
  CHECK_THROWS(laplace_sample(0.0, rng));
  CHECK_THROWS(laplace_sample(-1.0, rng));
}

TEST_CASE("gaussian_sample matches the analytic distribution") {
  const std::size_t n = 1'000'000;
  RandomStream rng(99);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = gaussian_sample(1.0, rng);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double variance = sum_sq / n - mean * mean;
  CHECK(variance == Catch::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("gaussian_sample rejects sigma = 0") {
  RandomStream rng(1);
  CHECK_THROWS(gaussian_sample(0.0, rng));
}

TEST_CASE("samplers are deterministic in the seed") {
  RandomStream a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(laplace_sample(1.5, a) == laplace_sample(1.5, b));
  }
}

TEST_CASE("clamp") {
  CHECK(clamp(5.0, 0.0, 10.0) == 5.0);
  CHECK(clamp(-3.0, 0.0, 10.0) == 0.0);
  CHECK(clamp(99.0, 0.0, 10.0) == 10.0);
  CHECK_THROWS(clamp(1.0, 2.0, 0.0));
}

TEST_CASE("PrivacyParams validation") {
  CHECK_THROWS(PrivacyParams(0.0, 0.0));
  CHECK_THROWS(PrivacyParams(1.0, 1.0));
  CHECK_THROWS(PrivacyParams(1.0, -0.1));
  CHECK_NOTHROW(PrivacyParams(0.1, 0.0));
}

TEST_CASE("laplace_mechanism") {
  SECTION("zero-noise stub returns the true value") {
    BudgetLedger ledger(PrivacyParams(1.0, 0.0));
    ZeroNoise noise;
    CHECK(laplace_mechanism(42.0, 1.0, PrivacyParams(1.0, 0.0), ledger,
                            noise) == 42.0);
    CHECK(ledger.spent_epsilon() == 1.0);
  }
  SECTION("noise scale is sensitivity / epsilon") {
    // At sensitivity 1 and epsilon 0.1, b = 10 and Var = 2 b^2 = 200.
    SeededNoise noise(7);
    BudgetLedger ledger(PrivacyParams(1e9, 0.0));
    const std::size_t n = 200'000;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = laplace_mechanism(0.0, 1.0, PrivacyParams(0.1, 0.0),
                                         ledger, noise);
      sum_sq += x * x;
    }
    CHECK(sum_sq / n == Catch::Approx(200.0).epsilon(0.05));
  }
  SECTION("rejects a delta > 0 budget") {
    BudgetLedger ledger(PrivacyParams(1.0, 0.5));
    ZeroNoise noise;
    CHECK_THROWS(laplace_mechanism(1.0, 1.0, PrivacyParams(1.0, 0.5), ledger,
                                   noise));
  }
  SECTION("rejects non-positive sensitivity") {
    BudgetLedger ledger(PrivacyParams(1.0, 0.0));
    ZeroNoise noise;
    CHECK_THROWS(laplace_mechanism(1.0, 0.0, PrivacyParams(1.0, 0.0), ledger,
                                   noise));
  }
}

TEST_CASE("BudgetLedger enforces sequential composition") {
  BudgetLedger ledger(PrivacyParams(0.75, 0.0));
  ZeroNoise noise;
  CHECK_NOTHROW(laplace_mechanism(1.0, 1.0, PrivacyParams(0.5, 0.0), ledger,
                                  noise));
  CHECK_THROWS_AS(laplace_mechanism(1.0, 1.0, PrivacyParams(0.5, 0.0), ledger,
                                    noise),
                  BudgetExhaustedError);
  // The rejected call must not have spent anything.
  CHECK(ledger.spent_epsilon() == 0.5);
  CHECK(ledger.entries().size() == 1);
}

TEST_CASE("ledger spend is monotone") {
  BudgetLedger ledger(PrivacyParams(2.0, 0.0));
  double last = 0.0;
  for (int i = 0; i < 4; ++i) {
    ledger.charge("step", 0.5, 0.0);
    CHECK(ledger.spent_epsilon() >= last);
    last = ledger.spent_epsilon();
  }
  CHECK_THROWS_AS(ledger.charge("step", 0.5, 0.0), BudgetExhaustedError);
}

TEST_CASE("NoiseSpec validation") {
  CHECK_THROWS(NoiseSpec(NoiseFamily::kLaplace, 0.0));
  CHECK_NOTHROW(NoiseSpec(NoiseFamily::kGaussian, 1.0));
}
