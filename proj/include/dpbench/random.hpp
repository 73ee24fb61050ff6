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
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string_view>

namespace dpbench {

/// Deterministic random stream. All draws are pure functions of the seed
/// and the draw sequence; no global state.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (no cached spare, keeps the draw
  /// count per call fixed).
  double standard_normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// One Laplace(0, scale) draw by inverse CDF of a uniform on (-1/2, 1/2).
inline double laplace_sample(double scale, RandomStream& rng) {
  if (!(scale > 0.0)) {
    throw std::invalid_argument("laplace_sample: scale must be positive");
  }
  const double u = rng.uniform01() - 0.5;
  const double sign = (u < 0.0) ? -1.0 : 1.0;
  return -scale * sign * std::log1p(-2.0 * std::abs(u));
}

/// One Normal(0, sigma^2) draw.
inline double gaussian_sample(double sigma, RandomStream& rng) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("gaussian_sample: sigma must be positive");
  }
  return sigma * rng.standard_normal();
}

/// Noise source abstraction so mechanisms can be exercised with the noise
/// switched off in tests.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;
  virtual double laplace(double scale) = 0;
  virtual double gaussian(double sigma) = 0;
};

class SeededNoise final : public NoiseSource {
 public:
  explicit SeededNoise(std::uint64_t seed) : rng_(seed) {}
  explicit SeededNoise(RandomStream rng) : rng_(rng) {}

  double laplace(double scale) override { return laplace_sample(scale, rng_); }
  double gaussian(double sigma) override {
    return gaussian_sample(sigma, rng_);
  }

  RandomStream& stream() { return rng_; }

 private:
  RandomStream rng_;
};

/// Returns zero for every draw. Parameter validation still applies.
class ZeroNoise final : public NoiseSource {
 public:
  double laplace(double scale) override {
    if (!(scale > 0.0)) {
      throw std::invalid_argument("laplace: scale must be positive");
    }
    return 0.0;
  }
  double gaussian(double sigma) override {
    if (!(sigma > 0.0)) {
      throw std::invalid_argument("gaussian: sigma must be positive");
    }
    return 0.0;
  }
};

/// FNV-1a over the byte representation of the parts, used to derive
/// per-cell seeds that are stable across runs and platforms.
class SeedHasher {
 public:
  SeedHasher& mix(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      byte(static_cast<unsigned char>(v >> (8 * i)));
    }
    return *this;
  }
  SeedHasher& mix(std::string_view s) {
    for (char c : s) byte(static_cast<unsigned char>(c));
    byte(0xffu);  // separator
    return *this;
  }
  std::uint64_t value() const { return h_; }

 private:
  void byte(unsigned char b) {
    h_ ^= b;
    h_ *= 0x100000001b3ull;
  }
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

}  // namespace dpbench
