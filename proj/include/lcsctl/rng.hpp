/*
 Copyright 2026 The lcsctl authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef LCSCTL_RNG_HPP
#define LCSCTL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "lcsctl/common.hpp"

namespace lcsctl {

/// Deterministic random source. All randomized routines in the library draw
/// through this wrapper so that a seed pins down every sample exactly,
/// independent of the platform's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() {
    // 53 mantissa bits, same mapping everywhere.
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (no cached spare, keeps state minimal).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Vector normal_vector(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  /// Uniform over the solid Euclidean ball of the given radius.
  Vector ball(int n, double radius) {
    Vector g = normal_vector(n);
    const double nrm = g.norm();
    if (nrm == 0.0) return Vector::Zero(n);
    const double r = radius * std::pow(uniform(), 1.0 / n);
    return (r / nrm) * g;
  }

  std::uint64_t raw() { return engine_(); }

  /// Stable per-trial substream: splitmix64 over (seed, index).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lcsctl

#endif  // LCSCTL_RNG_HPP
