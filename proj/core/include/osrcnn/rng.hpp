/* Copyright 2026 The osrcnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

// Portable random numbers. Every random choice in the library goes through
// Rng so that a seed reproduces bit-identical results on any conforming
// platform: the engine is std::mt19937_64 (fully specified by the standard)
// and the distributions below are implemented here instead of relying on the
// implementation-defined <random> distributions.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace osrcnn {

/// SplitMix64 finalizer; used to derive independent per-item seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n) by rejection; n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller (no cached second variate).
  double normal();

  /// `k` distinct elements drawn uniformly from `pool` via partial
  /// Fisher-Yates; k is clamped to pool.size(). Order is the draw order.
  std::vector<std::size_t> sample_without_replacement(std::span<const std::size_t> pool,
                                                      std::size_t k);

  /// Uniformly random permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace osrcnn
