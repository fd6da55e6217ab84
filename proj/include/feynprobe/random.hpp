// Copyright 2026 The feynprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Counter-based random streams.
//
// The i-th variate of a stream is a pure function of (key, i), so results
// never depend on how work is scheduled across threads. The mixing function
// is the SplitMix64 finalizer.

#pragma once

#include <cstdint>

namespace feynprobe {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Key of the `index`-th sub-stream of a master seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master ^ 0x6a09e667f3bcc909ULL) + 0x9e3779b97f4a7c15ULL * (index + 1));
}

class CounterStream {
 public:
  explicit constexpr CounterStream(std::uint64_t key) : key_(key) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix64(key_ + 0x9e3779b97f4a7c15ULL * (counter + 1));
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

/// Binomial(trials, p) as the number of the first `trials` uniforms below p.
/// Exact for every p; p <= 0 gives 0 and p >= 1 gives `trials`.
inline std::uint64_t binomial_draw(const CounterStream& stream, std::uint64_t trials, double p) {
  std::uint64_t successes = 0;
  for (std::uint64_t i = 0; i < trials; ++i) successes += stream.uniform(i) < p ? 1 : 0;
  return successes;
}

}  // namespace feynprobe
