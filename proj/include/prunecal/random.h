// Copyright 2026 The Authors.
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

// Platform-stable random streams.
//
// std::mt19937_64 is fully specified by the standard, but the std::*_
// distribution adaptors are not, so every draw used by the toolkit goes
// through the helpers below. Substreams are derived with a SplitMix64 mix of
// (seed, index) so results do not depend on execution order.

#ifndef PRUNECAL_RANDOM_H_
#define PRUNECAL_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <random>

namespace prunecal {

std::uint64_t SplitMix64(std::uint64_t x);

// Seed for substream `index` of `seed`.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform();

  // Uniform on [0, n) without modulo bias. n must be > 0.
  std::size_t Below(std::size_t n);

  // Standard normal via the Marsaglia polar method.
  double Normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace prunecal

#endif  // PRUNECAL_RANDOM_H_
