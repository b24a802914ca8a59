// Copyright 2026 The Memex Authors.
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

#ifndef MEMEX_RANDOM_H_
#define MEMEX_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "memex/matrix.h"

namespace memex {

// Seeded generator whose streams are identical on every platform:
// std::mt19937_64 is fully specified, and the distributions below are
// implemented here rather than taken from <random>, whose distributions are
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }
  double Uniform();                     // [0, 1)
  double Normal(double mean, double stddev);
  std::uint64_t Below(std::uint64_t n);  // uniform in [0, n)

  Matrix NormalMatrix(int rows, int cols, double stddev);

  template <typename T>
  void Shuffle(std::vector<T> &items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[Below(i)]);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 finalizer; used to derive independent seeds and hash-based
// embeddings.
std::uint64_t Mix64(std::uint64_t x);
std::uint64_t HashString(std::string_view s, std::uint64_t seed);

}  // namespace memex

#endif  // MEMEX_RANDOM_H_
