// Copyright (c) 2026 The prosim authors
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

#ifndef PROSIM_COMMON_HPP_
#define PROSIM_COMMON_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace prosim {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shortest decimal string that parses back to exactly the same double.
// All CSV/JSON numeric output goes through this so re-runs are byte-identical.
std::string FormatDouble(double value);

// Linear-interpolation percentile, p in [0, 100]. Copies and sorts its input.
double Percentile(std::vector<double> values, double p);

double Mean(const std::vector<double>& values);

// splitmix64; used to derive independent seed substreams.
uint64_t SplitMix64(uint64_t x);

// Deterministic engine. std::mt19937_64 output is specified by the standard,
// so everything seeded through here reproduces across platforms. The helpers
// below avoid std::uniform_*_distribution, whose mapping is not portable.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }

  // Uniform in [0, n).
  size_t Index(size_t n) { return static_cast<size_t>(engine_() % n); }

  // Uniform in [0, 1).
  double Real() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller.
  double Gaussian();

  // Fisher-Yates.
  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[Index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Runs fn(i) for i in [0, n) on up to jobs threads. Results must be written
// to per-index slots by the caller; completion order is not observable.
void ParallelFor(size_t n, unsigned jobs, const std::function<void(size_t)>& fn);

}  // namespace prosim

#endif  // PROSIM_COMMON_HPP_
