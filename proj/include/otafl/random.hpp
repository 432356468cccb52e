// Copyright 2026 The otafl Authors
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

#ifndef OTAFL_RANDOM_HPP_
#define OTAFL_RANDOM_HPP_

#include <cstdint>
#include <random>

namespace otafl {

// Every random quantity is drawn from a stream keyed by what it is for.
// Adding clients or rounds never shifts another key's stream.
enum class Purpose : std::uint64_t {
  kGain = 1,
  kPhase = 2,
  kClientNoise = 3,
  kAwgn = 4,
  kCoin = 5,
  kMinibatch = 6,
  kTask = 7,
  kAudit = 8,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// seed' = mix(mix(mix(mix(master) ^ purpose) ^ round) ^ client).
std::uint64_t derive_seed(std::uint64_t master, Purpose purpose,
                          std::uint64_t round = 0,
                          std::uint64_t client = 0) noexcept;

// mt19937_64 with hand-written transforms. The std:: distributions are
// implementation-defined, which would break cross-platform CSV identity.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}
  Stream(std::uint64_t master, Purpose purpose, std::uint64_t round = 0,
         std::uint64_t client = 0)
      : engine_(derive_seed(master, purpose, round, client)) {}

  std::uint64_t bits() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal by Box-Muller; the second variate is cached.
  double normal();
  double exponential(double mean);
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace otafl

#endif  // OTAFL_RANDOM_HPP_
