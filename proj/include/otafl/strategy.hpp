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

#ifndef OTAFL_STRATEGY_HPP_
#define OTAFL_STRATEGY_HPP_

#include <string>
#include <string_view>

namespace otafl {

// What a client below the participation threshold does.
enum class Unreliable { kNoisy, kIdle, kMixed };

enum class Baseline {
  kNone,
  kGammaBased,
  kHMinBased,
  kNoiseFree,
  kIndependentSampling,
};

struct StrategySpec {
  Unreliable mode = Unreliable::kIdle;
  // Probability that an unreliable client transmits noise under kMixed.
  double portion = 0.0;
  Baseline baseline = Baseline::kNone;

  static StrategySpec noisy() { return {Unreliable::kNoisy, 1.0}; }
  static StrategySpec idle() { return {Unreliable::kIdle, 0.0}; }
  static StrategySpec mixed(double portion) {
    return {Unreliable::kMixed, portion};
  }
  static StrategySpec baseline_of(Baseline b) {
    return {Unreliable::kIdle, 0.0, b};
  }

  // Accepts noisy | idle | mixed:<portion> | baseline:<name>.
  static StrategySpec parse(std::string_view text);
  std::string name() const;

  // Weight on P_n in the mixed noise model. 0 is idle, 1 is noisy.
  double noisy_weight() const {
    switch (mode) {
      case Unreliable::kNoisy: return 1.0;
      case Unreliable::kIdle: return 0.0;
      case Unreliable::kMixed: return portion;
    }
    return 0.0;
  }
  bool artificial_noise() const { return baseline != Baseline::kNoiseFree; }

  friend bool operator==(const StrategySpec&, const StrategySpec&) = default;
};

std::string_view baseline_name(Baseline b);

}  // namespace otafl

#endif  // OTAFL_STRATEGY_HPP_
