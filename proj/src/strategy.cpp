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

#include <charconv>
#include <string>

#include "otafl/error.hpp"
#include "otafl/strategy.hpp"

namespace otafl {

namespace {

constexpr std::pair<Baseline, std::string_view> kBaselines[] = {
    {Baseline::kGammaBased, "gamma_based"},
    {Baseline::kHMinBased, "h_min_based"},
    {Baseline::kNoiseFree, "noise_free"},
    {Baseline::kIndependentSampling, "is_based"},
};

}  // namespace

std::string_view baseline_name(Baseline b) {
  for (const auto& [value, name] : kBaselines) {
    if (value == b) return name;
  }
  return "none";
}

StrategySpec StrategySpec::parse(std::string_view text) {
  if (text == "noisy") return noisy();
  if (text == "idle") return idle();
  constexpr std::string_view kMixed = "mixed:";
  constexpr std::string_view kBaseline = "baseline:";
  if (text.starts_with(kMixed)) {
    const std::string_view num = text.substr(kMixed.size());
    double portion = 0.0;
    const auto [ptr, ec] =
        std::from_chars(num.data(), num.data() + num.size(), portion);
    if (ec != std::errc() || ptr != num.data() + num.size() ||
        !(portion >= 0.0 && portion <= 1.0)) {
      throw ValidationError("strategy",
                            "mixed portion must be a number in [0, 1]");
    }
    return mixed(portion);
  }
  // Bare baseline names are what name() prints, so accept them too.
  const std::string_view name =
      text.starts_with(kBaseline) ? text.substr(kBaseline.size()) : text;
  for (const auto& [value, n] : kBaselines) {
    if (n == name) return baseline_of(value);
  }
  throw ValidationError("strategy", "unknown strategy '" + std::string(text) +
                                        "'");
}

std::string StrategySpec::name() const {
  if (baseline != Baseline::kNone) {
    return std::string(baseline_name(baseline));
  }
  switch (mode) {
    case Unreliable::kNoisy: return "noisy";
    case Unreliable::kIdle: return "idle";
    case Unreliable::kMixed: {
      char buf[32];
      const auto r = std::to_chars(buf, buf + sizeof buf, portion);
      return "mixed:" + std::string(buf, r.ptr);
    }
  }
  return "idle";
}

}  // namespace otafl
