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

#include "otafl/channel.hpp"

#include <algorithm>
#include <numbers>

namespace otafl {

bool ChannelParams::is_homogeneous() const {
  return std::adjacent_find(sigma2.begin(), sigma2.end(),
                            std::not_equal_to<>()) == sigma2.end();
}

void ChannelParams::validate() const {
  if (sigma2.empty()) {
    throw ValidationError("channel.num_clients", "must be >= 1");
  }
  for (double s : sigma2) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw ValidationError("channel.sigma2", "every entry must be > 0");
    }
  }
  if (!(awgn_var >= 0.0) || !std::isfinite(awgn_var)) {
    throw ValidationError("channel.awgn_var", "must be >= 0");
  }
}

GainDraw sample_gains(const ChannelParams& params, std::uint64_t seed,
                      std::uint64_t round) {
  const int k = params.num_clients();
  GainDraw draw{Eigen::VectorXd(k), Eigen::VectorXd(k), round};
  for (int i = 0; i < k; ++i) {
    Stream gain(seed, Purpose::kGain, round, static_cast<std::uint64_t>(i));
    Stream phase(seed, Purpose::kPhase, round, static_cast<std::uint64_t>(i));
    draw.gains[i] = gain.exponential(2.0 * params.sigma2[i]);
    draw.phases[i] = 2.0 * std::numbers::pi * phase.uniform();
  }
  return draw;
}

GainDraw sample_gains(const ChannelParams& params, Stream& stream,
                      std::uint64_t round) {
  const int k = params.num_clients();
  GainDraw draw{Eigen::VectorXd(k), Eigen::VectorXd(k), round};
  for (int i = 0; i < k; ++i) {
    draw.gains[i] = stream.exponential(2.0 * params.sigma2[i]);
  }
  for (int i = 0; i < k; ++i) {
    draw.phases[i] = 2.0 * std::numbers::pi * stream.uniform();
  }
  return draw;
}

}  // namespace otafl
