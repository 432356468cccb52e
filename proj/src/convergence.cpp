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

#include "otafl/convergence.hpp"

namespace otafl {

void LearningParams::validate() const {
  const auto positive = [](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError(field, "must be finite and > 0");
    }
  };
  positive(smoothness, "learning.smoothness");
  positive(strong_convexity, "learning.strong_convexity");
  positive(grad_sq_bound, "learning.grad_sq_bound");
  positive(schedule_offset, "learning.schedule_offset");
  positive(grad_bound, "power.grad_bound");
  if (local_steps < 1) throw ValidationError("learning.local_steps", "must be >= 1");
  if (model_dim < 1) throw ValidationError("task.dim", "must be >= 1");
  if (!(init_gap >= 0.0)) throw ValidationError("learning.init_gap", "must be >= 0");
  if (strong_convexity > smoothness) {
    throw ValidationError("learning.strong_convexity", "must not exceed smoothness");
  }
  if (!(schedule_offset > (std::numbers::sqrt2 + 1.0) * smoothness)) {
    throw ValidationError("learning.schedule_offset",
                          "must exceed (sqrt(2)+1) * smoothness");
  }
}

ChannelContext make_channel_context(double noisy_weight, double rho,
                                    const ChannelParams& channel, double power,
                                    double grad_bound, NoiseAccounting mode,
                                    bool artificial) {
  ChannelContext ctx;
  ctx.expected_participants =
      expected_participants(rho, channel, power, grad_bound);
  ctx.noise_var = artificial ? expected_noise_power(noisy_weight, rho, channel,
                                                    power, grad_bound)
                             : 0.0;
  if (mode == NoiseAccounting::kWithAwgn) ctx.noise_var += channel.awgn_var;
  return ctx;
}

}  // namespace otafl
