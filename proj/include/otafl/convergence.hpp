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

#ifndef OTAFL_CONVERGENCE_HPP_
#define OTAFL_CONVERGENCE_HPP_

#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>

#include "otafl/channel.hpp"
#include "otafl/error.hpp"

namespace otafl {

struct LearningParams {
  double smoothness = 1.0;        // M
  double strong_convexity = 1.0;  // mu
  double grad_sq_bound = 1.0;     // G
  double schedule_offset = 4.0;   // a
  int local_steps = 1;            // L
  double grad_bound = 1.0;        // W
  int model_dim = 10;             // d
  double init_gap = 0.0;          // E||theta_0 - theta*||^2

  void validate() const;
};

// Expected participant count and effective noise at one rho.
struct ChannelContext {
  double expected_participants = 0.0;  // K_t(rho)
  double noise_var = 0.0;              // sigma_q^2
};

// Whether channel AWGN is folded into sigma_q^2. The optimizer excludes it;
// the training harness includes it.
enum class NoiseAccounting { kArtificialOnly, kWithAwgn };

// K_t and sigma_q^2 at rho for a strategy weight (0 idle, 1 noisy).
// `artificial` false zeroes the client noise, as in the noise-free baseline.
ChannelContext make_channel_context(double noisy_weight, double rho,
                                    const ChannelParams& channel, double power,
                                    double grad_bound, NoiseAccounting mode,
                                    bool artificial = true);

template <std::floating_point T>
T step_size(std::int64_t t, const LearningParams& lp) {
  return T(4) / (T(lp.strong_convexity) * (T(lp.schedule_offset) + T(t)));
}

// S_tau = sum_{t < tau} (a + t)^2, by the power-sum closed form.
template <std::floating_point T>
T weight_sum(std::int64_t tau, const LearningParams& lp) {
  if (tau < 1) throw ValidationError("tau", "must be >= 1");
  const T a = lp.schedule_offset;
  const T n = static_cast<T>(tau);
  // sum (a+t)^2 = n a^2 + 2a n(n-1)/2 + (n-1)n(2n-1)/6
  return n * a * a + a * n * (n - T(1)) +
         (n - T(1)) * n * (T(2) * n - T(1)) / T(6);
}

namespace internal {

template <std::floating_point T>
void check_context(T rho, const ChannelContext& ctx) {
  if (!(rho > T(0))) throw ValidationError("rho", "must be > 0");
  if (!(ctx.expected_participants >= 1.0)) {
    throw ValidationError("expected_participants",
                          "degenerate participation: K_t(rho) < 1");
  }
}

// 4 M^2 G / K_t + sigma_q^2 / (K_t^2 rho).
template <std::floating_point T>
T bracket(T rho, const LearningParams& lp, const ChannelContext& ctx) {
  const T k = ctx.expected_participants;
  const T m = lp.smoothness;
  return T(4) * m * m * T(lp.grad_sq_bound) / k +
         T(ctx.noise_var) / (k * k * rho);
}

}  // namespace internal

template <std::floating_point T>
T theorem2_bound(std::int64_t tau, T rho, const LearningParams& lp,
                 const ChannelContext& ctx) {
  internal::check_context(rho, ctx);
  const T s = weight_sum<T>(tau, lp);
  const T a = lp.schedule_offset;
  const T mu = lp.strong_convexity;
  const T t = static_cast<T>(tau);
  return mu * a * a * a / (T(4) * s) * T(lp.init_gap) +
         T(2) * t * (t + a) / (mu * s) * internal::bracket(rho, lp, ctx);
}

template <std::floating_point T>
T gamma_approx(std::int64_t tau, T rho, const LearningParams& lp,
               const ChannelContext& ctx) {
  internal::check_context(rho, ctx);
  if (tau < 1) throw ValidationError("tau", "must be >= 1");
  return T(6) / static_cast<T>(tau) * internal::bracket(rho, lp, ctx);
}

}  // namespace otafl

#endif  // OTAFL_CONVERGENCE_HPP_
