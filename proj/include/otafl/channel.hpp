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

#ifndef OTAFL_CHANNEL_HPP_
#define OTAFL_CHANNEL_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <vector>

#include "otafl/error.hpp"
#include "otafl/random.hpp"

namespace otafl {

struct ChannelParams {
  // One scale per client; all equal in the homogeneous case.
  std::vector<double> sigma2;
  double awgn_var = 0.0;

  static ChannelParams homogeneous(int num_clients, double sigma2,
                                   double awgn_var) {
    return {std::vector<double>(static_cast<std::size_t>(num_clients), sigma2),
            awgn_var};
  }
  int num_clients() const { return static_cast<int>(sigma2.size()); }
  bool is_homogeneous() const;
  void validate() const;
};

struct GainDraw {
  Eigen::VectorXd gains;
  Eigen::VectorXd phases;
  std::uint64_t round = 0;
};

// Gain h_k is exponential with mean 2*sigma2_k, so Pr(h > x) =
// exp(-x / (2 sigma2_k)). Client k draws from its own substream.
GainDraw sample_gains(const ChannelParams& params, std::uint64_t seed,
                      std::uint64_t round);

// All clients from a single caller-owned stream, gains first.
GainDraw sample_gains(const ChannelParams& params, Stream& stream,
                      std::uint64_t round = 0);

template <std::floating_point T>
T threshold(T rho, T power, T grad_bound) {
  if (!(rho >= T(0))) throw ValidationError("rho", "must be >= 0");
  return rho * grad_bound * grad_bound / power;
}

namespace internal {

template <std::floating_point T>
void check_rho(T rho, T power, T grad_bound) {
  const T cap = power / (grad_bound * grad_bound);
  if (!(rho >= T(0)) || rho > cap) {
    throw ValidationError("rho", "must lie in [0, P/W^2]");
  }
}

// rho W^2 / (2 P sigma2), the exponent shared by every closed form.
template <std::floating_point T>
T exponent(T rho, T power, T grad_bound, T sigma2) {
  return rho * grad_bound * grad_bound / (T(2) * power * sigma2);
}

}  // namespace internal

template <std::floating_point T>
T participation_probability(T rho, T power, T grad_bound, T sigma2) {
  internal::check_rho(rho, power, grad_bound);
  return std::exp(-internal::exponent(rho, power, grad_bound, sigma2));
}

template <std::floating_point T>
T expected_participants(T rho, const ChannelParams& params, T power,
                        T grad_bound) {
  internal::check_rho(rho, power, grad_bound);
  T sum = 0;
  for (double s2 : params.sigma2) {
    sum += std::exp(-internal::exponent(rho, power, grad_bound, T(s2)));
  }
  return sum;
}

// Channel-averaged artificial noise power, channel AWGN excluded.
// noisy_weight = 0 gives P_i, 1 gives P_n, anything between is the
// coin-flip mixture (1 - w) P_i + w P_n.
template <std::floating_point T>
T expected_noise_power(T noisy_weight, T rho, const ChannelParams& params,
                       T power, T grad_bound) {
  internal::check_rho(rho, power, grad_bound);
  const T w2 = grad_bound * grad_bound;
  T idle = 0;
  T noisy = 0;
  for (double s2 : params.sigma2) {
    const T full = T(2) * power * T(s2);
    const T e = std::exp(-internal::exponent(rho, power, grad_bound, T(s2)));
    idle += full * e;
    noisy += full - rho * w2 * e;
  }
  return (T(1) - noisy_weight) * idle + noisy_weight * noisy;
}

template <std::floating_point T>
T noise_power_noisy(T rho, const ChannelParams& params, T power,
                    T grad_bound) {
  return expected_noise_power(T(1), rho, params, power, grad_bound);
}

template <std::floating_point T>
T noise_power_idle(T rho, const ChannelParams& params, T power,
                   T grad_bound) {
  return expected_noise_power(T(0), rho, params, power, grad_bound);
}

}  // namespace otafl

#endif  // OTAFL_CHANNEL_HPP_
