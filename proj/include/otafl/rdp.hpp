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

#ifndef OTAFL_RDP_HPP_
#define OTAFL_RDP_HPP_

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <vector>

#include "otafl/error.hpp"

namespace otafl {

template <std::floating_point T>
struct BasicPrivacyParams {
  T alpha = 2;
  T grad_bound = 1;  // W
  T noise_var = 1;   // sigma_q^2
  T participation = 1;

  void validate(bool integer_alpha) const {
    if (!(alpha > T(1))) throw ValidationError("privacy.alpha", "must be > 1");
    if (integer_alpha && (alpha < T(2) || alpha != std::floor(alpha))) {
      throw ValidationError("privacy.alpha",
                            "subsampled forms need an integer >= 2");
    }
    if (!(grad_bound > T(0))) {
      throw ValidationError("privacy.grad_bound", "must be > 0");
    }
    if (!(noise_var > T(0))) {
      throw ValidationError("privacy.noise_var", "must be > 0");
    }
    if (!(participation >= T(0) && participation <= T(1))) {
      throw ValidationError("privacy.participation", "must lie in [0, 1]");
    }
  }
};

using PrivacyParams = BasicPrivacyParams<double>;

namespace internal {

// log(1 + e^x) without overflow.
template <std::floating_point T>
T softplus(T x) {
  return x > T(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <std::floating_point T>
T log_binomial(int n, int k) {
  return std::lgamma(T(n + 1)) - std::lgamma(T(k + 1)) -
         std::lgamma(T(n - k + 1));
}

// log(p e^y + 1); exactly 0 when p = 0.
template <std::floating_point T>
T log_mixture_term(T p, T y) {
  if (p == T(0)) return T(0);
  return softplus(std::log(p) + y);
}

}  // namespace internal

// alpha * (2W^2) / (2 sigma_q^2).
template <std::floating_point T>
T gaussian_round_eps(const BasicPrivacyParams<T>& pp) {
  pp.validate(false);
  return pp.alpha * pp.grad_bound * pp.grad_bound / pp.noise_var;
}

// Subsampled Gaussian RDP, evaluated as a log-sum-exp so that the
// exponentials E_{(j-1)j} never materialize.
template <std::floating_point T>
T subsampled_round_eps_exact(const BasicPrivacyParams<T>& pp) {
  pp.validate(true);
  const T p = pp.participation;
  if (p == T(0)) return T(0);
  const int alpha = static_cast<int>(pp.alpha);
  const T r = pp.grad_bound * pp.grad_bound / pp.noise_var;
  const T log_p = std::log(p);

  std::vector<T> terms;
  terms.reserve(static_cast<std::size_t>(alpha));
  terms.push_back(T(0));
  // min{4(E_2 - 1), 2E_2}, compared in log domain.
  const T x2 = T(2) * r;
  const T branch_a = std::log(T(4)) + x2 + std::log1p(-std::exp(-x2));
  const T branch_b = std::log(T(2)) + x2;
  terms.push_back(T(2) * log_p + internal::log_binomial<T>(alpha, 2) +
                  std::min(branch_a, branch_b));
  for (int j = 3; j <= alpha; ++j) {
    terms.push_back(T(j) * log_p + internal::log_binomial<T>(alpha, j) +
                    std::log(T(2)) + T((j - 1) * j) * r);
  }
  const T top = *std::max_element(terms.begin(), terms.end());
  T acc = 0;
  for (T t : terms) acc += std::exp(t - top);
  return (top + std::log(acc)) / (pp.alpha - T(1));
}

// (1/(alpha-1)) log(2 (p E_{alpha-1} + 1)^alpha).
template <std::floating_point T>
T subsampled_round_eps_bound(const BasicPrivacyParams<T>& pp) {
  pp.validate(true);
  const T r = pp.grad_bound * pp.grad_bound / pp.noise_var;
  const T am1 = pp.alpha - T(1);
  return (std::log(T(2)) +
          pp.alpha * internal::log_mixture_term(pp.participation, am1 * r)) /
         am1;
}

// tau log2/(alpha-1) + (tau alpha/(alpha-1)) log(p e^{(alpha-1)W^2/sq} + 1).
template <std::floating_point T>
T theorem1_total_eps(std::int64_t tau, const BasicPrivacyParams<T>& pp) {
  pp.validate(true);
  if (tau < 0) throw ValidationError("tau", "must be >= 0");
  const T r = pp.grad_bound * pp.grad_bound / pp.noise_var;
  const T am1 = pp.alpha - T(1);
  const T t = static_cast<T>(tau);
  return t * std::log(T(2)) / am1 +
         (t * pp.alpha / am1) *
             internal::log_mixture_term(pp.participation, am1 * r);
}

// Running composition. Totals use Neumaier summation so long ledgers
// do not drift.
class RdpLedger {
 public:
  RdpLedger compose(double round_eps) const;
  const std::vector<double>& per_round_eps() const { return per_round_; }
  double total_eps() const { return sum_ + compensation_; }
  std::size_t rounds() const { return per_round_.size(); }

 private:
  std::vector<double> per_round_;
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

inline RdpLedger compose(const RdpLedger& ledger, double round_eps) {
  return ledger.compose(round_eps);
}

// Numerical Renyi divergence between N(0, s2) and the mixture
// p N(delta, s2) + (1 - p) N(0, s2), max over both directions.
// Throws NumericalError if adaptive quadrature misses 1e-6 relative.
double renyi_divergence_oracle(double alpha, double p, double delta,
                               double sigma_q2);

}  // namespace otafl

#endif  // OTAFL_RDP_HPP_
