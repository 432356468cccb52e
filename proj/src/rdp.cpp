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

#include "otafl/rdp.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

namespace otafl {

RdpLedger RdpLedger::compose(double round_eps) const {
  if (!(round_eps >= 0.0) || !std::isfinite(round_eps)) {
    throw ValidationError("round_eps", "must be finite and >= 0");
  }
  RdpLedger next = *this;
  next.per_round_.push_back(round_eps);
  const double t = next.sum_ + round_eps;
  if (std::abs(next.sum_) >= round_eps) {
    next.compensation_ += (next.sum_ - t) + round_eps;
  } else {
    next.compensation_ += (round_eps - t) + next.sum_;
  }
  next.sum_ = t;
  return next;
}

namespace {

// Everything is scale free once x is measured in units of sigma_q.
// L(u) = mixture density / base density.
double log_ratio(double u, double p, double d) {
  if (p == 0.0) return 0.0;
  const double shifted = std::log(p) + d * u - 0.5 * d * d;
  if (p == 1.0) return shifted;
  const double a = std::log1p(-p);
  const double hi = std::max(a, shifted);
  return hi + std::log(std::exp(a - hi) + std::exp(shifted - hi));
}

// (1/(alpha-1)) log int phi(u) L(u)^power du.
double divergence(double alpha, double power, double p, double d, double lo,
                  double hi) {
  const auto log_integrand = [&](double u) {
    return -0.5 * u * u - 0.5 * std::log(2.0 * std::numbers::pi) +
           power * log_ratio(u, p, d);
  };
  double peak = -std::numeric_limits<double>::infinity();
  constexpr int kScan = 4000;
  for (int i = 0; i <= kScan; ++i) {
    peak = std::max(peak, log_integrand(lo + (hi - lo) * i / kScan));
  }
  const auto f = [&](double u) { return std::exp(log_integrand(u) - peak); };
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          f, lo, hi, 20, 1e-12, &error);
  if (!(value > 0.0) || !std::isfinite(value) || error > 1e-6 * value) {
    throw NumericalError("quadrature did not converge: estimate " +
                         std::to_string(value) + " error " +
                         std::to_string(error));
  }
  return (peak + std::log(value)) / (alpha - 1.0);
}

}  // namespace

double renyi_divergence_oracle(double alpha, double p, double delta,
                               double sigma_q2) {
  if (!(alpha > 1.0)) throw ValidationError("alpha", "must be > 1");
  if (!(sigma_q2 > 0.0)) throw ValidationError("sigma_q2", "must be > 0");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p", "must lie in [0, 1]");
  if (p == 0.0) return 0.0;
  const double d = delta / std::sqrt(sigma_q2);
  // +-12 standard deviations around every tilted centre either direction
  // can put its mass on.
  const double lo = std::min(0.0, (1.0 - alpha) * d) - 12.0;
  const double hi = std::max(d, alpha * d) + 12.0;
  const double forward = divergence(alpha, alpha, p, d, lo, hi);
  const double backward = divergence(alpha, 1.0 - alpha, p, d, lo, hi);
  return std::max(forward, backward);
}

}  // namespace otafl
