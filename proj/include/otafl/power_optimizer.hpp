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

#ifndef OTAFL_POWER_OPTIMIZER_HPP_
#define OTAFL_POWER_OPTIMIZER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

#include "otafl/channel.hpp"
#include "otafl/convergence.hpp"
#include "otafl/rdp.hpp"
#include "otafl/strategy.hpp"

namespace otafl {

enum class IdleRhoMethod { kClosedForm, kNumerical };

// Which constant multiplies the gradient term in the rho_gamma closed
// forms. kMG2 exists only as a mutation for the validate subcommand.
enum class GradientConstant { kM2G, kMG2 };

struct OptimizerConfig {
  double lambda1 = 1.0;
  double lambda2 = 1e-5;
  double gamma_bar = 1e-2;
  double eps_bar = 100.0;
  double power = 1.0;       // P
  double grad_bound = 1.0;  // W
  int alpha = 2;
  ChannelParams channel = ChannelParams::homogeneous(100, 0.5, 1e-2);
  LearningParams learning;
  double bisection_tol = 1e-9;  // Psi
  int bisection_max_iters = 200;
  IdleRhoMethod idle_rho = IdleRhoMethod::kClosedForm;
  // Keep each rho_tau inside {gamma_approx <= gamma_bar, eps <= eps_bar}.
  bool enforce_budget = true;
  GradientConstant gradient_constant = GradientConstant::kM2G;

  double rho_cap() const { return power / (grad_bound * grad_bound); }
  // Lower end of every rho search, keeps clear of the rho = 0 pole.
  double rho_floor() const { return 1e-9 * rho_cap(); }
  void validate() const;
};

struct FeasibleSet {
  std::int64_t tau_min = 1;
  std::int64_t tau_max = 1;
  std::int64_t size() const { return tau_max - tau_min + 1; }
};

enum class RhoMethod { kClosedForm, kBisection, kGoldenSection, kBoundary };

struct RhoSolution {
  double rho = 0.0;
  RhoMethod method = RhoMethod::kClosedForm;
  int iterations = 0;
  bool clamped = false;
  bool projected = false;
};

struct PowerBalanceSolution {
  double rho_opt = 0.0;
  std::int64_t tau_opt = 0;
  double utility = 0.0;
  FeasibleSet feasible;
  StrategySpec strategy;
  RhoMethod method = RhoMethod::kClosedForm;
  // True when the unconstrained rho_tau was moved onto the budget interval.
  bool projected = false;
};

struct UtilityTerms {
  double gamma = 0.0;
  double eps = 0.0;
  double value = 0.0;
};

// Per-round privacy parameters at rho. sigma_q^2 includes channel AWGN;
// the noise-free baseline carries AWGN only.
PrivacyParams privacy_at(double rho, const StrategySpec& strategy,
                         const OptimizerConfig& cfg);

// Optimizer-mode context: K_t(rho) and artificial noise only.
ChannelContext optimizer_context(double rho, const StrategySpec& strategy,
                                 const OptimizerConfig& cfg);

// Lemma-1 closed forms for noisy and idle. Mixed has no closed form and
// uses the numerical argmin of the same objective.
double rho_gamma(const StrategySpec& strategy, const OptimizerConfig& cfg);
std::int64_t tau_gamma_min(const StrategySpec& strategy,
                           const OptimizerConfig& cfg);
std::int64_t tau_eps_max(const StrategySpec& strategy,
                         const OptimizerConfig& cfg);
FeasibleSet feasible_set(const StrategySpec& strategy,
                         const OptimizerConfig& cfg);
// tau_max - tau_min + 1 without throwing; <= 0 when the set is empty.
std::int64_t feasible_extent(const StrategySpec& strategy,
                             const OptimizerConfig& cfg);

UtilityTerms utility_terms(double rho, std::int64_t tau,
                           const StrategySpec& strategy,
                           const OptimizerConfig& cfg);
inline double utility(double rho, std::int64_t tau,
                      const StrategySpec& strategy,
                      const OptimizerConfig& cfg) {
  return utility_terms(rho, tau, strategy, cfg).value;
}

RhoSolution rho_opt_idle(std::int64_t tau, const OptimizerConfig& cfg);
RhoSolution rho_opt_noisy(std::int64_t tau, const OptimizerConfig& cfg);
// Algorithm-2 style bisection on the sign of dG/drho for any strategy.
RhoSolution rho_opt_bisection(std::int64_t tau, const StrategySpec& strategy,
                              const OptimizerConfig& cfg);
// Golden-section minimizer of utility(., tau) on [rho_floor, rho_cap].
RhoSolution rho_opt_numeric(std::int64_t tau, const StrategySpec& strategy,
                            const OptimizerConfig& cfg);

// rho-interval where gamma_approx <= gamma_bar and eps <= eps_bar.
std::optional<std::pair<double, double>> budget_interval(
    std::int64_t tau, const StrategySpec& strategy,
    const OptimizerConfig& cfg);

// Stage II rho at one tau, as used by the line search. Empty when the
// budget interval is empty.
std::optional<RhoSolution> stage_two_rho(std::int64_t tau,
                                         const StrategySpec& strategy,
                                         const OptimizerConfig& cfg);

PowerBalanceSolution two_stage_optimize(const StrategySpec& strategy,
                                        const OptimizerConfig& cfg);

double baseline_rho(Baseline baseline, const OptimizerConfig& cfg,
                    std::int64_t tau, const GainDraw* gains = nullptr);

struct ScalarMinimum {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
};

// Golden-section search for a unimodal f on [lo, hi]. Endpoints are
// compared too, so boundary minima come back exactly.
ScalarMinimum golden_section_minimize(const std::function<double(double)>& f,
                                      double lo, double hi,
                                      double rel_tol = 1e-12,
                                      int max_iters = 500);

}  // namespace otafl

#endif  // OTAFL_POWER_OPTIMIZER_HPP_
