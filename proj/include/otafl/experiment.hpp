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

#ifndef OTAFL_EXPERIMENT_HPP_
#define OTAFL_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "otafl/config.hpp"
#include "otafl/csv.hpp"

namespace otafl {

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

std::string format_check(const CheckResult& check);

// Closed-form rho (rho_gamma idle/noisy, rho_opt_idle) against golden-section
// minimization of the objective each one claims to minimize, over the 3x3x3
// (M, G, sigma^2) grid. One result per formula, measured = worst relative gap.
std::vector<CheckResult> check_closed_forms(const OptimizerConfig& base);
// Same, at `cfg` only. Used by validate.
std::vector<CheckResult> check_closed_forms_at(const OptimizerConfig& cfg);

// Monte-Carlo K_t, P_n, P_i through the engine's transmit plan against the
// closed forms at five rho values. `rounds` * K draws in total.
std::vector<CheckResult> check_channel_statistics(const OptimizerConfig& cfg,
                                                  std::uint64_t seed,
                                                  int rounds);

// oracle <= exact <= bound over the grid, plus the theorem-1 identity.
std::vector<CheckResult> check_rdp_ordering(const RdpGrid& grid);

// Seed-mean f(Theta_tau) - f* against theorem2_bound at the optimizer's
// (rho, tau) for `strategy`.
CheckResult check_convergence_ordering(const ResolvedSystem& sys,
                                       const StrategySpec& strategy, int seeds,
                                       std::uint64_t first_seed);

std::vector<CheckResult> run_validation_suite(const ResolvedSystem& sys);

// One --axis argument: name=v1,v2,...
struct AxisSpec {
  std::string name;
  std::vector<double> values;
  static AxisSpec parse(const std::string& text);
};

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<StrategySpec> strategy;
  std::optional<AxisSpec> axis;
};

// (rho, tau) a training run uses: the strategy's own optimum for CDPB, the
// idle optimum's tau for baselines; config overrides win.
struct TrainingPlan {
  double rho = 0.0;
  std::int64_t tau = 0;
};
TrainingPlan plan_training(const ResolvedSystem& sys, const StrategySpec& strategy);

CsvTable optimize_table(const ResolvedSystem& sys, bool* all_feasible);
CsvTable trace_table(const TrainingResult& result);
CsvTable sweep_table(const ResolvedSystem& sys, const AxisSpec& axis);
CsvTable rdp_table(const RdpGrid& grid);

int cmd_optimize(const SystemConfig& cfg, const RunOptions& opts, std::ostream& log);
int cmd_train(const SystemConfig& cfg, const RunOptions& opts, std::ostream& log);
int cmd_sweep(const SystemConfig& cfg, const RunOptions& opts, std::ostream& log);
int cmd_rdp(const SystemConfig& cfg, const RunOptions& opts, std::ostream& log);
int cmd_validate(const SystemConfig& cfg, const RunOptions& opts, std::ostream& log);

// File-name-safe strategy label ("mixed:0.5" -> "mixed-0.5").
std::string strategy_slug(const StrategySpec& s);

}  // namespace otafl

#endif  // OTAFL_EXPERIMENT_HPP_
