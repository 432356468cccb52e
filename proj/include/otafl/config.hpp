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

#ifndef OTAFL_CONFIG_HPP_
#define OTAFL_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "otafl/fl_engine.hpp"
#include "otafl/power_optimizer.hpp"
#include "otafl/strategy.hpp"
#include "otafl/task.hpp"

namespace otafl {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kEnvPrefix = "OTAFL__";

// Learning constants. Unset values are measured from the task.
struct LearningSection {
  int local_steps = 1;
  int batch_size = 0;
  std::optional<double> smoothness;
  std::optional<double> strong_convexity;
  std::optional<double> grad_sq_bound;
  std::optional<double> schedule_offset;
  std::optional<double> init_gap;
  int certify_rounds = 200;
  double headroom = 1.2;
};

struct TrainingSection {
  StrategySpec strategy = StrategySpec::idle();
  std::uint64_t seed = 1;
  int num_seeds = 1;
  DivisorMode divisor = DivisorMode::kRealized;
  UpdateForm update_form = UpdateForm::kRescaledGradient;
  std::optional<double> rho;
  std::optional<std::int64_t> tau;
  bool normalize_to_bound = false;
};

struct RdpGrid {
  std::vector<int> alphas{2, 3, 4, 5, 6, 7, 8};
  std::vector<double> participations{0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                     0.6, 0.7, 0.8, 0.9};
  std::vector<double> ratios{0.01, 0.1, 0.5};  // W^2 / sigma_q^2
};

struct SystemConfig {
  int schema_version = kSchemaVersion;
  ChannelParams channel = ChannelParams::homogeneous(100, 0.5, 1e-2);
  double power = 1.0;
  double grad_bound = 1.0;
  int alpha = 2;
  double eps_bar = 100.0;
  TaskSpec task;
  LearningSection learning;
  // Only lambda/gamma_bar/bisection/method fields are read from here; the
  // shared scalars above are copied in by resolve().
  OptimizerConfig optimizer;
  TrainingSection training;
  RdpGrid rdp;
  std::filesystem::path output_dir = "out";

  // Re-checks every module invariant plus the cross-field rules.
  void validate() const;
};

// Parses JSON text. Unknown keys are errors. `origin` names the source in
// messages. Environment overrides are applied when `use_env` is set.
SystemConfig parse_config(const std::string& text,
                          const std::string& origin = "<string>",
                          bool use_env = true);
SystemConfig load_config(const std::filesystem::path& path,
                         bool use_env = true);
// Every default, as the JSON a user would write.
std::string default_config_json();

// A config with its task built and every learning constant filled in.
struct ResolvedSystem {
  SystemConfig config;
  std::shared_ptr<const SyntheticTask> task;
  OptimizerConfig optimizer;  // fully populated
};

ResolvedSystem resolve(const SystemConfig& config);

// headroom * max_k,t ||grad f_k(theta_t)||^2 along a noise-free,
// full-participation reference run of `rounds` rounds.
double certify_gradient_bound(const SyntheticTask& task,
                              const LearningParams& lp, int rounds,
                              double headroom, double grad_bound);

// Training setup for one (strategy, rho, tau, seed).
TrainingSetup make_training_setup(const ResolvedSystem& sys,
                                  const StrategySpec& strategy, double rho,
                                  std::int64_t tau, std::uint64_t seed);

}  // namespace otafl

#endif  // OTAFL_CONFIG_HPP_
